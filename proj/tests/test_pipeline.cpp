#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "edgecal/config.hpp"
#include "edgecal/errors.hpp"
#include "edgecal/pipeline.hpp"
#include "edgecal/synth.hpp"

namespace edgecal {
namespace {

const std::filesystem::path kSource = EDGECAL_SOURCE_DIR;

class UrbanFrame : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    scene_ = new synth::SceneSpec(synth::load_scene(kSource / "presets/urban.scene"));
    config_ = new PipelineConfig(load_config(kSource / "configs/hdl64.cfg"));
    frame_ = new FramePair{synth::render_lidar(*scene_), synth::render_camera(*scene_), "urban", scene_->truth};
    features_ = new FrameFeatures(extract_features(*frame_, scene_->camera, scene_->truth, *config_));
  }
  static void TearDownTestSuite() {
    delete features_;
    delete frame_;
    delete config_;
    delete scene_;
  }
  static synth::SceneSpec* scene_;
  static PipelineConfig* config_;
  static FramePair* frame_;
  static FrameFeatures* features_;
};

synth::SceneSpec* UrbanFrame::scene_ = nullptr;
PipelineConfig* UrbanFrame::config_ = nullptr;
FramePair* UrbanFrame::frame_ = nullptr;
FrameFeatures* UrbanFrame::features_ = nullptr;

TEST_F(UrbanFrame, FeaturesAreConsistent) {
  const FrameFeatures& f = *features_;
  EXPECT_EQ(f.coarse_edges.size(), static_cast<std::size_t>(config_->camera_coarse_levels));
  EXPECT_LE(f.filtered.size(), f.labeled.size());
  EXPECT_EQ(f.labeled.size(), frame_->cloud.size());
  ASSERT_GT(f.edge_points.size(), 500u);
  EXPECT_EQ(f.edge_points.total_points, f.filtered.size());
  for (const EdgePoint& p : f.edge_points.points) {
    const double level = p.probability * 3.0;
    EXPECT_NEAR(level, std::round(level), 1e-12);
    EXPECT_GE(level, 1.0 - 1e-12);
  }
  std::size_t fg = 0;
  for (ObjectFlag flag : f.filtered.flag) fg += flag == ObjectFlag::kForeground;
  EXPECT_GT(fg, 100u);
  for (const auto& d : f.dense)
    for (double v : d.values.values()) ASSERT_TRUE(std::isfinite(v));
}

TEST_F(UrbanFrame, PanoramaCoversTheCamera) {
  const PanoramaGeometry& g = features_->geometry;
  const Eigen::Vector3d axis = scene_->truth.rotation().row(2).transpose();
  EXPECT_NEAR(wrap_angle(g.azimuth_center() - std::atan2(axis.y(), axis.x())), 0.0, g.delta_h());
  const double half_fov = std::atan(609.5593 / 721.5377);
  EXPECT_GE(g.azimuth_half_width(), half_fov);
}

TEST_F(UrbanFrame, TruthBeatsPerturbedGuesses) {
  const CostFunction cost = make_cost_function(*features_, config_->match_threshold);
  const double at_truth = cost(scene_->truth.to_vector());
  for (int i = 0; i < 6; ++i)
    for (double sign : {-1.0, 1.0}) {
      Vector6 v = scene_->truth.to_vector();
      v[i] += sign * (i < 3 ? 0.05 : 0.2);
      EXPECT_GT(at_truth, cost(v)) << parameter_name(i) << " " << sign;
    }
}

TEST_F(UrbanFrame, GradientMatchesFivePointStencil) {
  // Precision steps and points crossing the image border make J jump, so the
  // comparison keeps interior points and counts every sample as matched.
  const Vector6 theta =
      scene_->truth.to_vector() + (Vector6() << 0.02, -0.015, 0.02, 0.1, -0.08, 0.1).finished();
  const ExtrinsicParams at = ExtrinsicParams::from_vector(theta);
  FrameFeatures interior = *features_;
  std::vector<EdgePoint> keep;
  const CameraIntrinsics& k = interior.camera;
  for (const EdgePoint& p : interior.edge_points.points) {
    const ImageProjection pr = project_to_image(k, transform_point(at, p.position));
    if (pr.in_front && pr.pixel.x() > 60 && pr.pixel.y() > 60 && pr.pixel.x() < k.width - 60 &&
        pr.pixel.y() < k.height - 60)
      keep.push_back(p);
  }
  ASSERT_GT(keep.size(), 1000u);
  interior.edge_points.points = keep;

  const Vector6 h = config_->ascent_options().delta_h;
  for (const EdgeMap* map : {&interior.coarse_edges[0], &interior.coarse_edges[1]}) {
    const CostFunction cost = make_cost_function(interior, *map, 0.0);
    const Vector6 g = numeric_gradient(cost, theta, h);
    for (int i = 0; i < 6; ++i) {
      Vector6 e = Vector6::Zero();
      e[i] = h[i];
      const double ref =
          (-cost(theta + 2 * e) + 8 * cost(theta + e) - 8 * cost(theta - e) + cost(theta - 2 * e)) / (12.0 * h[i]);
      EXPECT_NEAR(g[i], ref, 0.05 * std::abs(ref)) << parameter_name(i);
    }
  }
}

TEST_F(UrbanFrame, SweepNormalizationKeepsArgmax) {
  const CostFunction cost = make_cost_function(*features_, config_->match_threshold);
  for (int p = 0; p < 6; ++p) {
    SweepSpec raw{p, 0.3, 61, false};
    SweepSpec norm{p, 0.3, 61, true};
    const SweepTable a = sweep(cost, scene_->truth.to_vector(), raw);
    const SweepTable b = sweep(cost, scene_->truth.to_vector(), norm);
    ASSERT_EQ(a.values.size(), 61u);
    EXPECT_EQ(std::max_element(a.values.begin(), a.values.end()) - a.values.begin(),
              std::max_element(b.values.begin(), b.values.end()) - b.values.begin());
    EXPECT_EQ(*std::min_element(b.values.begin(), b.values.end()), 0.0);
    EXPECT_EQ(*std::max_element(b.values.begin(), b.values.end()), 1.0);
    EXPECT_DOUBLE_EQ(a.offsets.front(), -0.3);
    EXPECT_DOUBLE_EQ(a.offsets[30], 0.0);
    EXPECT_DOUBLE_EQ(a.offsets.back(), 0.3);
  }
}

TEST_F(UrbanFrame, EmptyCloudAndSizeMismatchRejected) {
  FramePair empty{{}, frame_->image, "e", std::nullopt};
  EXPECT_THROW(extract_features(empty, scene_->camera, scene_->truth, *config_), InvalidArgument);
  FramePair wrong{frame_->cloud, GrayImage(10, 10, 0.0), "w", std::nullopt};
  EXPECT_THROW(extract_features(wrong, scene_->camera, scene_->truth, *config_), InvalidArgument);
}

TEST_F(UrbanFrame, CloudOutsideWindowHasNoEdges) {
  // Keep only points behind the camera: the panorama window stays empty.
  const Eigen::Vector3d axis = scene_->truth.rotation().row(2).transpose();
  FramePair behind{{}, frame_->image, "behind", std::nullopt};
  for (const Point3& p : frame_->cloud)
    if (p.position().head<2>().dot(axis.head<2>()) < -5.0) behind.cloud.push_back(p);
  ASSERT_GT(behind.cloud.size(), 1000u);
  EXPECT_THROW(calibrate(behind, scene_->camera, scene_->truth, *config_), NoEdgesError);
}

TEST_F(UrbanFrame, StartAtTruthStaysNearTruth) {
  const CalibrationResult r = calibrate(*frame_, scene_->camera, scene_->truth, *config_);
  const Vector6 e = r.theta.to_vector() - scene_->truth.to_vector();
  EXPECT_LT(e.head<3>().cwiseAbs().maxCoeff(), 0.01);
  EXPECT_LT(e.tail<3>().cwiseAbs().maxCoeff(), 0.05);
  EXPECT_EQ(r.theta.to_vector(), r.trace.entries.back().theta);
}

TEST_F(UrbanFrame, RecoversOneRotatedAngle) {
  for (const auto& [index, offset] : {std::pair{2, 0.05}, std::pair{1, -0.05}}) {
    Vector6 start = scene_->truth.to_vector();
    start[index] += offset;
    const CalibrationResult r = calibrate(*frame_, scene_->camera, ExtrinsicParams::from_vector(start), *config_);
    const Vector6 e = r.theta.to_vector() - scene_->truth.to_vector();
    EXPECT_LT(e.head<3>().cwiseAbs().maxCoeff(), 0.01) << parameter_name(index) << " " << offset;
  }
}

// ------------------------------------------------------------ sweeps

TEST(Sweep, ThreeSamples) {
  const SweepTable t = sweep([](const Vector6& v) { return -v[2] * v[2]; }, Vector6::Zero(), {2, 0.3, 3, true});
  ASSERT_EQ(t.values.size(), 3u);
  EXPECT_EQ(t.values, (std::vector<double>{0.0, 1.0, 0.0}));
  const std::string text = sweep_to_text(t);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_EQ(text.rfind("#", 0), 0u);
}

TEST(Sweep, ConcaveSliceMaximumAtCenter) {
  const Vector6 center = (Vector6() << 1, 2, 3, 4, 5, 6).finished();
  for (int p = 0; p < 6; ++p) {
    const SweepTable t =
        sweep([&](const Vector6& v) { return -(v - center).squaredNorm(); }, center, {p, 0.3, 61, false});
    const auto best = std::max_element(t.values.begin(), t.values.end()) - t.values.begin();
    EXPECT_EQ(t.offsets[static_cast<std::size_t>(best)], 0.0);
  }
}

TEST(Sweep, NormalizeSlice) {
  EXPECT_EQ(normalize_slice({2.0, 2.0, 2.0}), (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(normalize_slice({1.0, 3.0, 2.0}), (std::vector<double>{0.0, 1.0, 0.5}));
}

TEST(Sweep, SpecValidation) {
  EXPECT_THROW((SweepSpec{0, 0.3, 2, true}).validate(), InvalidArgument);
  EXPECT_THROW((SweepSpec{6, 0.3, 61, true}).validate(), InvalidArgument);
  EXPECT_THROW((SweepSpec{0, 0.0, 61, true}).validate(), InvalidArgument);
  EXPECT_NO_THROW((SweepSpec{5, 0.3, 3, true}).validate());
}

TEST(Sweep, ParameterNames) {
  const char* names[] = {"rx", "ry", "rz", "tx", "ty", "tz"};
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(parameter_name(i), names[i]);
    EXPECT_EQ(parameter_index(names[i]), i);
    EXPECT_EQ(parameter_index(std::to_string(i)), i);
  }
  EXPECT_THROW(parameter_index("yaw"), InvalidArgument);
  EXPECT_THROW(parameter_index("6"), InvalidArgument);
}

// ------------------------------------------------------------ multi-frame summary

TEST(Summary, SignedMeanVersusMae) {
  const ExtrinsicParams truth{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  Vector6 plus = truth.to_vector(), minus = truth.to_vector();
  plus[4] += 0.25;
  minus[4] -= 0.25;
  const MultiFrameReport r =
      summarize_frames({"a", "b"}, {plus, minus}, {Termination::kConverged, Termination::kMaxIter}, truth);
  EXPECT_NEAR(r.signed_mean_error[4], 0.0, 1e-15);
  EXPECT_NEAR(r.mae[4], 0.25, 1e-15);
  EXPECT_NEAR(r.mean[4], truth.ty, 1e-15);
  EXPECT_EQ(r.mae[0], 0.0);
}

TEST(Summary, IdenticalFramesAtTruth) {
  const ExtrinsicParams truth{1.598, -0.262, -0.021, 0.02, -0.08, -0.27};
  const std::vector<Vector6> est(5, truth.to_vector());
  const MultiFrameReport r = summarize_frames({"1", "2", "3", "4", "5"}, est,
                                              std::vector<Termination>(5, Termination::kConverged), truth);
  EXPECT_EQ(r.mae, Vector6::Zero());
}

TEST(Summary, MeanIsArithmeticAndAnglesWrap) {
  const ExtrinsicParams truth{3.1, 0, 0, 0, 0, 0};
  Vector6 a = truth.to_vector(), b = truth.to_vector();
  a[0] = -3.1;  // 2*pi - 6.2 away, across the seam
  b[3] = 1.0;
  const MultiFrameReport r = summarize_frames({"a", "b"}, {a, b}, {Termination::kConverged, Termination::kConverged}, truth);
  EXPECT_NEAR(r.residuals[0][0], 2 * M_PI - 6.2, 1e-12);
  EXPECT_NEAR(r.mean[3], 0.5, 1e-15);
  EXPECT_NEAR(r.mean[0], 0.0, 1e-15);
}

TEST(Summary, Quartiles) {
  EXPECT_EQ(quantile({3, 1, 2, 4}, 0.5), 2.5);
  EXPECT_EQ(quantile({3, 1, 2, 4, 5}, 0.25), 2.0);
  EXPECT_EQ(quantile({7}, 0.75), 7.0);
  EXPECT_THROW(quantile({}, 0.5), InvalidArgument);
  const ExtrinsicParams truth{};
  std::vector<Vector6> est;
  for (int i = 0; i < 5; ++i) est.push_back(Vector6::Constant(0.01 * i));
  const MultiFrameReport r = summarize_frames({"a", "b", "c", "d", "e"}, est,
                                              std::vector<Termination>(5, Termination::kConverged), truth);
  EXPECT_NEAR(r.residual_quartiles.median[5], 0.02, 1e-15);
  EXPECT_NEAR(r.residual_quartiles.q1[5], 0.01, 1e-15);
  EXPECT_NEAR(r.residual_quartiles.max[5], 0.04, 1e-15);
}

// ------------------------------------------------------------ initial guess

TEST(InitialGuess, Sources) {
  PipelineConfig c;
  c.perturb_rotation = 0.05;
  c.perturb_translation = 0.1;
  const ExtrinsicParams record{1.598, -0.262, -0.021, 0.02, -0.08, -0.27};
  const ExtrinsicParams explicit_guess{1.5, -0.2, 0.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(initial_guess(explicit_guess, record, c, 3), explicit_guess);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ExtrinsicParams g = initial_guess(std::nullopt, record, c, seed);
    EXPECT_EQ(g, initial_guess(std::nullopt, record, c, seed));
    const Vector6 d = g.to_vector() - record.to_vector();
    for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(d[i]), 0.05 + 1e-15);
    for (int i = 3; i < 6; ++i) EXPECT_LE(std::abs(d[i]), 0.1 + 1e-15);
  }
  EXPECT_THROW(initial_guess(std::nullopt, std::nullopt, c, 0), InvalidArgument);
  c.perturb_rotation = c.perturb_translation = 0.0;
  EXPECT_EQ(initial_guess(std::nullopt, record, c, 9), record);
}

}  // namespace
}  // namespace edgecal
