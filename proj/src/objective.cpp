#include "edgecal/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "edgecal/errors.hpp"
#include "edgecal/image.hpp"

namespace edgecal {

CostBreakdown evaluate_cost(const ExtrinsicParams& theta, const EdgePointSet& edges,
                            const EdgeMap& camera_edges, const CameraIntrinsics& k,
                            double match_threshold) {
  if (edges.empty()) throw NoEdgesError("evaluate_cost: no edge points");
  const Eigen::Matrix3d rot = theta.rotation();
  const Eigen::Vector3d trans = theta.translation();

  // Terms are rounded to a 2^-40 grid and summed as integers, which makes the
  // total independent of point order. E_C and P are both in [0, 1].
  constexpr double kScale = 1099511627776.0;  // 2^40
  std::int64_t fixed_sum = 0;
  CostBreakdown out;
  out.edge_count = edges.size();
  for (const EdgePoint& e : edges.points) {
    const ImageProjection proj = project_to_image(k, rot * e.position + trans);
    if (!proj.in_image) continue;
    // In-image reaches to N and M, the sampling grid only to N-1 and M-1.
    const Eigen::Vector2d pixel(std::min(proj.pixel.x(), camera_edges.cols() - 1.0),
                                std::min(proj.pixel.y(), camera_edges.rows() - 1.0));
    const std::optional<double> sample = bilinear_sample(camera_edges, pixel);
    if (!sample) continue;
    fixed_sum += std::llround(*sample * e.probability * kScale);
    if (*sample >= match_threshold) ++out.matched;
  }
  out.raw_sum = static_cast<double>(fixed_sum) / kScale;
  out.precision = static_cast<double>(out.matched) / static_cast<double>(out.edge_count);
  out.value = out.precision * out.raw_sum;
  return out;
}

Vector6 numeric_gradient(const CostFunction& cost, const Vector6& theta, const Vector6& delta_h) {
  if (!(delta_h.array() > 0.0).all())
    throw InvalidArgument("numeric_gradient: every step must be positive");
  Vector6 g;
  for (int i = 0; i < 6; ++i) {
    Vector6 plus = theta, minus = theta;
    plus[i] += delta_h[i];
    minus[i] -= delta_h[i];
    g[i] = (cost(plus) - cost(minus)) / (2.0 * delta_h[i]);
  }
  return g;
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::kConverged:
      return "converged";
    case Termination::kMaxIter:
      return "max_iter";
    case Termination::kDegenerateStep:
      return "degenerate_step";
  }
  return "unknown";
}

AscentResult bb_ascent(const CostFunction& cost, const Vector6& theta0,
                       const AscentOptions& options) {
  if (!(options.epsilon > 0.0)) throw InvalidArgument("bb_ascent: epsilon must be positive");
  if (options.max_iter < 1) throw InvalidArgument("bb_ascent: max_iter must be >= 1");
  if (!(options.gamma0 > 0.0) || !(options.max_step > 0.0))
    throw InvalidArgument("bb_ascent: step lengths must be positive");
  if (options.nonmonotone_window < 0 || options.max_backtracks < 0)
    throw InvalidArgument("bb_ascent: nonmonotone_window and max_backtracks must be >= 0");

  AscentResult result;
  OptimizerTrace& trace = result.trace;
  Vector6 theta = theta0;
  Vector6 grad = numeric_gradient(cost, theta, options.delta_h);
  trace.entries.push_back({theta, cost(theta), grad.norm(), 0.0});
  result.theta = theta;

  if (!grad.allFinite()) {
    trace.termination = Termination::kDegenerateStep;
    return result;
  }
  if (grad.norm() <= options.gradient_tol) {
    trace.termination = Termination::kConverged;
    return result;
  }

  Vector6 s = Vector6::Zero(), y = Vector6::Zero();
  for (int k = 0; k < options.max_iter; ++k) {
    const double gnorm = grad.norm();
    double step = options.gamma0;
    if (k > 0) {
      // Ascent form: the curvature along s is -s^T y for a concave cost.
      const double curvature = -s.dot(y);
      const double alpha = s.squaredNorm() / curvature;
      if (curvature > 0.0 && std::isfinite(alpha) && alpha > 0.0) step = alpha * gnorm;
    }
    step = std::min(step, options.max_step);

    Vector6 next = theta + step * grad / gnorm;
    double next_cost = cost(next);
    if (options.nonmonotone_window > 0) {
      const std::size_t n = trace.entries.size();
      const std::size_t from = n - std::min<std::size_t>(n, static_cast<std::size_t>(options.nonmonotone_window));
      double floor = trace.entries[from].cost;
      for (std::size_t i = from; i < n; ++i) floor = std::min(floor, trace.entries[i].cost);
      for (int b = 0; b < options.max_backtracks && !(next_cost >= floor); ++b) {
        step *= 0.5;
        next = theta + step * grad / gnorm;
        next_cost = cost(next);
      }
    }
    const Vector6 next_grad = numeric_gradient(cost, next, options.delta_h);
    s = next - theta;
    y = next_grad - grad;
    theta = next;
    grad = next_grad;
    trace.entries.push_back({theta, next_cost, grad.norm(), step});
    result.theta = theta;

    if (!grad.allFinite()) {
      trace.termination = Termination::kDegenerateStep;
      return result;
    }
    if (grad.norm() <= options.gradient_tol) {
      // theta + alpha * G with G = 0: the next iterate is theta itself.
      trace.entries.push_back({theta, trace.entries.back().cost, grad.norm(), 0.0});
      trace.termination = Termination::kConverged;
      return result;
    }
    if (s.norm() <= options.epsilon) {
      trace.termination = Termination::kConverged;
      return result;
    }
  }
  trace.termination = Termination::kMaxIter;
  return result;
}

}  // namespace edgecal
