#pragma once

#include <string_view>

#include "edgecal/geometry.hpp"
#include "edgecal/grid.hpp"
#include "edgecal/segmentation.hpp"

namespace edgecal {

enum class Feature { kDepth, kReflectivity, kObject };

std::string_view feature_name(Feature f);

// Per-cell feature values where mask == 1; value 0 elsewhere.
struct SparsePanorama {
  Grid<double> values;
  BinaryMap mask;
  Feature feature = Feature::kDepth;

  std::size_t observed() const;
};

struct DensePanorama {
  Grid<double> values;
  Feature feature = Feature::kDepth;
  int iterations = 0;
  double objective = 0.0;
};

// Scatters the cloud into its panorama cells. When several points share a
// cell the one with the smallest range wins. Depth is the Euclidean range,
// reflectivity is copied, object is the point's flag (1 or 2).
SparsePanorama build_sparse_panorama(const LabeledCloud& cloud, Feature feature,
                                     const PanoramaGeometry& geom);

struct TvOptions {
  double lambda = 0.05;
  int max_iter = 400;
  double tol = 1e-5;
  // Dual iterations of the TV proximal step per outer iteration (warm started).
  int prox_iter = 10;
};

// ||mask .* (phi - u)||^2 + lambda * sum(|dx phi| + |dy phi|), forward
// differences with a replicated border (the last difference along each axis
// is zero).
double tv_objective(const SparsePanorama& sparse, const Grid<double>& phi, double lambda);
double total_variation(const Grid<double>& phi);

// Masked anisotropic TV completion by monotone FISTA. Unobserved cells start
// at the mean of the observed values. Throws InvalidArgument for an empty
// mask, non-finite observations or lambda <= 0.
DensePanorama tv_inpaint(const SparsePanorama& sparse, const TvOptions& options);

}  // namespace edgecal
