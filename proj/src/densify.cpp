#include "edgecal/densify.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "edgecal/errors.hpp"

namespace edgecal {

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::kDepth:
      return "depth";
    case Feature::kReflectivity:
      return "reflectivity";
    case Feature::kObject:
      return "object";
  }
  return "unknown";
}

std::size_t SparsePanorama::observed() const {
  std::size_t n = 0;
  for (auto m : mask.values()) n += m != 0;
  return n;
}

SparsePanorama build_sparse_panorama(const LabeledCloud& cloud, Feature feature,
                                     const PanoramaGeometry& geom) {
  SparsePanorama out{Grid<double>(geom.height(), geom.width(), 0.0),
                     BinaryMap(geom.height(), geom.width(), 0), feature};
  Grid<double> best_range(geom.height(), geom.width(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud.cell[i]) continue;
    const auto [col, row] = *cloud.cell[i];
    const Point3& p = cloud.points[i];
    const double range = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    if (!(range < best_range(row, col))) continue;
    best_range(row, col) = range;
    double value = 0.0;
    switch (feature) {
      case Feature::kDepth:
        value = range;
        break;
      case Feature::kReflectivity:
        value = p.reflectivity;
        break;
      case Feature::kObject:
        value = static_cast<double>(cloud.flag[i]);
        break;
    }
    out.values(row, col) = value;
    out.mask(row, col) = 1;
  }
  return out;
}

namespace {

// Forward differences with the last difference along each axis fixed at 0.
struct DualField {
  std::vector<double> px;  // along columns
  std::vector<double> py;  // along rows
};

class TvOperator {
 public:
  TvOperator(int rows, int cols) : rows_(rows), cols_(cols) {}

  std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }

  void forward(const std::vector<double>& x, DualField& d) const {
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) {
        const std::size_t i = at(r, c);
        d.px[i] = c + 1 < cols_ ? x[i + 1] - x[i] : 0.0;
        d.py[i] = r + 1 < rows_ ? x[i + cols_] - x[i] : 0.0;
      }
  }

  // out = D^T p.
  void adjoint(const DualField& p, std::vector<double>& out) const {
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) {
        const std::size_t i = at(r, c);
        const double along_cols = (c > 0 ? p.px[i - 1] : 0.0) - (c + 1 < cols_ ? p.px[i] : 0.0);
        const double along_rows =
            (r > 0 ? p.py[i - cols_] : 0.0) - (r + 1 < rows_ ? p.py[i] : 0.0);
        out[i] = along_cols + along_rows;
      }
  }

 private:
  std::size_t at(int r, int c) const { return static_cast<std::size_t>(r) * cols_ + c; }
  int rows_, cols_;
};

// argmin_x 0.5 ||x - z||^2 + mu * ||D x||_1 via fast projected gradient on
// the box-constrained dual; `p` carries the dual between calls.
void tv_prox(const TvOperator& op, const std::vector<double>& z, double mu, int iterations,
             DualField& p, std::vector<double>& x) {
  const std::size_t n = op.size();
  DualField r = p, grad{std::vector<double>(n), std::vector<double>(n)};
  DualField p_prev = p;
  std::vector<double> dtp(n);
  double t = 1.0;
  const double step = 1.0 / (8.0 * mu);
  for (int k = 0; k < iterations; ++k) {
    op.adjoint(r, dtp);
    for (std::size_t i = 0; i < n; ++i) x[i] = z[i] - mu * dtp[i];
    op.forward(x, grad);
    p_prev = p;
    for (std::size_t i = 0; i < n; ++i) {
      p.px[i] = std::clamp(r.px[i] + step * grad.px[i], -1.0, 1.0);
      p.py[i] = std::clamp(r.py[i] + step * grad.py[i], -1.0, 1.0);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double w = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i) {
      r.px[i] = p.px[i] + w * (p.px[i] - p_prev.px[i]);
      r.py[i] = p.py[i] + w * (p.py[i] - p_prev.py[i]);
    }
    t = t_next;
  }
  op.adjoint(p, dtp);
  for (std::size_t i = 0; i < n; ++i) x[i] = z[i] - mu * dtp[i];
}

double objective_of(const std::vector<double>& x, const std::vector<double>& u,
                    const std::vector<std::uint8_t>& mask, int rows, int cols, double lambda) {
  double fidelity = 0.0, tv = 0.0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      if (mask[i]) fidelity += (x[i] - u[i]) * (x[i] - u[i]);
      if (c + 1 < cols) tv += std::abs(x[i + 1] - x[i]);
      if (r + 1 < rows) tv += std::abs(x[i + cols] - x[i]);
    }
  return fidelity + lambda * tv;
}

}  // namespace

double total_variation(const Grid<double>& phi) {
  double tv = 0.0;
  for (int r = 0; r < phi.rows(); ++r)
    for (int c = 0; c < phi.cols(); ++c) {
      if (c + 1 < phi.cols()) tv += std::abs(phi(r, c + 1) - phi(r, c));
      if (r + 1 < phi.rows()) tv += std::abs(phi(r + 1, c) - phi(r, c));
    }
  return tv;
}

double tv_objective(const SparsePanorama& sparse, const Grid<double>& phi, double lambda) {
  if (!sparse.values.same_shape(phi)) throw InvalidArgument("tv_objective: shape mismatch");
  double fidelity = 0.0;
  for (int r = 0; r < phi.rows(); ++r)
    for (int c = 0; c < phi.cols(); ++c)
      if (sparse.mask(r, c)) {
        const double d = phi(r, c) - sparse.values(r, c);
        fidelity += d * d;
      }
  return fidelity + lambda * total_variation(phi);
}

DensePanorama tv_inpaint(const SparsePanorama& sparse, const TvOptions& options) {
  if (!(options.lambda > 0.0)) throw InvalidArgument("tv_inpaint: lambda must be positive");
  if (options.max_iter < 1 || options.prox_iter < 1)
    throw InvalidArgument("tv_inpaint: iteration counts must be >= 1");
  if (!sparse.values.same_shape(sparse.mask)) throw InvalidArgument("tv_inpaint: shape mismatch");
  const int rows = sparse.values.rows(), cols = sparse.values.cols();
  const std::size_t n = sparse.values.size();

  std::vector<double> u(sparse.values.values().begin(), sparse.values.values().end());
  std::vector<std::uint8_t> mask(sparse.mask.values().begin(), sparse.mask.values().end());
  double sum = 0.0;
  std::size_t observed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (!std::isfinite(u[i])) throw InvalidArgument("tv_inpaint: non-finite observation");
    sum += u[i];
    ++observed;
  }
  if (observed == 0) throw InvalidArgument("tv_inpaint: mask has no observed cell");

  // Start from whichever of mean-fill and zero-fill has the lower objective.
  const double mean = sum / static_cast<double>(observed);
  std::vector<double> x(n), zero_fill(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = mask[i] ? u[i] : mean;
    zero_fill[i] = mask[i] ? u[i] : 0.0;
  }
  double fx = objective_of(x, u, mask, rows, cols, options.lambda);
  const double f_zero = objective_of(zero_fill, u, mask, rows, cols, options.lambda);
  if (f_zero < fx) {
    x = zero_fill;
    fx = f_zero;
  }

  const TvOperator op(rows, cols);
  // Gradient of the fidelity is 2 * mask .* (x - u): Lipschitz constant 2.
  constexpr double kLipschitz = 2.0;
  const double mu = options.lambda / kLipschitz;
  DualField dual{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  std::vector<double> y = x, x_prev = x, z(n), grad_step(n);
  double t = 1.0;
  double f_prev_z = fx;
  int quiet = 0;
  int it = 0;
  while (it < options.max_iter) {
    ++it;
    for (std::size_t i = 0; i < n; ++i)
      grad_step[i] = mask[i] ? y[i] - (2.0 / kLipschitz) * (y[i] - u[i]) : y[i];
    tv_prox(op, grad_step, mu, options.prox_iter, dual, z);
    const double fz = objective_of(z, u, mask, rows, cols, options.lambda);

    x_prev = x;
    if (fz <= fx) {
      x = z;
      fx = fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i)
      y[i] = x[i] + (t / t_next) * (z[i] - x[i]) + ((t - 1.0) / t_next) * (x[i] - x_prev[i]);
    t = t_next;

    const double denom = std::max(std::abs(f_prev_z), std::numeric_limits<double>::min());
    const double change = std::abs(fz - f_prev_z);
    quiet = (change == 0.0 || change / denom < options.tol) ? quiet + 1 : 0;
    f_prev_z = fz;
    if (quiet >= 5) break;
  }

  DensePanorama out{Grid<double>(rows, cols), sparse.feature, it, fx};
  std::copy(x.begin(), x.end(), out.values.values().begin());
  return out;
}

}  // namespace edgecal
