#pragma once

// Finite-size-scaling analysis of the covariance G_AB(L, gamma): master-curve
// collapse quality, Nelder-Mead fit of (gamma_c, nu[, zeta]) with Hessian
// error bars, crossing of curves for consecutive sizes, and the weighted
// cubic extrapolation of C(q)/q to q = 0.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mipt::collapse {

struct DataPoint {
  double L;
  double gamma;
  double value;
  double std_err;
};

/// Needs >= 3 distinct sizes and std_err > 0 everywhere (InvalidInput
/// otherwise).
struct ScalingDataset {
  std::vector<DataPoint> points;

  void validate() const;
  std::vector<double> sizes() const;
  /// Points with lo <= gamma <= hi.
  ScalingDataset window(double lo, double hi) const;
};

struct MasterPoint {
  double x;         ///< L^{1/nu} (gamma - gamma_c)
  double y;         ///< value / L^zeta
  double dy;
  double Y = 0.0;   ///< master-curve estimate at x
  double dY = 0.0;
  bool included = false;
};

struct MasterCurve {
  std::vector<MasterPoint> points;  ///< in dataset order
  std::size_t excluded = 0;
};

/// Each point is compared with a local weighted linear fit through the two
/// points nearest in x from every other size whose x range covers it.
/// Points with fewer than two such neighbours (or only one distinct x) are
/// excluded and counted.
MasterCurve master_curve(const ScalingDataset& data, double nu, double gamma_c,
                         double zeta = 0.0);

/// (1/N) sum (y - Y)^2 / (dy^2 + dY^2) over the included points; +inf if
/// none is included.
double quality(const ScalingDataset& data, double nu, double gamma_c, double zeta = 0.0);

struct FitOptions {
  bool fit_zeta = false;
  double zeta_init = 0.0;
  /// Gamma window applied before fitting; nullopt uses all points.
  std::optional<std::pair<double, double>> window = std::pair{2.4, 3.4};
  double simplex_step = 0.1;
  double x_tolerance = 1e-4;
  double f_tolerance = 1e-6;
  int max_iterations = 2000;
  double hessian_step = 1e-3;  ///< relative
};

struct CollapseResult {
  double gamma_c = 0.0;
  double nu = 0.0;
  std::optional<double> zeta;
  double chi2 = 0.0;
  /// Parameters ordered (gamma_c, nu[, zeta]); covariance = 2 H^{-1}.
  Eigen::MatrixXd covariance;
  double gamma_c_err = 0.0;
  double nu_err = 0.0;
  std::optional<double> zeta_err;
  bool converged = false;
  int iterations = 0;
  /// False if the Hessian is singular or not positive definite.
  bool errors_reliable = true;
  std::size_t n_points = 0;
  std::size_t excluded_points = 0;
  std::optional<std::pair<double, double>> window;
};

/// Minimizes quality over (gamma_c, nu[, zeta]) starting from the given
/// point, which must lie inside the (windowed) gamma range.
CollapseResult fit_collapse(const ScalingDataset& data, double gamma_c_init, double nu_init,
                            const FitOptions& options = {});

/// Nelder-Mead minimizer used by fit_collapse. `step` sets the initial
/// simplex edge along each axis.
struct SimplexResult {
  Eigen::VectorXd x;
  double f;
  int iterations;
  bool converged;
};
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                          double x_tolerance, double f_tolerance, int max_iterations);

/// Central-difference Hessian, step h_i = rel_step * max(|x_i|, 1), made
/// symmetric.
Eigen::MatrixXd hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                        const Eigen::VectorXd& x, double rel_step);

struct Intercept {
  double value;
  double std_err;
};

/// Weighted least-squares cubic through exactly five (q, y, dy) points,
/// evaluated at q = 0. InvalidInput for fewer than four distinct q or
/// non-positive errors.
Intercept extrapolate_q0(std::span<const double> q, std::span<const double> y,
                         std::span<const double> dy);

struct Curve {
  double L;
  std::vector<double> gamma;
  std::vector<double> value;
};

struct CrossingEstimate {
  bool found = false;
  double median = 0.0;
  double spread = 0.0;  ///< max - min of the pairwise crossings
  /// (L1, L2, gamma) for every sign change between consecutive sizes.
  std::vector<std::array<double, 3>> crossings;
};

/// Crossings of consecutive-size curves on their common gamma grid,
/// located by linear interpolation of the difference.
CrossingEstimate crossing_locator(std::vector<Curve> curves);

/// Groups (L, gamma, value) rows into one curve per size, sorted by gamma.
std::vector<Curve> curves_from(const ScalingDataset& data);

/// value = f(L^{1/nu}(gamma - gamma_c)) (1 + noise * xi), std_err =
/// noise * |f|, xi standard normal from the seeded generator.
ScalingDataset synthetic_dataset(double gamma_c, double nu, std::span<const double> sizes,
                                 std::span<const double> gammas, double noise,
                                 std::uint64_t seed,
                                 const std::function<double(double)>& shape = {});

/// Default synthetic shape: 1 / (1 + e^x), decreasing through the crossing.
double logistic_shape(double x);

}  // namespace mipt::collapse
