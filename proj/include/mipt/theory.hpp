#pragma once

// Analytic predictions of the replica sigma-model description of monitored
// free fermions: bare coupling, Gaussian-level correlators, one-loop flow of
// the dimensionless conductance G(l), critical quantities and the asymptotic
// branches of the scaling functions. The O(1/G) corrections to the flow are
// dropped.

#include <string>
#include <vector>

namespace mipt::theory {

/// Model parameters. The dimension d may be non-integer (epsilon = d - 1).
struct NLSMParams {
  double d = 2.0;
  double hopping = 1.0;  ///< J
  double gamma = 1.0;    ///< measurement rate per site
  double filling = 0.5;  ///< rho
  double replicas = 1.0; ///< R

  void validate() const;
  double epsilon() const { return d - 1.0; }
  double v() const;   ///< sqrt(2d) J
  double v0() const;  ///< sqrt(2) J
  double g0() const;  ///< rho (1 - rho) v0 / gamma
  double l0() const;  ///< sqrt(d / 2) J / gamma
  /// Bare dimensionless conductance at the cutoff scale, G0 = g0 l0^epsilon.
  double G0() const;
};

/// g0 = rho (1 - rho) v0 / gamma.
double bare_coupling(const NLSMParams& p);

/// 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double sphere_area(double n);

/// C(q) = g0 |q|.
double gaussian_correlator_q(const NLSMParams& p, double q);
/// C(x) = -2 g0 / (sigma_d |x|^{d+1}); meaningful for |x| > l0.
double gaussian_correlator_x(const NLSMParams& p, double x);

/// C^(2)_l = (g0 / pi) sigma_{d-1} l^{d-1} ln(l / l0). InvalidInput for
/// l < l0 (l = l0 gives 0).
double gaussian_cumulant(const NLSMParams& p, double ell);
/// Same with sigma_{d-1} l^{d-1} replaced by the boundary area of a
/// general region.
double gaussian_cumulant_area(const NLSMParams& p, double area, double ell);

/// beta(G) = epsilon G - R / (4 pi).
double beta(double G, double epsilon, double replicas = 1.0);

/// Closed-form one-loop solution, with t = ln(l / l0):
///   G_c + (G0 - G_c) e^{epsilon t}   (epsilon != 0)
///   G0 - (R / 4 pi) t                (epsilon = 0)
double rg_closed_form(double G0, double epsilon, double replicas, double t);

struct RGState {
  double ell;  ///< length scale
  double G;    ///< running conductance, numerically integrated
  double G_exact;  ///< closed form at the same scale
  double Z;    ///< source renormalization (1 at one loop)
};

struct RGFlow {
  std::vector<RGState> states;
  /// Set when G reached 0 before ell_max; the flow stops there.
  bool localized = false;
  double ell_localized = 0.0;
};

/// Integrates dG/d ln l = beta(G) from G(l0) = G0 up to ell_max with a
/// classical 4th-order Runge-Kutta scheme on a uniform grid in ln l, and
/// records `samples` log-spaced points (plus the stopping point). Stops at
/// G = 0+, located by bisection on the last step.
RGFlow rg_flow(double G0, double epsilon, double replicas, double l0, double ell_max,
               int samples = 101, double step = 1e-3);
RGFlow rg_flow(const NLSMParams& p, double ell_max, int samples = 101);

struct CriticalQuantities {
  double G_c;     ///< R / (4 pi epsilon)
  double nu;      ///< 1 / epsilon
  double zeta;    ///< 0
  double l_corr;  ///< l0 (|G0 - G_c| / G_c)^{-nu}; infinite at G0 = G_c
};

/// Throws NoTransition for epsilon <= 0.
CriticalQuantities critical_quantities(double epsilon, double replicas, double G0, double l0);
CriticalQuantities critical_quantities(const NLSMParams& p);

enum class Phase { metallic, critical, localized };
std::string to_string(Phase p);

struct ScalingValue {
  double value;
  std::string regime;  ///< "small-x metallic", "large-x localized", ...
};

/// Asymptotic branches of f in C(r) = -(G_c / r^{2d}) f(r / l_corr):
///   x < 1:  1 + x^{1/nu} (metallic) or 1 - x^{1/nu} (localized)
///   x >= 1: x^{d-1} (metallic) or e^{-x} (localized)
/// Phase::critical gives f = 1. No interpolation between the branches.
ScalingValue scaling_function(Phase phase, double x, double nu, double d);

/// Covariance regimes: c1 x^{d-1} (metallic), c2 G_c (critical),
/// exp(-c3 x) (localized), with x = l / l_corr.
ScalingValue covariance_scaling(Phase phase, double x, double d, double G_c, double c1 = 1.0,
                                double c2 = 1.0, double c3 = 1.0);

}  // namespace mipt::theory
