#include "mipt/theory.hpp"

#include <array>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "mipt/errors.hpp"

namespace mipt::theory {

namespace {

constexpr double kPi = std::numbers::pi;

using FlowState = std::array<double, 1>;
using Stepper = boost::numeric::odeint::runge_kutta4<FlowState>;

}  // namespace

void NLSMParams::validate() const {
  if (!(d > 0.0)) throw InvalidInput("theory: d must be > 0");
  if (!(hopping > 0.0)) throw InvalidInput("theory: J must be > 0");
  if (!(gamma > 0.0)) throw InvalidInput("theory: gamma must be > 0");
  if (!(filling >= 0.0 && filling <= 1.0)) throw InvalidInput("theory: filling in [0, 1]");
  if (!(replicas > 0.0)) throw InvalidInput("theory: R must be > 0");
}

double NLSMParams::v() const { return std::sqrt(2.0 * d) * hopping; }
double NLSMParams::v0() const { return std::numbers::sqrt2 * hopping; }
double NLSMParams::g0() const { return filling * (1.0 - filling) * v0() / gamma; }
double NLSMParams::l0() const { return std::sqrt(d / 2.0) * hopping / gamma; }
double NLSMParams::G0() const { return g0() * std::pow(l0(), epsilon()); }

double bare_coupling(const NLSMParams& p) {
  p.validate();
  return p.g0();
}

double sphere_area(double n) {
  return 2.0 * std::pow(kPi, (n + 1.0) / 2.0) / std::tgamma((n + 1.0) / 2.0);
}

double gaussian_correlator_q(const NLSMParams& p, double q) { return p.g0() * std::abs(q); }

double gaussian_correlator_x(const NLSMParams& p, double x) {
  return -2.0 * p.g0() / (sphere_area(p.d) * std::pow(std::abs(x), p.d + 1.0));
}

double gaussian_cumulant_area(const NLSMParams& p, double area, double ell) {
  p.validate();
  if (!(ell >= p.l0())) throw InvalidInput("gaussian_cumulant: needs l >= l0");
  return p.g0() / kPi * area * std::log(ell / p.l0());
}

double gaussian_cumulant(const NLSMParams& p, double ell) {
  return gaussian_cumulant_area(p, sphere_area(p.d - 1.0) * std::pow(ell, p.d - 1.0), ell);
}

double beta(double G, double epsilon, double replicas) {
  return epsilon * G - replicas / (4.0 * kPi);
}

double rg_closed_form(double G0, double epsilon, double replicas, double t) {
  if (epsilon == 0.0) return G0 - replicas / (4.0 * kPi) * t;
  const double gc = replicas / (4.0 * kPi * epsilon);
  return gc + (G0 - gc) * std::exp(epsilon * t);
}

RGFlow rg_flow(double G0, double epsilon, double replicas, double l0, double ell_max,
               int samples, double step) {
  if (!(G0 > 0.0)) throw InvalidInput("rg_flow: G0 must be > 0");
  if (!(l0 > 0.0) || !(ell_max >= l0)) throw InvalidInput("rg_flow: needs 0 < l0 <= ell_max");
  if (samples < 2 || !(step > 0.0)) throw InvalidInput("rg_flow: bad sampling");

  const auto rhs = [&](const FlowState& g, FlowState& dg, double) {
    dg[0] = beta(g[0], epsilon, replicas);
  };
  Stepper stepper;
  RGFlow flow;
  auto record = [&](double t, double G) {
    flow.states.push_back(
        {l0 * std::exp(t), G, rg_closed_form(G0, epsilon, replicas, t), 1.0});
  };

  const double t_max = std::log(ell_max / l0);
  const double segment = t_max / (samples - 1);
  FlowState g{G0};
  double t = 0.0;
  record(t, G0);
  for (int k = 1; k < samples && segment > 0.0; ++k) {
    const double t_end = k == samples - 1 ? t_max : k * segment;
    const int n = std::max(1, static_cast<int>(std::ceil((t_end - t) / step)));
    const double h = (t_end - t) / n;
    for (int i = 0; i < n; ++i) {
      FlowState next = g;
      stepper.do_step(rhs, next, t, h);
      if (next[0] <= 0.0) {
        // Bisect the step length for the crossing of G = 0.
        double lo = 0.0;
        double hi = h;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
          const double mid = 0.5 * (lo + hi);
          FlowState probe = g;
          stepper.do_step(rhs, probe, t, mid);
          (probe[0] > 0.0 ? lo : hi) = mid;
        }
        flow.localized = true;
        flow.ell_localized = l0 * std::exp(t + hi);
        flow.states.push_back({flow.ell_localized, 0.0,
                               rg_closed_form(G0, epsilon, replicas, t + hi), 1.0});
        return flow;
      }
      g = next;
      t = i == n - 1 ? t_end : t + h;
    }
    record(t, g[0]);
  }
  return flow;
}

RGFlow rg_flow(const NLSMParams& p, double ell_max, int samples) {
  p.validate();
  return rg_flow(p.G0(), p.epsilon(), p.replicas, p.l0(), ell_max, samples);
}

CriticalQuantities critical_quantities(double epsilon, double replicas, double G0, double l0) {
  if (!(epsilon > 0.0)) {
    throw NoTransition("no critical point for epsilon <= 0: every coupling flows to the "
                       "localized fixed point");
  }
  CriticalQuantities c;
  c.G_c = replicas / (4.0 * kPi * epsilon);
  c.nu = 1.0 / epsilon;
  c.zeta = 0.0;
  const double ratio = std::abs(G0 - c.G_c) / c.G_c;
  c.l_corr = ratio == 0.0 ? std::numeric_limits<double>::infinity()
                          : l0 * std::pow(ratio, -c.nu);
  return c;
}

CriticalQuantities critical_quantities(const NLSMParams& p) {
  p.validate();
  return critical_quantities(p.epsilon(), p.replicas, p.G0(), p.l0());
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::metallic: return "metallic";
    case Phase::critical: return "critical";
    case Phase::localized: return "localized";
  }
  return "critical";
}

ScalingValue scaling_function(Phase phase, double x, double nu, double d) {
  if (!(x >= 0.0)) throw InvalidInput("scaling_function: x must be >= 0");
  if (phase == Phase::critical) return {1.0, "critical"};
  const bool metallic = phase == Phase::metallic;
  if (x < 1.0) {
    const double s = std::pow(x, 1.0 / nu);
    return {metallic ? 1.0 + s : 1.0 - s, "small-x " + to_string(phase)};
  }
  return {metallic ? std::pow(x, d - 1.0) : std::exp(-x), "large-x " + to_string(phase)};
}

ScalingValue covariance_scaling(Phase phase, double x, double d, double G_c, double c1,
                                double c2, double c3) {
  if (!(x >= 0.0)) throw InvalidInput("covariance_scaling: x must be >= 0");
  switch (phase) {
    case Phase::metallic: return {c1 * std::pow(x, d - 1.0), "metallic"};
    case Phase::critical: return {c2 * G_c, "critical"};
    case Phase::localized: return {std::exp(-c3 * x), "localized"};
  }
  return {c2 * G_c, "critical"};
}

}  // namespace mipt::theory
