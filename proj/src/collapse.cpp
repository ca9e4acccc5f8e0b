#include "mipt/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "mipt/errors.hpp"
#include "mipt/rng.hpp"

namespace mipt::collapse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void ScalingDataset::validate() const {
  for (const auto& p : points) {
    if (!(p.std_err > 0.0)) throw InvalidInput("scaling dataset: std_err must be > 0");
    if (!(p.L > 0.0) || !std::isfinite(p.gamma) || !std::isfinite(p.value)) {
      throw InvalidInput("scaling dataset: non-finite point");
    }
  }
  if (sizes().size() < 3) throw InvalidInput("scaling dataset: needs at least 3 system sizes");
}

std::vector<double> ScalingDataset::sizes() const {
  std::set<double> s;
  for (const auto& p : points) s.insert(p.L);
  return {s.begin(), s.end()};
}

ScalingDataset ScalingDataset::window(double lo, double hi) const {
  ScalingDataset out;
  for (const auto& p : points) {
    if (p.gamma >= lo && p.gamma <= hi) out.points.push_back(p);
  }
  return out;
}

MasterCurve master_curve(const ScalingDataset& data, double nu, double gamma_c, double zeta) {
  data.validate();
  MasterCurve mc;
  const std::size_t n = data.points.size();
  mc.points.resize(n);
  if (!(nu > 0.0)) {
    mc.excluded = n;
    return mc;
  }
  std::map<double, std::vector<std::size_t>> by_size;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = data.points[i];
    const double scale = std::pow(p.L, -zeta);
    mc.points[i] = {std::pow(p.L, 1.0 / nu) * (p.gamma - gamma_c), p.value * scale,
                    p.std_err * scale};
    by_size[p.L].push_back(i);
  }

  std::vector<std::size_t> nbrs;
  for (std::size_t i = 0; i < n; ++i) {
    auto& me = mc.points[i];
    nbrs.clear();
    for (const auto& [L, idx] : by_size) {
      if (L == data.points[i].L) continue;
      // The bracketing pair: largest x' <= x and smallest x' > x. A size
      // whose x range does not cover the point contributes nothing.
      std::size_t below = n;
      std::size_t above = n;
      for (std::size_t j : idx) {
        const double x = mc.points[j].x;
        if (x <= me.x && (below == n || x > mc.points[below].x)) below = j;
        if (x > me.x && (above == n || x < mc.points[above].x)) above = j;
      }
      if (below == n || above == n) continue;
      nbrs.push_back(below);
      nbrs.push_back(above);
    }
    if (nbrs.size() < 2) {
      ++mc.excluded;
      continue;
    }
    // Weighted linear least squares y = a + b x, evaluated at me.x.
    double K = 0.0, Kx = 0.0, Ky = 0.0, Kxx = 0.0, Kxy = 0.0;
    for (std::size_t j : nbrs) {
      const auto& q = mc.points[j];
      const double w = 1.0 / (q.dy * q.dy);
      K += w;
      Kx += w * q.x;
      Ky += w * q.y;
      Kxx += w * q.x * q.x;
      Kxy += w * q.x * q.y;
    }
    const double det = K * Kxx - Kx * Kx;
    if (!(det > 1e-12 * K * Kxx) || !std::isfinite(det)) {
      ++mc.excluded;
      continue;
    }
    me.Y = ((Kxx * Ky - Kx * Kxy) + me.x * (K * Kxy - Kx * Ky)) / det;
    me.dY = std::sqrt(std::max(0.0, (Kxx - 2.0 * me.x * Kx + me.x * me.x * K) / det));
    me.included = true;
  }
  return mc;
}

double quality(const ScalingDataset& data, double nu, double gamma_c, double zeta) {
  const MasterCurve mc = master_curve(data, nu, gamma_c, zeta);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : mc.points) {
    if (!p.included) continue;
    const double r = p.y - p.Y;
    sum += r * r / (p.dy * p.dy + p.dY * p.dY);
    ++count;
  }
  return count ? sum / static_cast<double>(count) : kInf;
}

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                          double x_tolerance, double f_tolerance, int max_iterations) {
  const Eigen::Index dim = start.size();
  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(dim + 1), start);
  std::vector<double> fv(v.size());
  for (Eigen::Index i = 0; i < dim; ++i) v[static_cast<std::size_t>(i + 1)](i) += step(i);
  for (std::size_t i = 0; i < v.size(); ++i) fv[i] = f(v[i]);

  std::vector<std::size_t> order(v.size());
  auto sort = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  };
  auto converged = [&] {
    const std::size_t best = order.front();
    double diameter = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      diameter = std::max(diameter, (v[i] - v[best]).lpNorm<Eigen::Infinity>());
    }
    return diameter < x_tolerance && fv[order.back()] - fv[best] < f_tolerance;
  };

  int it = 0;
  sort();
  while (it < max_iterations && !converged()) {
    ++it;
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += v[order[i]];
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd xr = centroid + (centroid - v[worst]);
    const double fr = f(xr);
    if (fr < fv[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                         : Eigen::VectorXd(centroid + 0.5 * (v[worst] - centroid));
      const double fc = f(xc);
      if (fc < (outside ? fr : fv[worst])) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i == best) continue;
          v[i] = v[best] + 0.5 * (v[i] - v[best]);
          fv[i] = f(v[i]);
        }
      }
    }
    sort();
  }
  return {v[order.front()], fv[order.front()], it, converged()};
}

Eigen::MatrixXd hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                        const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = rel_step * std::max(std::abs(x(i)), 1.0);
  auto at = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    Eigen::VectorXd p = x;
    p(i) += si * h(i);
    p(j) += sj * h(j);
    return f(p);
  };
  const double f0 = f(x);
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = x;
    p(i) = x(i) + h(i);
    const double fp = f(p);
    p(i) = x(i) - h(i);
    const double fm = f(p);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      H(i, j) = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) /
                (4.0 * h(i) * h(j));
      H(j, i) = H(i, j);
    }
  }
  return 0.5 * (H + H.transpose());
}

CollapseResult fit_collapse(const ScalingDataset& data, double gamma_c_init, double nu_init,
                            const FitOptions& options) {
  const ScalingDataset d =
      options.window ? data.window(options.window->first, options.window->second) : data;
  d.validate();
  double gmin = kInf;
  double gmax = -kInf;
  for (const auto& p : d.points) {
    gmin = std::min(gmin, p.gamma);
    gmax = std::max(gmax, p.gamma);
  }
  if (gamma_c_init < gmin || gamma_c_init > gmax) {
    throw InvalidInput("fit_collapse: initial gamma_c outside the data range");
  }
  if (!(nu_init > 0.0)) throw InvalidInput("fit_collapse: initial nu must be > 0");

  const Eigen::Index dim = options.fit_zeta ? 3 : 2;
  auto objective = [&](const Eigen::VectorXd& p) {
    return quality(d, p(1), p(0), options.fit_zeta ? p(2) : 0.0);
  };
  Eigen::VectorXd start(dim);
  start(0) = gamma_c_init;
  start(1) = nu_init;
  if (options.fit_zeta) start(2) = options.zeta_init;
  const Eigen::VectorXd step = Eigen::VectorXd::Constant(dim, options.simplex_step);
  const SimplexResult nm = nelder_mead(objective, start, step, options.x_tolerance,
                                       options.f_tolerance, options.max_iterations);

  CollapseResult r;
  r.gamma_c = nm.x(0);
  r.nu = nm.x(1);
  if (options.fit_zeta) r.zeta = nm.x(2);
  r.chi2 = nm.f;
  r.converged = nm.converged;
  r.iterations = nm.iterations;
  r.window = options.window;
  const MasterCurve mc = master_curve(d, r.nu, r.gamma_c, r.zeta.value_or(0.0));
  r.excluded_points = mc.excluded;
  r.n_points = d.points.size() - mc.excluded;

  const Eigen::MatrixXd H = hessian(objective, nm.x, options.hessian_step);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!H.allFinite() || !(es.eigenvalues().minCoeff() > 1e-12 * top)) {
    r.errors_reliable = false;
  }
  if (H.allFinite() && std::abs(H.determinant()) > 0.0) {
    r.covariance = 2.0 * H.inverse();
  } else {
    r.covariance = Eigen::MatrixXd::Constant(dim, dim, std::numeric_limits<double>::quiet_NaN());
  }
  auto err = [&](Eigen::Index i) { return std::sqrt(std::abs(r.covariance(i, i))); };
  r.gamma_c_err = err(0);
  r.nu_err = err(1);
  if (options.fit_zeta) r.zeta_err = err(2);
  return r;
}

Intercept extrapolate_q0(std::span<const double> q, std::span<const double> y,
                         std::span<const double> dy) {
  if (q.size() != 5 || y.size() != 5 || dy.size() != 5) {
    throw InvalidInput("extrapolate_q0: needs exactly five points");
  }
  std::set<double> distinct(q.begin(), q.end());
  if (distinct.size() < 4) throw InvalidInput("extrapolate_q0: degenerate abscissas");
  Eigen::MatrixXd A(5, 4);
  Eigen::VectorXd b(5);
  for (int i = 0; i < 5; ++i) {
    if (!(dy[static_cast<std::size_t>(i)] > 0.0)) {
      throw InvalidInput("extrapolate_q0: errors must be > 0");
    }
    const double w = 1.0 / dy[static_cast<std::size_t>(i)];
    const double qi = q[static_cast<std::size_t>(i)];
    A(i, 0) = w;
    A(i, 1) = w * qi;
    A(i, 2) = w * qi * qi;
    A(i, 3) = w * qi * qi * qi;
    b(i) = w * y[static_cast<std::size_t>(i)];
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::VectorXd coef = qr.solve(b);
  // Covariance (A^T A)^{-1} = R^{-1} R^{-T}; its (0,0) entry is the squared
  // norm of the first row of R^{-1}.
  const Eigen::MatrixXd R =
      qr.matrixQR().topRows(4).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(4, 4));
  return {coef(0), Rinv.row(0).norm()};
}

std::vector<Curve> curves_from(const ScalingDataset& data) {
  std::map<double, std::vector<std::pair<double, double>>> rows;
  for (const auto& p : data.points) rows[p.L].push_back({p.gamma, p.value});
  std::vector<Curve> out;
  for (auto& [L, r] : rows) {
    std::sort(r.begin(), r.end());
    Curve c{L, {}, {}};
    for (const auto& [g, v] : r) {
      c.gamma.push_back(g);
      c.value.push_back(v);
    }
    out.push_back(std::move(c));
  }
  return out;
}

CrossingEstimate crossing_locator(std::vector<Curve> curves) {
  if (curves.size() < 2) throw InvalidInput("crossing_locator: needs at least 2 sizes");
  std::sort(curves.begin(), curves.end(),
            [](const Curve& a, const Curve& b) { return a.L < b.L; });
  CrossingEstimate est;
  for (std::size_t k = 0; k + 1 < curves.size(); ++k) {
    const Curve& a = curves[k];
    const Curve& b = curves[k + 1];
    std::map<double, double> diff;
    std::map<double, double> va;
    for (std::size_t i = 0; i < a.gamma.size(); ++i) va[a.gamma[i]] = a.value[i];
    for (std::size_t i = 0; i < b.gamma.size(); ++i) {
      const auto it = va.find(b.gamma[i]);
      if (it != va.end()) diff[b.gamma[i]] = b.value[i] - it->second;
    }
    if (diff.size() < 2 && !(diff.size() == 1 && diff.begin()->second == 0.0)) continue;
    auto prev = diff.end();
    for (auto it = diff.begin(); it != diff.end(); prev = it++) {
      if (it->second == 0.0) {
        est.crossings.push_back({a.L, b.L, it->first});
        continue;
      }
      if (prev == diff.end() || prev->second == 0.0) continue;
      if ((prev->second < 0.0) != (it->second < 0.0)) {
        const double g = prev->first + (it->first - prev->first) * prev->second /
                                           (prev->second - it->second);
        est.crossings.push_back({a.L, b.L, g});
      }
    }
  }
  if (est.crossings.empty()) return est;
  std::vector<double> g;
  for (const auto& c : est.crossings) g.push_back(c[2]);
  std::sort(g.begin(), g.end());
  const std::size_t m = g.size();
  est.found = true;
  est.median = m % 2 ? g[m / 2] : 0.5 * (g[m / 2 - 1] + g[m / 2]);
  est.spread = g.back() - g.front();
  return est;
}

double logistic_shape(double x) { return 1.0 / (1.0 + std::exp(x)); }

ScalingDataset synthetic_dataset(double gamma_c, double nu, std::span<const double> sizes,
                                 std::span<const double> gammas, double noise,
                                 std::uint64_t seed, const std::function<double(double)>& shape) {
  if (!(nu > 0.0) || !(noise > 0.0)) throw InvalidInput("synthetic_dataset: needs nu, noise > 0");
  const auto& f = shape ? shape : std::function<double(double)>(logistic_shape);
  CounterRng rng(seed, Stream::test);
  std::normal_distribution<double> normal;
  ScalingDataset d;
  for (double L : sizes) {
    for (double g : gammas) {
      const double v = f(std::pow(L, 1.0 / nu) * (g - gamma_c));
      d.points.push_back({L, g, v * (1.0 + noise * normal(rng)), noise * std::abs(v)});
    }
  }
  return d;
}

}  // namespace mipt::collapse
