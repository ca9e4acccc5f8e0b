#include "mipt/observables.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numbers>
#include <string>

#include "mipt/errors.hpp"

namespace mipt {

namespace {

constexpr double kEigenBand = 1e-8;
constexpr double kLogClamp = 1e-14;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> coord_table(const LatticeSpec& spec) {
  const Index n = spec.num_sites();
  std::vector<int> table(static_cast<std::size_t>(n * spec.dim));
  for (Index x = 0; x < n; ++x) {
    const Coord c = spec.coords(x);
    std::copy(c.begin(), c.end(), table.begin() + x * spec.dim);
  }
  return table;
}

void check_green(const LatticeSpec& spec, const Eigen::MatrixXcd& green) {
  if (green.rows() != spec.num_sites() || green.cols() != spec.num_sites()) {
    throw InvalidInput("Green function does not match the lattice");
  }
}

}  // namespace

Region Region::from_sites(const LatticeSpec& spec, std::vector<Index> sites) {
  const Index n = spec.num_sites();
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  if (sites.empty()) throw InvalidInput("region: empty");
  if (sites.front() < 0 || sites.back() >= n) throw InvalidInput("region: site out of range");
  Region r;
  r.sites_ = std::move(sites);
  return r;
}

Region Region::box(const LatticeSpec& spec, std::span<const std::pair<int, int>> ranges) {
  if (static_cast<int>(ranges.size()) != spec.dim) {
    throw InvalidInput("region: need one interval per axis");
  }
  for (const auto& [start, length] : ranges) {
    (void)start;
    if (length < 1 || length > spec.size) throw InvalidInput("region: bad interval length");
  }
  std::vector<Index> sites;
  const Index n = spec.num_sites();
  for (Index x = 0; x < n; ++x) {
    const Coord c = spec.coords(x);
    bool inside = true;
    for (int i = 0; i < spec.dim && inside; ++i) {
      const auto [start, length] = ranges[static_cast<std::size_t>(i)];
      const int offset = (((c[static_cast<std::size_t>(i)] - start) % spec.size) + spec.size) %
                         spec.size;
      inside = offset < length;
    }
    if (inside) sites.push_back(x);
  }
  return from_sites(spec, std::move(sites));
}

Region Region::strip(const LatticeSpec& spec, int axis, int start, int width) {
  if (axis < 0 || axis >= spec.dim) throw InvalidInput("region: bad strip axis");
  std::vector<std::pair<int, int>> ranges(static_cast<std::size_t>(spec.dim), {0, spec.size});
  ranges[static_cast<std::size_t>(axis)] = {start, width};
  return box(spec, ranges);
}

bool Region::contains(Index site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

bool Region::overlaps(const Region& other) const {
  auto a = sites_.begin();
  auto b = other.sites_.begin();
  while (a != sites_.end() && b != other.sites_.end()) {
    if (*a == *b) return true;
    if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

Region Region::united(const Region& other) const {
  Region r;
  std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                 std::back_inserter(r.sites_));
  return r;
}

std::pair<Region, Region> quarter_strips(const LatticeSpec& spec) {
  if (spec.size % 4 != 0) throw InvalidInput("quarter strips need L divisible by 4");
  const int w = spec.size / 4;
  return {Region::strip(spec, 0, 0, w), Region::strip(spec, 0, spec.size / 2, w)};
}

Eigen::MatrixXcd restrict_to(const Eigen::MatrixXcd& green, const Region& region) {
  const auto& s = region.sites();
  const Index m = static_cast<Index>(s.size());
  Eigen::MatrixXcd sub(m, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) sub(i, j) = green(s[i], s[j]);
  }
  return sub;
}

Eigen::MatrixXd density_correlator(const Eigen::MatrixXcd& green) {
  Eigen::MatrixXd c = -green.cwiseAbs2();
  for (Index x = 0; x < green.rows(); ++x) c(x, x) += green(x, x).real();
  return c;
}

Eigen::VectorXd displacement_correlator(const LatticeSpec& spec, const Eigen::MatrixXcd& green) {
  check_green(spec, green);
  const Index n = spec.num_sites();
  const int d = spec.dim;
  const int size = spec.size;
  const std::vector<int> xy = coord_table(spec);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (Index y = 0; y < n; ++y) {
    const int* cy = &xy[static_cast<std::size_t>(y * d)];
    for (Index x = 0; x < n; ++x) {
      const int* cx = &xy[static_cast<std::size_t>(x * d)];
      Index r = 0;
      for (int i = 0; i < d; ++i) r = r * size + (cy[i] - cx[i] + size) % size;
      c(r) -= std::norm(green(x, y));
    }
  }
  double density = 0.0;
  for (Index x = 0; x < n; ++x) density += green(x, x).real();
  c(0) += density;
  return c / static_cast<double>(n);
}

Eigen::VectorXd momentum_transform(const LatticeSpec& spec, const Eigen::VectorXd& c_r) {
  const Index n = spec.num_sites();
  if (c_r.size() != n) throw InvalidInput("momentum_transform: wrong length");
  const int d = spec.dim;
  const int size = spec.size;
  const std::vector<int> coords = coord_table(spec);
  std::vector<double> cos_table(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k) {
    cos_table[static_cast<std::size_t>(k)] = std::cos(2.0 * std::numbers::pi * k / size);
  }
  Eigen::VectorXd c_q = Eigen::VectorXd::Zero(n);
  for (Index q = 0; q < n; ++q) {
    const int* m = &coords[static_cast<std::size_t>(q * d)];
    double acc = 0.0;
    for (Index r = 0; r < n; ++r) {
      const int* x = &coords[static_cast<std::size_t>(r * d)];
      long phase = 0;
      for (int i = 0; i < d; ++i) phase += static_cast<long>(m[i]) * x[i];
      acc += c_r(r) * cos_table[static_cast<std::size_t>(phase % size)];
    }
    c_q(q) = acc;
  }
  return c_q;
}

Eigen::VectorXd axis_cut(const LatticeSpec& spec, const Eigen::VectorXd& c_q) {
  if (c_q.size() != spec.num_sites()) throw InvalidInput("axis_cut: wrong length");
  const int half = spec.size / 2;
  Eigen::VectorXd cut(half + 1);
  Coord m(static_cast<std::size_t>(spec.dim), 0);
  for (int k = 0; k <= half; ++k) {
    double acc = 0.0;
    for (int axis = 0; axis < spec.dim; ++axis) {
      std::fill(m.begin(), m.end(), 0);
      m[static_cast<std::size_t>(axis)] = k;
      acc += c_q(spec.index(m));
      m[static_cast<std::size_t>(axis)] = -k;
      acc += c_q(spec.index(m));
    }
    cut(k) = acc / (2.0 * spec.dim);
  }
  return cut;
}

double cut_momentum(const LatticeSpec& spec, int m) {
  return 2.0 * std::numbers::pi * m / spec.size;
}

double q_tilde(double q) { return 2.0 * std::sin(q / 2.0); }

double chord_length(int size, double ell) {
  return size / std::numbers::pi * std::sin(std::numbers::pi * ell / size);
}

double cumulant2(const Eigen::MatrixXcd& green, const Region& a) {
  const Eigen::MatrixXcd ga = restrict_to(green, a);
  return ga.trace().real() - ga.squaredNorm();
}

Eigen::VectorXd region_spectrum(const Eigen::MatrixXcd& green, const Region& a) {
  const Eigen::MatrixXcd ga = restrict_to(green, a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ga, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalDegradation("region eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (ev.size() > 0 && (ev.minCoeff() < -kEigenBand || ev.maxCoeff() > 1.0 + kEigenBand)) {
    throw NumericalDegradation("region eigenvalue outside [0, 1]: " +
                               std::to_string(ev.minCoeff()) + ", " +
                               std::to_string(ev.maxCoeff()));
  }
  return ev;
}

double entropy_from_spectrum(const Eigen::VectorXd& eigenvalues) {
  double s = 0.0;
  for (double l : eigenvalues) {
    if (l <= kLogClamp || l >= 1.0 - kLogClamp) continue;
    s -= l * std::log(l) + (1.0 - l) * std::log1p(-l);
  }
  return s;
}

double entanglement_entropy(const Eigen::MatrixXcd& green, const Region& a) {
  return entropy_from_spectrum(region_spectrum(green, a));
}

double covariance(const Eigen::MatrixXcd& green, const Region& a, const Region& b) {
  if (a.overlaps(b)) throw InvalidInput("covariance: regions overlap");
  double g = 0.0;
  for (Index y : b.sites()) {
    for (Index x : a.sites()) g += std::norm(green(x, y));
  }
  return g;
}

MutualInformation mutual_information(const Eigen::MatrixXcd& green, const Region& a,
                                     const Region& b) {
  if (a.overlaps(b)) throw InvalidInput("mutual_information: regions overlap");
  MutualInformation mi;
  mi.value = entanglement_entropy(green, a) + entanglement_entropy(green, b) -
             entanglement_entropy(green, a.united(b));
  mi.covariance = covariance(green, a, b);
  const double scale = 2.0 * std::numbers::pi * std::numbers::pi / 3.0 * mi.covariance;
  mi.ratio = scale > 0.0 ? mi.value / scale : kNaN;
  return mi;
}

std::vector<double> fcs_cumulants_from_spectrum(const Eigen::VectorXd& eigenvalues,
                                                int max_order) {
  if (max_order < 1 || max_order > 40) throw InvalidInput("fcs_cumulants: order in [1, 40]");
  const auto n_max = static_cast<std::size_t>(max_order);
  // 1/k! for the exponential series of e^s - 1.
  std::vector<double> inv_fact(n_max + 1, 1.0);
  for (std::size_t k = 1; k <= n_max; ++k) inv_fact[k] = inv_fact[k - 1] / static_cast<double>(k);

  std::vector<double> g(n_max + 1, 0.0);
  std::vector<double> a(n_max + 1);
  std::vector<double> h(n_max + 1);
  for (double l : eigenvalues) {
    // a(s) = 1 + l (e^s - 1); h = log a via n h_n = n a_n - sum_k k h_k a_{n-k}.
    a[0] = 1.0;
    for (std::size_t k = 1; k <= n_max; ++k) a[k] = l * inv_fact[k];
    for (std::size_t n = 1; n <= n_max; ++n) {
      double acc = static_cast<double>(n) * a[n];
      for (std::size_t k = 1; k < n; ++k) acc -= static_cast<double>(k) * h[k] * a[n - k];
      h[n] = acc / static_cast<double>(n);
      g[n] += h[n];
    }
  }
  std::vector<double> kappa(n_max);
  double fact = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    fact *= static_cast<double>(n);
    kappa[n - 1] = fact * g[n];
  }
  return kappa;
}

std::vector<double> fcs_cumulants(const Eigen::MatrixXcd& green, const Region& a,
                                  int max_order) {
  return fcs_cumulants_from_spectrum(region_spectrum(green, a), max_order);
}

std::vector<double> klich_levitov_partial_sums(std::span<const double> cumulants) {
  std::vector<double> sums;
  double s = 0.0;
  for (std::size_t q = 1; 2 * q <= cumulants.size(); ++q) {
    s += 2.0 * std::riemann_zeta(static_cast<double>(2 * q)) * cumulants[2 * q - 1];
    sums.push_back(s);
  }
  return sums;
}

StripProfile strip_profile(const LatticeSpec& spec, const Eigen::MatrixXcd& green) {
  check_green(spec, green);
  StripProfile p;
  for (int ell = 1; ell <= spec.size / 2; ++ell) {
    const Eigen::VectorXd ev = region_spectrum(green, Region::strip(spec, 0, 0, ell));
    const double s = entropy_from_spectrum(ev);
    const double c2 = (ev.array() * (1.0 - ev.array())).sum();
    p.entropy.push_back(s);
    p.cumulant2.push_back(c2);
    p.ratio.push_back(c2 > 0.0 ? s / c2 : kNaN);
  }
  return p;
}

RunningStats::RunningStats(Index dim)
    : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

RunningStats::RunningStats(std::size_t count, Eigen::VectorXd mean, Eigen::VectorXd m2)
    : count_(count), mean_(std::move(mean)), m2_(std::move(m2)) {
  if (mean_.size() != m2_.size()) throw InvalidInput("RunningStats: size mismatch");
}

void RunningStats::push(const Eigen::VectorXd& sample) {
  if (count_ == 0 && mean_.size() == 0) {
    mean_ = Eigen::VectorXd::Zero(sample.size());
    m2_ = Eigen::VectorXd::Zero(sample.size());
  }
  if (sample.size() != mean_.size()) throw InvalidInput("RunningStats: sample size mismatch");
  ++count_;
  const Eigen::VectorXd delta = sample - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta.cwiseProduct(sample - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.dim() != dim()) throw InvalidInput("RunningStats: merge size mismatch");
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  m2_ += other.m2_ + delta.cwiseAbs2() * (na * nb / n);
  count_ += other.count_;
}

Eigen::VectorXd RunningStats::std_err() const {
  if (count_ < 2) return Eigen::VectorXd::Constant(mean_.size(), kNaN);
  const double n = static_cast<double>(count_);
  return (m2_.cwiseMax(0.0) / (n * (n - 1.0))).cwiseSqrt();
}

CorrelatorEstimate translation_average(const LatticeSpec& spec,
                                       std::span<const Eigen::MatrixXcd> greens) {
  if (greens.empty()) throw InvalidInput("translation_average: no samples");
  RunningStats real, grid, cut;
  for (const auto& g : greens) {
    const Eigen::VectorXd c_r = displacement_correlator(spec, g);
    const Eigen::VectorXd c_q = momentum_transform(spec, c_r);
    real.push(c_r);
    grid.push(c_q);
    cut.push(axis_cut(spec, c_q));
  }
  CorrelatorEstimate e;
  e.lattice = spec;
  e.n_trajectories = greens.size();
  e.real_mean = real.mean();
  e.real_err = real.std_err();
  e.grid_mean = grid.mean();
  e.grid_err = grid.std_err();
  e.cut_mean = cut.mean();
  e.cut_err = cut.std_err();
  return e;
}

}  // namespace mipt
