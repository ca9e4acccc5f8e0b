#include "mipt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mipt/errors.hpp"

namespace mipt {

Index LatticeSpec::num_sites() const {
  Index n = 1;
  for (int i = 0; i < dim; ++i) n *= size;
  return n;
}

void LatticeSpec::validate() const {
  if (dim < 1) throw InvalidInput("lattice: dim must be >= 1");
  if (size < 2) throw InvalidInput("lattice: size must be >= 2");
  if (!(hopping > 0.0) || !std::isfinite(hopping)) {
    throw InvalidInput("lattice: hopping must be finite and > 0");
  }
  double n = std::pow(static_cast<double>(size), dim);
  if (n > 1e6) throw InvalidInput("lattice: more than 10^6 sites");
}

Coord LatticeSpec::coords(Index site) const {
  Coord c(static_cast<std::size_t>(dim));
  for (int i = dim - 1; i >= 0; --i) {
    c[static_cast<std::size_t>(i)] = static_cast<int>(site % size);
    site /= size;
  }
  return c;
}

Index LatticeSpec::index(std::span<const int> c) const {
  Index idx = 0;
  for (int m : c) {
    const int wrapped = ((m % size) + size) % size;
    idx = idx * size + wrapped;
  }
  return idx;
}

Index LatticeSpec::shift(Index site, std::span<const int> disp) const {
  Coord c = coords(site);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += disp[i];
  return index(c);
}

double dispersion(const LatticeSpec& spec, std::span<const double> k) {
  if (static_cast<int>(k.size()) != spec.dim) {
    throw InvalidInput("dispersion: momentum has wrong dimension");
  }
  const double unit = 2.0 * std::numbers::pi / spec.size;
  double e = 0.0;
  for (double ki : k) {
    const double m = ki / unit;
    if (std::abs(m - std::round(m)) > 1e-9) {
      throw InvalidInput("dispersion: momentum not commensurate with the lattice");
    }
    e += std::cos(ki);
  }
  return -2.0 * spec.hopping * e;
}

double dispersion(const LatticeSpec& spec, std::span<const int> m) {
  if (static_cast<int>(m.size()) != spec.dim) {
    throw InvalidInput("dispersion: momentum has wrong dimension");
  }
  double e = 0.0;
  for (int mi : m) e += std::cos(2.0 * std::numbers::pi * mi / spec.size);
  return -2.0 * spec.hopping * e;
}

Spectrum build_spectrum(const LatticeSpec& spec) {
  spec.validate();
  const Index n = spec.num_sites();

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<double> raw(static_cast<std::size_t>(n));
  std::vector<long long> key(static_cast<std::size_t>(n));
  std::vector<Coord> tuples(static_cast<std::size_t>(n));
  for (Index a = 0; a < n; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    tuples[ua] = spec.coords(a);
    raw[ua] = dispersion(spec, std::span<const int>(tuples[ua]));
    key[ua] = std::llround(raw[ua] / spec.hopping * 1e9);
  }
  // Momentum tuples are generated in lexicographic order, so a stable sort on
  // the rounded energy key breaks ties by tuple.
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)];
  });

  Spectrum s;
  s.lattice = spec;
  s.energies.resize(n);
  s.basis.resize(n, n);
  s.momenta.resize(static_cast<std::size_t>(n));
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  const double unit = 2.0 * std::numbers::pi / spec.size;
  std::vector<Coord> sites(static_cast<std::size_t>(n));
  for (Index x = 0; x < n; ++x) sites[static_cast<std::size_t>(x)] = spec.coords(x);

  for (Index alpha = 0; alpha < n; ++alpha) {
    const auto src = static_cast<std::size_t>(order[static_cast<std::size_t>(alpha)]);
    s.energies(alpha) = raw[src];
    s.momenta[static_cast<std::size_t>(alpha)] = tuples[src];
    const Coord& m = tuples[src];
    for (Index x = 0; x < n; ++x) {
      const Coord& c = sites[static_cast<std::size_t>(x)];
      // k.x is reduced mod L before scaling to keep the phase argument small.
      long long dot = 0;
      for (int i = 0; i < spec.dim; ++i) {
        dot += static_cast<long long>(m[static_cast<std::size_t>(i)]) *
               c[static_cast<std::size_t>(i)];
      }
      const double phase = unit * static_cast<double>(dot % spec.size);
      s.basis(alpha, x) = std::polar(norm, phase);
    }
  }
  return s;
}

Eigen::MatrixXd hopping_matrix(const LatticeSpec& spec) {
  spec.validate();
  const Index n = spec.num_sites();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  Coord step(static_cast<std::size_t>(spec.dim), 0);
  for (Index x = 0; x < n; ++x) {
    for (int axis = 0; axis < spec.dim; ++axis) {
      step.assign(step.size(), 0);
      step[static_cast<std::size_t>(axis)] = 1;
      const Index y = spec.shift(x, step);
      h(x, y) -= spec.hopping;
      h(y, x) -= spec.hopping;
    }
  }
  return h;
}

VelocityScales velocity_scales(const LatticeSpec& spec) {
  const double v = std::sqrt(2.0 * spec.dim) * spec.hopping;
  return {v, v / std::sqrt(static_cast<double>(spec.dim))};
}

}  // namespace mipt
