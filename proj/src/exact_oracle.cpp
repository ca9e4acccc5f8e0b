#include "mipt/exact_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "mipt/errors.hpp"

namespace mipt::exact {

namespace {

// Number of occupied sites strictly below j.
int below(std::uint32_t bits, int j) {
  return std::popcount(bits & ((std::uint32_t{1} << j) - 1u));
}

bool occupied(std::uint32_t bits, int j) { return (bits >> j) & 1u; }

// c+_x c_y |bits>, returned as (sign, new bits); sign 0 when it vanishes.
std::pair<int, std::uint32_t> hop(std::uint32_t bits, int x, int y) {
  if (!occupied(bits, y)) return {0, 0};
  if (x == y) return {1, bits};
  const std::uint32_t removed = bits & ~(std::uint32_t{1} << y);
  if (occupied(removed, x)) return {0, 0};
  const int parity = below(bits, y) + below(removed, x);
  return {parity % 2 ? -1 : 1, removed | (std::uint32_t{1} << x)};
}

}  // namespace

FockBasis::FockBasis(int n_sites, int n_particles) : n_sites_(n_sites), n_particles_(n_particles) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw InvalidInput("exact oracle: site count must lie in [1, " +
                       std::to_string(kMaxSites) + "]");
  }
  if (n_particles < 0 || n_particles > n_sites) throw InvalidInput("exact oracle: bad N_p");
  binom_.assign(static_cast<std::size_t>(n_sites + 1),
                std::vector<Index>(static_cast<std::size_t>(n_sites + 2), 0));
  for (int n = 0; n <= n_sites; ++n) {
    binom_[static_cast<std::size_t>(n)][0] = 1;
    for (int k = 1; k <= n; ++k) {
      binom_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] =
          binom_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k - 1)] +
          (k <= n - 1 ? binom_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k)] : 0);
    }
  }
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << n_sites); ++bits) {
    if (std::popcount(bits) == n_particles) states_.push_back(bits);
  }
}

Index FockBasis::rank(std::uint32_t bits) const {
  if (std::popcount(bits) != n_particles_ || bits >> n_sites_) {
    throw InvalidInput("exact oracle: bitstring outside the sector");
  }
  Index r = 0;
  int i = 0;
  for (int x = 0; x < n_sites_; ++x) {
    if (occupied(bits, x)) {
      ++i;
      if (x >= i) r += binom_[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)];
    }
  }
  return r;
}

FockState product_state(std::span<const std::uint8_t> occupation) {
  const int n = static_cast<int>(occupation.size());
  std::uint32_t bits = 0;
  for (int x = 0; x < n; ++x) {
    if (occupation[static_cast<std::size_t>(x)]) bits |= std::uint32_t{1} << x;
  }
  FockState s;
  s.basis = std::make_shared<const FockBasis>(n, std::popcount(bits));
  s.amplitudes = Eigen::VectorXcd::Zero(s.basis->size());
  s.amplitudes(s.basis->rank(bits)) = 1.0;
  return s;
}

FockState slater_state(const Eigen::MatrixXcd& green) {
  const Index n = green.rows();
  if (green.cols() != n) throw InvalidInput("slater_state: Green function is not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(green.transpose());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Index np = static_cast<Index>(std::llround(ev.sum()));
  for (Index i = 0; i < n; ++i) {
    const double target = i >= n - np ? 1.0 : 0.0;
    if (std::abs(ev(i) - target) > 1e-8) {
      throw InvalidInput("slater_state: Green function is not a projector");
    }
  }
  const Eigen::MatrixXcd phi = es.eigenvectors().rightCols(np);
  FockState s;
  s.basis = std::make_shared<const FockBasis>(static_cast<int>(n), static_cast<int>(np));
  s.amplitudes.resize(s.basis->size());
  Eigen::MatrixXcd rows(np, np);
  for (Index b = 0; b < s.basis->size(); ++b) {
    const std::uint32_t bits = s.basis->state(b);
    Index r = 0;
    for (int x = 0; x < n; ++x) {
      if (occupied(bits, x)) rows.row(r++) = phi.row(x);
    }
    s.amplitudes(b) = np == 0 ? std::complex<double>(1.0) : rows.determinant();
  }
  s.amplitudes.normalize();
  return s;
}

ManyBodyHamiltonian::ManyBodyHamiltonian(std::shared_ptr<const FockBasis> basis,
                                         const Eigen::MatrixXd& hopping)
    : basis_(std::move(basis)) {
  const int n = basis_->n_sites();
  if (hopping.rows() != n || hopping.cols() != n) {
    throw InvalidInput("exact oracle: hopping matrix does not match the site count");
  }
  const Index dim = basis_->size();
  h_ = Eigen::MatrixXcd::Zero(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    const std::uint32_t bits = basis_->state(col);
    for (int y = 0; y < n; ++y) {
      if (!occupied(bits, y)) continue;
      for (int x = 0; x < n; ++x) {
        if (hopping(x, y) == 0.0) continue;
        const auto [sign, out] = hop(bits, x, y);
        if (sign != 0) h_(basis_->rank(out), col) += sign * hopping(x, y);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_);
  energies_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

void ManyBodyHamiltonian::evolve(FockState& state, double dt) const {
  if (state.basis->size() != basis_->size()) throw InvalidInput("exact oracle: sector mismatch");
  if (dt == 0.0) return;
  Eigen::VectorXcd c = vectors_.adjoint() * state.amplitudes;
  for (Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -energies_(i) * dt);
  state.amplitudes = vectors_ * c;
}

void exact_evolve(FockState& state, const Eigen::MatrixXd& hopping, double dt) {
  if (dt < 0.0) throw InvalidInput("exact_evolve: negative time step");
  ManyBodyHamiltonian(state.basis, hopping).evolve(state, dt);
}

double occupation_probability(const FockState& state, int site) {
  double p = 0.0;
  for (Index b = 0; b < state.basis->size(); ++b) {
    if (occupied(state.basis->state(b), site)) p += std::norm(state.amplitudes(b));
  }
  return p;
}

MeasureResult exact_measure(FockState& state, int site, std::optional<bool> forced,
                            CounterRng* rng) {
  if (site < 0 || site >= state.basis->n_sites()) throw InvalidInput("exact_measure: bad site");
  const double p = occupation_probability(state, site);
  bool click;
  if (forced) {
    click = *forced;
    const double weight = click ? p : 1.0 - p;
    if (weight <= kClickEpsilon) {
      throw ForbiddenOutcome("exact_measure: forced outcome has probability " +
                             std::to_string(weight));
    }
  } else {
    if (!rng) throw InvalidInput("exact_measure: needs a forced outcome or a generator");
    click = rng->uniform() < p;
  }
  for (Index b = 0; b < state.basis->size(); ++b) {
    if (occupied(state.basis->state(b), site) != click) state.amplitudes(b) = 0.0;
  }
  state.amplitudes.normalize();
  return {click, p};
}

Eigen::MatrixXcd exact_green(const FockState& state) {
  const int n = state.basis->n_sites();
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n, n);
  for (Index b = 0; b < state.basis->size(); ++b) {
    const std::uint32_t bits = state.basis->state(b);
    const std::complex<double> amp = state.amplitudes(b);
    if (amp == 0.0) continue;
    for (int y = 0; y < n; ++y) {
      if (!occupied(bits, y)) continue;
      for (int x = 0; x < n; ++x) {
        const auto [sign, out] = hop(bits, x, y);
        if (sign != 0) {
          g(x, y) += static_cast<double>(sign) *
                     std::conj(state.amplitudes(state.basis->rank(out))) * amp;
        }
      }
    }
  }
  return g;
}

std::complex<double> four_point(const FockState& state, int a, int b, int c, int d) {
  // c+_a c+_b c_c c_d |bits>, operators applied right to left.
  std::complex<double> acc = 0.0;
  for (Index i = 0; i < state.basis->size(); ++i) {
    std::uint32_t bits = state.basis->state(i);
    int sign = 1;
    auto annihilate = [&](int j) {
      if (!occupied(bits, j)) return false;
      sign *= below(bits, j) % 2 ? -1 : 1;
      bits &= ~(std::uint32_t{1} << j);
      return true;
    };
    auto create = [&](int j) {
      if (occupied(bits, j)) return false;
      sign *= below(bits, j) % 2 ? -1 : 1;
      bits |= std::uint32_t{1} << j;
      return true;
    };
    if (!annihilate(d) || !annihilate(c) || !create(b) || !create(a)) continue;
    acc += static_cast<double>(sign) * std::conj(state.amplitudes(state.basis->rank(bits))) *
           state.amplitudes(i);
  }
  return acc;
}

std::complex<double> wick_four_point(const Eigen::MatrixXcd& g, int a, int b, int c, int d) {
  return g(a, d) * g(b, c) - g(a, c) * g(b, d);
}

double number_variance(const FockState& state, std::span<const Index> region) {
  std::uint32_t mask = 0;
  for (Index x : region) mask |= std::uint32_t{1} << x;
  double m1 = 0.0;
  double m2 = 0.0;
  for (Index b = 0; b < state.basis->size(); ++b) {
    const double w = std::norm(state.amplitudes(b));
    const double k = std::popcount(state.basis->state(b) & mask);
    m1 += w * k;
    m2 += w * k * k;
  }
  return m2 - m1 * m1;
}

LockstepReport lockstep_compare(const TrajectoryConfig& config,
                                const TrajectorySchedule& schedule,
                                std::span<const std::uint8_t> outcomes, std::uint64_t seed) {
  if (outcomes.size() != schedule.events.size()) {
    throw InvalidInput("lockstep_compare: outcome count differs from event count");
  }
  auto spectrum = std::make_shared<const Spectrum>(build_spectrum(config.lattice));
  if (spectrum->size() > kMaxSites) throw InvalidInput("lockstep_compare: lattice too large");
  GaussianState gauss = initial_state(config, spectrum, seed);
  FockState exact = slater_state(gauss.coordinate_green());
  const ManyBodyHamiltonian h(exact.basis, hopping_matrix(config.lattice));

  LockstepReport report;
  auto compare_green = [&] {
    return (gauss.coordinate_green() - exact_green(exact)).cwiseAbs().maxCoeff();
  };
  report.initial_green_deviation = compare_green();
  report.max_green_deviation = report.initial_green_deviation;
  double t = gauss.time();
  for (std::size_t k = 0; k < schedule.events.size(); ++k) {
    const auto& ev = schedule.events[k];
    const double next = std::max(ev.time, t);
    gauss.evolve_to(next);
    h.evolve(exact, next - t);
    t = next;
    const bool click = outcomes[k] != 0;
    const double pg = gauss.born_probability(ev.site);
    const MeasureResult r = exact_measure(exact, static_cast<int>(ev.site), click);
    report.max_probability_deviation =
        std::max(report.max_probability_deviation, std::abs(pg - r.probability));
    gauss.apply_outcome(ev.site, click);
    report.max_green_deviation = std::max(report.max_green_deviation, compare_green());
    ++report.steps;
  }
  if (schedule.total_time > t) {
    gauss.evolve_to(schedule.total_time);
    h.evolve(exact, schedule.total_time - t);
    report.max_green_deviation = std::max(report.max_green_deviation, compare_green());
  }
  return report;
}

OracleCheck oracle_check(const TrajectoryConfig& config, std::size_t n_events,
                         std::uint64_t seed) {
  TrajectoryConfig c = config;
  c.record_outcomes = true;
  c.validate();
  auto spectrum = std::make_shared<const Spectrum>(build_spectrum(c.lattice));
  const Index n = spectrum->size();
  if (n > kMaxSites) throw InvalidInput("oracle_check: lattice too large for the exact oracle");

  OracleCheck check;
  CounterRng rng(seed, Stream::schedule);
  const double span = static_cast<double>(n_events) / (c.gamma * static_cast<double>(n));
  for (std::size_t k = 0; k < n_events; ++k) {
    const double t = span * rng.uniform();
    check.schedule.events.push_back({t, static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)))});
  }
  std::stable_sort(check.schedule.events.begin(), check.schedule.events.end(),
                   [](const MeasurementEvent& a, const MeasurementEvent& b) {
                     return a.time < b.time;
                   });
  check.schedule.total_time = span;

  GaussianState state = initial_state(c, spectrum, seed);
  const TrajectoryResult r = run_schedule(c, state, check.schedule, seed);
  check.outcomes = r.outcomes.value_or(std::vector<std::uint8_t>{});
  check.report = lockstep_compare(c, check.schedule, check.outcomes, seed);
  return check;
}

}  // namespace mipt::exact
