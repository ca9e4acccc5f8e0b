#include "mipt/gaussian_state.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "hermitian_kernels.hpp"
#include "mipt/errors.hpp"

namespace mipt {

namespace {

Index particles_for_filling(Index n, double filling) {
  if (!(filling >= 0.0 && filling <= 1.0)) {
    throw InvalidInput("filling must lie in [0, 1]");
  }
  return static_cast<Index>(std::llround(filling * static_cast<double>(n)));
}

void check_spectrum(const std::shared_ptr<const Spectrum>& s) {
  if (!s) throw InvalidInput("GaussianState: null spectrum");
}

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw IoError("checkpoint: truncated file");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

constexpr std::array<char, 8> kCheckpointMagic = {'M', 'I', 'P', 'T', 'C', 'K', 'P', '1'};

}  // namespace

GaussianState::GaussianState(std::shared_ptr<const Spectrum> spectrum, Index n_particles,
                             double time)
    : spectrum_(std::move(spectrum)),
      n_(spectrum_->size()),
      n_particles_(n_particles),
      time_(time),
      frame_time_(time),
      re_(Eigen::MatrixXd::Zero(n_, n_)),
      im_(Eigen::MatrixXd::Zero(n_, n_)) {}

GaussianState GaussianState::ground(std::shared_ptr<const Spectrum> spectrum, double filling) {
  check_spectrum(spectrum);
  const Index np = particles_for_filling(spectrum->size(), filling);
  GaussianState s(std::move(spectrum), np, 0.0);
  for (Index a = 0; a < np; ++a) s.re_(a, a) = 1.0;
  return s;
}

GaussianState GaussianState::from_pattern(std::shared_ptr<const Spectrum> spectrum,
                                          Basis basis,
                                          std::span<const std::uint8_t> occupation) {
  check_spectrum(spectrum);
  const Index n = spectrum->size();
  if (static_cast<Index>(occupation.size()) != n) {
    throw InvalidInput("GaussianState: occupation pattern length differs from site count");
  }
  Index np = 0;
  for (auto o : occupation) {
    if (o > 1) throw InvalidInput("GaussianState: occupation entries must be 0 or 1");
    np += o;
  }
  if (basis == Basis::eigen) {
    GaussianState s(std::move(spectrum), np, 0.0);
    for (Index a = 0; a < n; ++a) s.re_(a, a) = occupation[static_cast<std::size_t>(a)];
    return s;
  }
  Eigen::MatrixXcd green = Eigen::MatrixXcd::Zero(n, n);
  for (Index x = 0; x < n; ++x) green(x, x) = occupation[static_cast<std::size_t>(x)];
  return from_coordinate_green(std::move(spectrum), green);
}

GaussianState GaussianState::random_pattern(std::shared_ptr<const Spectrum> spectrum,
                                            Basis basis, double filling, CounterRng& rng) {
  check_spectrum(spectrum);
  const Index n = spectrum->size();
  const Index np = particles_for_filling(n, filling);
  std::vector<Index> slots(static_cast<std::size_t>(n));
  std::iota(slots.begin(), slots.end(), Index{0});
  // Partial Fisher-Yates: the first np slots are a uniform random subset.
  for (Index i = 0; i < np; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(slots[static_cast<std::size_t>(i)], slots[static_cast<std::size_t>(j)]);
  }
  std::vector<std::uint8_t> pattern(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < np; ++i) pattern[static_cast<std::size_t>(slots[static_cast<std::size_t>(i)])] = 1;
  return from_pattern(std::move(spectrum), basis, pattern);
}

GaussianState GaussianState::from_coordinate_green(std::shared_ptr<const Spectrum> spectrum,
                                                   const Eigen::MatrixXcd& green,
                                                   double time) {
  check_spectrum(spectrum);
  const auto& v = spectrum->basis;
  if (green.rows() != v.rows() || green.cols() != v.rows()) {
    throw InvalidInput("GaussianState: Green function has wrong shape");
  }
  Eigen::MatrixXcd gtilde = v * green * v.adjoint();
  // The same evolution applies in both bases, so the eigenbasis matrix is
  // tagged with the same time.
  return from_eigen_green(std::move(spectrum), gtilde, time);
}

GaussianState GaussianState::from_eigen_green(std::shared_ptr<const Spectrum> spectrum,
                                              const Eigen::MatrixXcd& gtilde, double time) {
  check_spectrum(spectrum);
  const Index n = spectrum->size();
  if (gtilde.rows() != n || gtilde.cols() != n) {
    throw InvalidInput("GaussianState: correlation matrix has wrong shape");
  }
  if ((gtilde - gtilde.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidInput("GaussianState: correlation matrix is not Hermitian");
  }
  const double trace = gtilde.trace().real();
  const double np = std::round(trace);
  if (std::abs(trace - np) > 1e-8) {
    throw InvalidInput("GaussianState: trace is not an integer particle number");
  }
  if ((gtilde * gtilde - gtilde).cwiseAbs().maxCoeff() > 1e-8) {
    throw InvalidInput("GaussianState: correlation matrix is not a projector (mixed state)");
  }
  GaussianState s(std::move(spectrum), static_cast<Index>(np), time);
  s.set_from_full(gtilde);
  return s;
}

void GaussianState::set_from_full(const Eigen::MatrixXcd& m) {
  for (Index j = 0; j < n_; ++j) {
    for (Index i = 0; i < j; ++i) {
      // Average with the mirrored entry so roundoff asymmetry is not kept.
      const std::complex<double> z = 0.5 * (m(i, j) + std::conj(m(j, i)));
      re_(i, j) = z.real();
      im_(i, j) = z.imag();
    }
    re_(j, j) = m(j, j).real();
    im_(j, j) = 0.0;
  }
  probe_.valid = false;
  next_probe_.valid = false;
}

Eigen::MatrixXcd GaussianState::frame_matrix() const {
  Eigen::MatrixXcd m(n_, n_);
  for (Index j = 0; j < n_; ++j) {
    for (Index i = 0; i < j; ++i) {
      m(i, j) = {re_(i, j), im_(i, j)};
      m(j, i) = {re_(i, j), -im_(i, j)};
    }
    m(j, j) = re_(j, j);
  }
  return m;
}

Eigen::MatrixXcd GaussianState::gtilde() const {
  Eigen::MatrixXcd g = frame_matrix();
  const double s = time_ - frame_time_;
  if (s == 0.0) return g;
  const auto& e = spectrum_->energies;
  Eigen::VectorXcd phase(n_);
  for (Index a = 0; a < n_; ++a) phase(a) = std::polar(1.0, e(a) * s);
  // G~_ab = M_ab e^{i E_a s} e^{-i E_b s}
  Eigen::MatrixXcd out = phase.asDiagonal() * g * phase.conjugate().asDiagonal();
  // The phases cancel on the diagonal; |phase|^2 would only add rounding.
  out.diagonal() = g.diagonal();
  return out;
}

Eigen::MatrixXcd GaussianState::coordinate_green() const {
  const auto& v = spectrum_->basis;
  Eigen::MatrixXcd g = v.adjoint() * gtilde() * v;
  return 0.5 * (g + g.adjoint());
}

void GaussianState::evolve(double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw InvalidInput("evolve: time step must be finite and >= 0");
  }
  time_ += dt;
}

void GaussianState::evolve_to(double t) {
  if (!(t >= time_) || !std::isfinite(t)) {
    throw InvalidInput("evolve_to: target time precedes the current time");
  }
  time_ = t;
}

void GaussianState::plane_wave(Index site, double time, Eigen::VectorXd& re,
                               Eigen::VectorXd& im) const {
  re.resize(n_);
  im.resize(n_);
  const double s = time - frame_time_;
  const auto& e = spectrum_->energies;
  const auto& v = spectrum_->basis;
  for (Index a = 0; a < n_; ++a) {
    // u_a = V_{a x} e^{-i E_a s}
    const std::complex<double> z = v(a, site) * std::polar(1.0, -e(a) * s);
    re(a) = z.real();
    im(a) = z.imag();
  }
}

void GaussianState::ensure_probe(Index site) {
  if (site < 0 || site >= n_) throw InvalidInput("measurement site out of range");
  if (probe_.valid && probe_.site == site && probe_.time == time_) return;
  if (next_probe_.valid && next_probe_.site == site && next_probe_.time == time_) {
    std::swap(probe_, next_probe_);
    next_probe_.valid = false;
    return;
  }
  probe_.site = site;
  probe_.time = time_;
  plane_wave(site, time_, probe_.u_re, probe_.u_im);
  probe_.w_re.resize(n_);
  probe_.w_im.resize(n_);
  kernels::hermitian_matvec(n_, re_.outerStride(), re_.data(), im_.data(), probe_.u_re.data(),
                            probe_.u_im.data(), probe_.w_re.data(), probe_.w_im.data());
  probe_.probability = probe_.u_re.dot(probe_.w_re) + probe_.u_im.dot(probe_.w_im);
  probe_.valid = true;
}

double GaussianState::born_probability(Index site) {
  ensure_probe(site);
  const double p = probe_.probability;
  if (p < -kBornTolerance || p > 1.0 + kBornTolerance || !std::isfinite(p)) {
    throw NumericalDegradation("Born probability " + std::to_string(p) +
                               " outside [0, 1]; the state has lost purity");
  }
  return std::clamp(p, 0.0, 1.0);
}

void GaussianState::apply_click(Index site, std::optional<ProbeHint> next) {
  apply_update(site, true, next);
}

void GaussianState::apply_noclick(Index site, std::optional<ProbeHint> next) {
  apply_update(site, false, next);
}

void GaussianState::apply_outcome(Index site, bool click, std::optional<ProbeHint> next) {
  apply_update(site, click, next);
}

void GaussianState::apply_update(Index site, bool click, std::optional<ProbeHint> next) {
  const double p = born_probability(site);
  const double weight = click ? p : 1.0 - p;
  if (weight <= kClickEpsilon) {
    throw ForbiddenOutcome(std::string(click ? "click" : "no-click") +
                           " outcome has Born probability " + std::to_string(weight));
  }
  const Index n = n_;
  const Eigen::VectorXd& u_re = probe_.u_re;
  const Eigen::VectorXd& u_im = probe_.u_im;
  Eigen::VectorXd b_re, b_im;
  double s1, s2;
  if (click) {
    // G' = G + v v^dagger - (G v)(G v)^dagger / n
    s1 = 1.0;
    s2 = -1.0 / p;
    b_re = probe_.w_re;
    b_im = probe_.w_im;
  } else {
    // G' = G - v v^dagger + (v - G v)(v - G v)^dagger / (1 - n)
    s1 = -1.0;
    s2 = 1.0 / (1.0 - p);
    b_re = u_re - probe_.w_re;
    b_im = u_im - probe_.w_im;
  }

  Eigen::VectorXd c_re, c_im;
  const bool lookahead = next.has_value() && next->site >= 0 && next->site < n &&
                         next->time >= time_;
  if (lookahead) {
    plane_wave(next->site, next->time, c_re, c_im);
    next_probe_.w_re.resize(n);
    next_probe_.w_im.resize(n);
  }
  kernels::hermitian_rank2_update(n, re_.outerStride(), re_.data(), im_.data(), s1, u_re.data(),
                                  u_im.data(), s2, b_re.data(), b_im.data(),
                                  lookahead ? c_re.data() : nullptr,
                                  lookahead ? c_im.data() : nullptr,
                                  lookahead ? next_probe_.w_re.data() : nullptr,
                                  lookahead ? next_probe_.w_im.data() : nullptr);
  probe_.valid = false;
  next_probe_.valid = false;
  if (lookahead) {
    next_probe_.site = next->site;
    next_probe_.time = next->time;
    next_probe_.u_re = std::move(c_re);
    next_probe_.u_im = std::move(c_im);
    next_probe_.probability = next_probe_.u_re.dot(next_probe_.w_re) +
                              next_probe_.u_im.dot(next_probe_.w_im);
    next_probe_.valid = true;
  }

  ++updates_;
  if (policy_.interval > 0 && updates_ % policy_.interval == 0) repurify();
}

double GaussianState::trace_deviation() const {
  return std::abs(re_.diagonal().sum() - static_cast<double>(n_particles_));
}

double GaussianState::purity_deviation() const {
  // M and G~ differ by a diagonal unitary similarity, which leaves the
  // entrywise magnitudes of G^2 - G unchanged.
  const Eigen::MatrixXcd m = frame_matrix();
  return (m * m - m).cwiseAbs().maxCoeff();
}

bool GaussianState::repurify() {
  const Eigen::MatrixXcd m = frame_matrix();
  if ((m * m - m).cwiseAbs().maxCoeff() <= policy_.tolerance) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
  // Eigenvalues ascending: the last N_p vectors span the occupied subspace.
  const Eigen::MatrixXcd occ = eig.eigenvectors().rightCols(n_particles_);
  set_from_full(occ * occ.adjoint());
  ++repurifications_;
  return true;
}

void GaussianState::save_checkpoint(const std::filesystem::path& path,
                                    std::uint64_t rng_cursor) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot open " + path.string());
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spectrum_->lattice.size));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spectrum_->lattice.dim));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(n_particles_));
  put_le<double>(out, time_);
  put_le<std::uint64_t>(out, rng_cursor);
  const Eigen::MatrixXcd g = gtilde();
  for (Index r = 0; r < n_; ++r) {
    for (Index c = 0; c < n_; ++c) {
      put_le<double>(out, g(r, c).real());
      put_le<double>(out, g(r, c).imag());
    }
  }
  if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

GaussianState::Checkpoint GaussianState::load_checkpoint(
    std::shared_ptr<const Spectrum> spectrum, const std::filesystem::path& path) {
  check_spectrum(spectrum);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kCheckpointMagic) throw IoError("checkpoint: bad magic in " + path.string());
  const auto size = get_le<std::uint32_t>(in);
  const auto dim = get_le<std::uint32_t>(in);
  const auto np = get_le<std::uint64_t>(in);
  const auto time = get_le<double>(in);
  const auto cursor = get_le<std::uint64_t>(in);
  if (static_cast<int>(size) != spectrum->lattice.size ||
      static_cast<int>(dim) != spectrum->lattice.dim) {
    throw InvalidInput("checkpoint: lattice does not match the spectrum");
  }
  const Index n = spectrum->size();
  Eigen::MatrixXcd g(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      g(r, c) = {re, im};
    }
  }
  GaussianState state = from_eigen_green(std::move(spectrum), g, time);
  if (static_cast<std::uint64_t>(state.n_particles()) != np) {
    throw IoError("checkpoint: particle number disagrees with the stored matrix");
  }
  return Checkpoint{std::move(state), cursor};
}

}  // namespace mipt
