#include "ergo/freefermion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ergo {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

bool self_paired(const BdGModel& m, std::size_t i) { return m.partner(i) == i; }

}  // namespace

std::size_t BdGModel::partner(std::size_t i) const {
  const auto n = static_cast<std::size_t>(n_sites);
  if (i >= n) throw std::out_of_range("BdGModel::partner");
  if (sector == FermionSector::antiperiodic) return n - 1 - i;
  // Periodic grid: index i <-> integer label i - N/2 + 1.
  const long label = static_cast<long>(i) - static_cast<long>(n / 2) + 1;
  long neg = -label;
  if (neg <= -static_cast<long>(n / 2)) neg += static_cast<long>(n);
  return static_cast<std::size_t>(neg + static_cast<long>(n / 2) - 1);
}

std::size_t BdGModel::shift(std::size_t i, int m) const {
  const long n = n_sites;
  long j = (static_cast<long>(i) + m) % n;
  if (j < 0) j += n;
  return static_cast<std::size_t>(j);
}

double BdGModel::epsilon_max() const { return *std::max_element(epsilon.begin(), epsilon.end()); }

int BdGModel::hole_modes() const {
  int holes = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (self_paired(*this, i) && blocks[i](0, 0).real() < 0.0) ++holes;
  }
  return holes;
}

BdGModel solve_tfim_periodic(int n, double g, FermionSector sector) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("solve_tfim_periodic: n must be even and >= 2");
  if (!std::isfinite(g)) throw std::invalid_argument("solve_tfim_periodic: g must be finite");
  BdGModel m;
  m.n_sites = n;
  m.g = g;
  m.sector = sector;
  for (int i = 0; i < n; ++i) {
    const double label = sector == FermionSector::periodic ? i - n / 2 + 1 : i - n / 2 + 0.5;
    m.momenta.push_back(2.0 * kPi * label / n);
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double k = m.momenta[i];
    const double a = std::cos(k) - g;
    const double s = self_paired(m, i) ? 0.0 : std::sin(k);
    Eigen::Matrix2cd h;
    h << a, cplx(0, s), cplx(0, -s), -a;
    m.blocks.push_back(h);
    m.epsilon.push_back(2.0 * std::sqrt(std::max(0.0, 1.0 + g * g - 2.0 * g * std::cos(k))));
    Eigen::Matrix2cd u;
    if (self_paired(m, i)) {
      if (a < 0.0) u << 0, 1, 1, 0;
      else u.setIdentity();
    } else {
      // h = E (cos t sz - sin t sy) with t = atan2(s, a)
      const double t = std::atan2(s, a);
      const double c = std::cos(0.5 * t), sn = std::sin(0.5 * t);
      u << c, cplx(0, -sn), cplx(0, -sn), c;
    }
    m.rotations.push_back(u);
  }
  return m;
}

double FermionGaussianState::energy() const {
  double e = 0.0;
  for (std::size_t i = 0; i < occupations.size(); ++i) {
    e += model.epsilon[i] * (occupations[i] ? 0.5 : -0.5);
  }
  return e;
}

bool FermionGaussianState::is_physical() const {
  const int n_gamma = static_cast<int>(std::count(occupations.begin(), occupations.end(), 1));
  const int parity = (n_gamma + model.hole_modes()) & 1;
  return model.sector == FermionSector::periodic ? parity == 1 : parity == 0;
}

FermionGaussianState make_state(const BdGModel& model, std::vector<std::uint8_t> occupations) {
  if (occupations.size() != model.size()) throw std::invalid_argument("make_state: size mismatch");
  for (auto o : occupations) {
    if (o > 1) throw std::invalid_argument("make_state: occupations must be 0 or 1");
  }
  return {model, std::move(occupations)};
}

FermionGaussianState consecutive_filling(const BdGModel& model, int n_max) {
  if (n_max < 0) throw std::invalid_argument("consecutive_filling: n_max must be >= 0");
  std::vector<std::uint8_t> occ(model.size(), 0);
  const int n = model.n_sites;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double label = model.momenta[i] * n / (2.0 * kPi);
    const double lim = model.sector == FermionSector::periodic ? n_max : n_max + 0.5;
    if (std::abs(label) <= lim + 1e-9) occ[i] = 1;
  }
  return {model, std::move(occ)};
}

FermionGaussianState random_occupations(const BdGModel& model, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<std::uint8_t> occ(model.size());
  for (auto& o : occ) o = coin(rng) ? 1 : 0;
  return {model, std::move(occ)};
}

std::vector<double> many_body_energies(const BdGModel& model, bool physical_only) {
  if (model.n_sites > 20) throw std::invalid_argument("many_body_energies: n_sites > 20");
  const std::size_t n = model.size();
  std::vector<double> out;
  FermionGaussianState st{model, std::vector<std::uint8_t>(n)};
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) st.occupations[i] = (mask >> i) & 1;
    if (physical_only && !st.is_physical()) continue;
    out.push_back(st.energy());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double cosine_variance_unnormalized(const FermionGaussianState& state, int m) {
  const auto& mod = state.model;
  if (m % mod.n_sites == 0) throw std::invalid_argument("cosine_variance: q must be nonzero");
  double acc = 0.0;
  for (std::size_t i = 0; i < mod.size(); ++i) {
    if (!state.occupations[i]) continue;
    const double e2 = mod.epsilon[i] * mod.epsilon[i];
    acc += e2 * ((1 - state.occupations[mod.shift(i, m)]) + (1 - state.occupations[mod.shift(i, -m)]));
  }
  return 0.25 * acc;
}

double cosine_variance(const FermionGaussianState& state, int m) {
  double z = 0.0;
  for (double e : state.model.epsilon) z += e * e;
  if (z == 0.0) throw std::domain_error("cosine_variance: flat zero dispersion");
  return cosine_variance_unnormalized(state, m) / (z / 8.0);
}

std::vector<QPoint> gap_vs_q_curve(const FermionGaussianState& state, const std::vector<int>& ms) {
  std::vector<QPoint> out;
  out.reserve(ms.size());
  for (int m : ms) {
    out.push_back({m, 2.0 * kPi * m / state.model.n_sites, cosine_variance(state, m)});
  }
  return out;
}

int fermi_surface_count(const FermionGaussianState& state) {
  int n_fs = 0;
  for (std::size_t i = 0; i < state.occupations.size(); ++i) {
    n_fs += state.occupations[i] != state.occupations[state.model.shift(i, 1)];
  }
  return n_fs;
}

double fermi_surface_bound(const FermionGaussianState& state) {
  double z = 0.0;
  for (double e : state.model.epsilon) z += e * e;
  const double emax = state.model.epsilon_max();
  return 2.0 * emax * emax / z * fermi_surface_count(state);
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double fermi_surface_density(const BdGModel& model, double eps) {
  double z = 0.0;
  for (double e : model.epsilon) z += e * e;
  z /= model.n_sites;
  const double emax = model.epsilon_max();
  if (emax == 0.0) throw std::domain_error("fermi_surface_density: zero dispersion");
  return z * (1.0 - eps) / (2.0 * emax * emax);
}

double anticoncentration_count(int n, int n_fs) {
  if (n < 1 || n_fs < 0 || n_fs > n) throw std::domain_error("anticoncentration_count: bad N_FS");
  const double log_binom = std::lgamma(n + 1.0) - std::lgamma(n_fs + 1.0) - std::lgamma(n - n_fs + 1.0);
  return 2.0 * std::exp(log_binom - n * std::numbers::ln2);
}

double anticoncentration_from_density(int n, double p, AnticoncentrationMode mode) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("anticoncentration: p must lie in (0, 1)");
  if (n < 1) throw std::domain_error("anticoncentration: N must be >= 1");
  if (mode == AnticoncentrationMode::exact) {
    const int n_fs = 2 * static_cast<int>(std::lround(p * n / 2.0));
    return anticoncentration_count(n, std::min(n_fs, n));
  }
  // 2 d^{S_b(p)-1} / sqrt(2 pi p (1-p) N) with d = 2^N
  const double log2_val = n * (binary_entropy(p) - 1.0);
  return 2.0 * std::exp2(log2_val) / std::sqrt(2.0 * kPi * p * (1.0 - p) * n);
}

double anticoncentration_bound(const BdGModel& model, double eps, AnticoncentrationMode mode) {
  return anticoncentration_from_density(model.n_sites, fermi_surface_density(model, eps), mode);
}

Eigen::MatrixXcd majorana_correlations(const FermionGaussianState& state) {
  const auto& mod = state.model;
  const int n = mod.n_sites;
  const auto nk = mod.size();
  // Momentum-space <Psi_k Psi_k^dag> = U diag(1 - n_k, n_{-k}) U^dag.
  std::vector<cplx> c00(nk), c01(nk);
  for (std::size_t i = 0; i < nk; ++i) {
    Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
    d(0, 0) = 1.0 - state.occupations[i];
    d(1, 1) = state.occupations[mod.partner(i)];
    const Eigen::Matrix2cd c = mod.rotations[i] * d * mod.rotations[i].adjoint();
    c00[i] = c(0, 0);
    c01[i] = c(0, 1);
  }
  // Translation invariance: A_ij = <c_i c_j^dag>, B_ij = <c_i c_j> depend on
  // r = i - j; kept unwrapped since the antiperiodic grid flips sign at r = N.
  std::vector<cplx> a_r(2 * n - 1), b_r(2 * n - 1);
  for (int r = -(n - 1); r < n; ++r) {
    cplx sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < nk; ++i) {
      const cplx ph = std::polar(1.0, mod.momenta[i] * r);
      sa += ph * c00[i];
      sb += ph * c01[i];
    }
    a_r[r + n - 1] = sa / static_cast<double>(n);
    b_r[r + n - 1] = sb / static_cast<double>(n);
  }
  auto A = [&](int i, int j) { return a_r[i - j + n - 1]; };
  auto B = [&](int i, int j) { return b_r[i - j + n - 1]; };
  // <f_p f_q> over f = (c_0..c_{N-1}, c_0^dag..c_{N-1}^dag)
  Eigen::MatrixXcd f(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      f(i, j) = B(i, j);
      f(i, n + j) = A(i, j);
      f(n + i, j) = (i == j ? 1.0 : 0.0) - A(j, i);
      f(n + i, n + j) = std::conj(B(j, i));
    }
  }
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    w(2 * j, j) = 1.0;
    w(2 * j, n + j) = 1.0;
    w(2 * j + 1, j) = cplx(0, -1);
    w(2 * j + 1, n + j) = cplx(0, 1);
  }
  return w * f * w.transpose();
}

std::vector<MajoranaBilinear> fermion_bilinear_basis(int n_sites) {
  if (n_sites < 2) throw std::invalid_argument("fermion_bilinear_basis: need >= 2 sites");
  std::vector<MajoranaBilinear> out;
  out.reserve(5 * static_cast<std::size_t>(n_sites));
  for (int j = 0; j < n_sites; ++j) {
    const int k = (j + 1) % n_sites;
    const int aj = 2 * j, bj = 2 * j + 1, ak = 2 * k, bk = 2 * k + 1;
    out.push_back({-1, aj, bj});
    out.push_back({-1, bj, ak});
    out.push_back({+1, bj, bk});
    out.push_back({-1, aj, ak});
    out.push_back({+1, aj, bk});
  }
  return out;
}

Eigen::MatrixXd ff_covariance_matrix(const FermionGaussianState& state) {
  const Eigen::MatrixXcd g = majorana_correlations(state);
  const auto basis = fermion_bilinear_basis(state.model.n_sites);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const auto& o1 = basis[x];
    for (Eigen::Index y = x; y < n; ++y) {
      const auto& o2 = basis[y];
      const cplx v = g(o1.mu, o2.mu) * g(o1.nu, o2.nu) - g(o1.mu, o2.nu) * g(o1.nu, o2.mu);
      m(x, y) = m(y, x) = o1.sign * o2.sign * v.real();
    }
  }
  return m;
}

namespace {

// Residual sum of squares of the cos/sin least-squares fit at momentum q.
double fit_at(const Eigen::VectorXd& y, double q, double& amp) {
  const Eigen::Index n = y.size();
  if (std::abs(std::sin(q * 1.0)) < 1e-14 && std::abs(std::cos(q) - 1.0) < 1e-14) {
    const double mean = y.mean();
    amp = std::abs(mean);
    return (y.array() - mean).square().sum();
  }
  Eigen::MatrixXd basis(n, 2);
  for (Eigen::Index j = 0; j < n; ++j) {
    basis(j, 0) = std::cos(q * j);
    basis(j, 1) = std::sin(q * j);
  }
  const Eigen::Vector2d coef = basis.colPivHouseholderQr().solve(y);
  amp = coef.norm();
  return (y - basis * coef).squaredNorm();
}

}  // namespace

SinusoidFit fit_sinusoid_channels(const Eigen::MatrixXd& channels) {
  const Eigen::Index n = channels.rows();
  if (n < 2) throw std::invalid_argument("fit_sinusoid: need at least 2 samples");
  const double total = channels.squaredNorm();
  if (total == 0.0) throw std::domain_error("fit_sinusoid: zero vector has no defined fit");
  SinusoidFit best;
  best.residual = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m <= n / 2; ++m) {
    const double q = 2.0 * kPi * static_cast<double>(m) / static_cast<double>(n);
    double rss = 0.0, amp2 = 0.0;
    for (Eigen::Index c = 0; c < channels.cols(); ++c) {
      double amp = 0.0;
      rss += fit_at(channels.col(c), q, amp);
      amp2 += amp * amp;
    }
    const double res = rss / total;
    if (res < best.residual - 1e-15) {
      best = {q, static_cast<int>(m), std::sqrt(amp2), res};
    }
  }
  return best;
}

SinusoidFit fit_sinusoid(const Eigen::VectorXd& y) { return fit_sinusoid_channels(y); }

}  // namespace ergo
