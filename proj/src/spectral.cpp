#include "ergo/spectral.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ergo/errors.hpp"
#include "ergo/linalg.hpp"

namespace ergo {

std::vector<std::complex<double>> EigenDecomposition::embed(const Eigen::VectorXcd& block) const {
  const std::size_t d = std::size_t{1} << n_sites;
  std::vector<std::complex<double>> amps(d);
  if (basis_indices.empty()) {
    if (static_cast<std::size_t>(block.size()) != d) throw std::invalid_argument("embed: size");
    for (std::size_t i = 0; i < d; ++i) amps[i] = block[static_cast<Eigen::Index>(i)];
  } else {
    if (static_cast<std::size_t>(block.size()) != basis_indices.size()) {
      throw std::invalid_argument("embed: size");
    }
    for (std::size_t i = 0; i < basis_indices.size(); ++i) {
      amps[basis_indices[i]] = block[static_cast<Eigen::Index>(i)];
    }
  }
  return amps;
}

StateVector EigenDecomposition::state(std::size_t k) const {
  if (k >= size()) throw std::out_of_range("eigenstate index out of range");
  const Eigen::VectorXcd col = vectors.col(static_cast<Eigen::Index>(k)).cast<std::complex<double>>();
  return StateVector::normalized(n_sites, embed(col));
}

EigenDecomposition full_diagonalize(const HamiltonianOperator& h, std::optional<int> sector,
                                    std::size_t max_dim) {
  EigenDecomposition out;
  out.n_sites = h.n_sites();
  out.sector = sector;
  Eigen::MatrixXd m;
  if (sector) {
    out.basis_indices = magnetization_sector_indices(h.n_sites(), *sector);
    if (out.basis_indices.size() > max_dim) {
      throw ResourceLimitError("sector dimension " + std::to_string(out.basis_indices.size()) +
                               " exceeds cap " + std::to_string(max_dim));
    }
    m = h.dense_block(out.basis_indices, max_dim);
  } else {
    if (h.n_sites() > 30 || h.dim() > max_dim) {
      throw ResourceLimitError("Hilbert space dimension 2^" + std::to_string(h.n_sites()) +
                               " exceeds cap " + std::to_string(max_dim));
    }
    m = h.dense(max_dim);
  }
  SymmetricEigen e = eigh(std::move(m));
  out.energies = std::move(e.values);
  out.vectors = std::move(e.vectors);
  return out;
}

MicrocanonicalEnsemble microcanonical(const Eigen::VectorXd& energies, double center,
                                      std::size_t size) {
  const auto n = static_cast<std::size_t>(energies.size());
  if (size > n) throw std::invalid_argument("microcanonical: size exceeds spectrum length");
  MicrocanonicalEnsemble ens;
  ens.center_energy = center;
  if (size == 0) return ens;
  for (std::size_t i = 1; i < n; ++i) {
    if (energies[i] < energies[i - 1]) throw std::invalid_argument("microcanonical: unsorted energies");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(energies[i] - center) < std::abs(energies[best] - center)) best = i;
  }
  std::size_t lo = best, hi = best;  // inclusive
  while (hi - lo + 1 < size) {
    if (lo == 0) { ++hi; continue; }
    if (hi + 1 == n) { --lo; continue; }
    const double dl = std::abs(energies[lo - 1] - center);
    const double dh = std::abs(energies[hi + 1] - center);
    if (dl <= dh) --lo;
    else ++hi;
  }
  ens.indices.resize(size);
  std::iota(ens.indices.begin(), ens.indices.end(), lo);
  return ens;
}

std::optional<std::size_t> default_ensemble_size(int n_sites) {
  switch (n_sites) {
    case 8: return 100;
    case 9: return 150;
    case 10: return 200;
    case 11: return 300;
    case 12: return 400;
    case 13: return 500;
    case 14: return 600;
    case 15: return 1000;
    case 16: return 2000;
    default: return std::nullopt;
  }
}

namespace {

// Returns NaN if no ratio is defined; sets `zero` when a spacing vanishes.
double ratio(double e_prev, double e, double e_next, bool& zero) {
  const double a = e - e_prev, b = e_next - e;
  const double scale = std::max({1.0, std::abs(e_prev), std::abs(e_next)});
  const double eps = 1e-12 * scale;
  zero = (a <= eps || b <= eps);
  if (zero) return 0.0;
  return std::min(a, b) / std::max(a, b);
}

}  // namespace

SpacingRatioResult level_spacing_ratio(const Eigen::VectorXd& energies,
                                       const MicrocanonicalEnsemble& ensemble) {
  SpacingRatioResult res;
  const auto n = static_cast<std::size_t>(energies.size());
  for (std::size_t i = 1; i < ensemble.indices.size(); ++i) {
    if (ensemble.indices[i] != ensemble.indices[i - 1] + 1) {
      throw std::invalid_argument("level_spacing_ratio: ensemble not contiguous");
    }
  }
  res.r.reserve(ensemble.size());
  double sum = 0.0;
  for (std::size_t idx : ensemble.indices) {
    if (idx >= n) throw std::out_of_range("level_spacing_ratio: index out of range");
    if (idx == 0 || idx + 1 >= n) {
      res.r.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    bool zero = false;
    const double r = ratio(energies[idx - 1], energies[idx], energies[idx + 1], zero);
    if (zero) ++res.zero_spacing;
    res.r.push_back(r);
    sum += r;
    ++res.counted;
  }
  res.mean_r = res.counted ? sum / static_cast<double>(res.counted)
                           : std::numeric_limits<double>::quiet_NaN();
  return res;
}

SpacingRatioResult level_spacing_ratio(std::span<const double> levels) {
  const Eigen::Map<const Eigen::VectorXd> e(levels.data(), static_cast<Eigen::Index>(levels.size()));
  MicrocanonicalEnsemble all;
  all.indices.resize(levels.size());
  std::iota(all.indices.begin(), all.indices.end(), std::size_t{0});
  return level_spacing_ratio(Eigen::VectorXd(e), all);
}

double entanglement_entropy(const StateVector& v, int cut) {
  const int n = v.n_sites();
  if (cut < 0 || cut > n) throw std::invalid_argument("entanglement_entropy: cut out of range");
  if (cut == 0 || cut == n) return 0.0;
  const Eigen::Index rows = Eigen::Index{1} << cut;
  const Eigen::Index cols = Eigen::Index{1} << (n - cut);
  // Site 0 is the most significant amplitude bit, so the left block indexes rows.
  const Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
      psi(v.amplitudes().data(), rows, cols);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(psi);
  double s = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()[i] * svd.singularValues()[i];
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

double halfchain_entropy(const StateVector& v, std::optional<int> cut) {
  return entanglement_entropy(v, cut.value_or(v.n_sites() / 2));
}

DklResult d_kl_metric(std::span<const double> entropies, double mu_r, double sigma_r) {
  if (entropies.size() < 2) throw std::invalid_argument("d_kl_metric: need at least 2 samples");
  if (!(sigma_r > 0.0)) throw std::invalid_argument("d_kl_metric: sigma_R must be positive");
  DklResult out;
  const double n = static_cast<double>(entropies.size());
  out.mu_e = std::accumulate(entropies.begin(), entropies.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : entropies) ss += (s - out.mu_e) * (s - out.mu_e);
  out.sigma_e = std::sqrt(ss / n);
  out.d1 = (out.mu_e - mu_r) * (out.mu_e - mu_r) / (2.0 * sigma_r * sigma_r);
  if (out.sigma_e == 0.0) {
    out.divergent = true;
    out.d2 = std::numeric_limits<double>::infinity();
  } else {
    const double ratio = out.sigma_e / sigma_r;
    out.d2 = 0.5 * (ratio * ratio - 1.0) - std::log(ratio);
  }
  out.d_kl = out.d1 + out.d2;
  return out;
}

std::optional<EntropyReference> entropy_reference(int n_sites) {
  if (n_sites == 14) return EntropyReference{4.2652, std::sqrt(2.0) * 0.0103};
  return std::nullopt;
}

std::vector<double> poisson_levels(std::size_t n, std::mt19937_64& rng) {
  std::exponential_distribution<double> gap(1.0);
  std::vector<double> out(n);
  double e = 0.0;
  for (auto& x : out) {
    e += gap(rng);
    x = e;
  }
  return out;
}

std::vector<double> goe_block_ratios(std::size_t n_blocks, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out;
  out.reserve(n_blocks);
  const double off = std::sqrt(0.5);
  for (std::size_t k = 0; k < n_blocks; ++k) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
      m(i, i) = gauss(rng);
      for (int j = i + 1; j < 3; ++j) m(i, j) = m(j, i) = off * gauss(rng);
    }
    const Eigen::Vector3d e = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m, Eigen::EigenvaluesOnly)
                                  .eigenvalues();
    const double a = e[1] - e[0], b = e[2] - e[1];
    out.push_back(std::max(a, b) > 0 ? std::min(a, b) / std::max(a, b) : 0.0);
  }
  return out;
}

std::vector<double> goe_levels(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(dim, dim);
  const double off = std::sqrt(0.5);
  for (Eigen::Index i = 0; i < dim; ++i) {
    m(i, i) = gauss(rng);
    for (Eigen::Index j = i + 1; j < dim; ++j) m(i, j) = m(j, i) = off * gauss(rng);
  }
  const Eigen::VectorXd e = eigvalsh(std::move(m));
  return {e.data(), e.data() + e.size()};
}

}  // namespace ergo
