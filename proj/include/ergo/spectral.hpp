#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ergo/models.hpp"
#include "ergo/pauli.hpp"

namespace ergo {

inline constexpr std::size_t kDefaultDimCap = std::size_t{1} << 14;

struct EigenDecomposition {
  int n_sites = 0;
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd vectors;   // columns, in the (sector) block basis
  /// Computational basis states spanned by the block; empty means the full
  /// 2^N space in natural order.
  std::vector<std::uint64_t> basis_indices;
  std::optional<int> sector;

  std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
  /// Eigenvector k embedded in the full 2^N register.
  StateVector state(std::size_t k) const;
  /// Embeds block-basis amplitudes into the full register.
  std::vector<std::complex<double>> embed(const Eigen::VectorXcd& block_amps) const;
};

/// Dense diagonalization of H (or of its magnetization sector `sector`).
/// Throws ResourceLimitError when the (block) dimension exceeds `max_dim`.
EigenDecomposition full_diagonalize(const HamiltonianOperator& h,
                                    std::optional<int> sector = std::nullopt,
                                    std::size_t max_dim = kDefaultDimCap);

struct MicrocanonicalEnsemble {
  std::vector<std::size_t> indices;  // ascending, contiguous
  double center_energy = 0.0;
  std::size_t size() const noexcept { return indices.size(); }
};

/// The `size` states closest in energy to `center`. Grows a contiguous
/// window outward from the nearest state; equal distances go to the lower
/// index.
MicrocanonicalEnsemble microcanonical(const Eigen::VectorXd& energies, double center,
                                      std::size_t size);

/// Ensemble sizes used for N = 8..16; empty outside that range.
std::optional<std::size_t> default_ensemble_size(int n_sites);

struct SpacingRatioResult {
  double mean_r = 0.0;
  /// One entry per ensemble member; NaN where a neighbour level is missing.
  std::vector<double> r;
  std::size_t counted = 0;
  std::size_t zero_spacing = 0;
};

/// r_n = min(dE_n, dE_{n+1}) / max(dE_n, dE_{n+1}). Spacings reaching outside
/// the window are used when those levels exist; ensemble members at the
/// spectrum edge are dropped.
SpacingRatioResult level_spacing_ratio(const Eigen::VectorXd& energies,
                                       const MicrocanonicalEnsemble& ensemble);

/// Mean ratio over every interior level of an ascending sequence.
SpacingRatioResult level_spacing_ratio(std::span<const double> sorted_levels);

/// Von Neumann entropy (natural log) of the leftmost `cut` sites.
double entanglement_entropy(const StateVector& v, int cut);
/// Cut at floor(N/2) unless given.
double halfchain_entropy(const StateVector& v, std::optional<int> cut = std::nullopt);

struct DklResult {
  double d1 = 0.0;
  double d2 = 0.0;
  double d_kl = 0.0;
  double mu_e = 0.0;
  double sigma_e = 0.0;  // population standard deviation
  bool divergent = false;
};

DklResult d_kl_metric(std::span<const double> entropies, double mu_r, double sigma_r);

struct EntropyReference {
  double mu;
  double sigma;
};
/// Random-state half-chain entropy reference for the chain lengths where it
/// is tabulated (currently N = 14).
std::optional<EntropyReference> entropy_reference(int n_sites);

/// Cumulative sums of unit exponential spacings.
std::vector<double> poisson_levels(std::size_t n, std::mt19937_64& rng);

/// Spacing ratios of independent 3x3 GOE matrices (one ratio per matrix).
std::vector<double> goe_block_ratios(std::size_t n_blocks, std::mt19937_64& rng);

/// Eigenvalues of one n x n GOE matrix (off-diagonal variance 1/2, diagonal 1).
std::vector<double> goe_levels(std::size_t n, std::mt19937_64& rng);

}  // namespace ergo
