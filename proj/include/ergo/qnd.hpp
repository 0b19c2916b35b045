#pragma once

// Energy filtering by repeated controlled time evolution with a measured
// ancilla, simulated exactly in the eigenbasis of H. An ancilla outcome +/-
// applies the Kraus operator (1 +- exp(-iHt)) / 2.

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <vector>

#include "ergo/models.hpp"
#include "ergo/spectral.hpp"

namespace ergo {

inline constexpr double kMinPostSelectProbability = 1e-14;

/// Computational basis state minimizing |<b|H|b>|, lowest index on ties.
/// With `sector`, only states of that magnetization are considered.
std::uint64_t initial_bitstring_index(const HamiltonianOperator& h,
                                      std::optional<int> sector = std::nullopt);
StateVector initial_bitstring(const HamiltonianOperator& h,
                              std::optional<int> sector = std::nullopt);

/// Eigenbasis coefficients <E_n|b> of a computational basis state b, which
/// must lie in the decomposed block.
Eigen::VectorXcd eigen_coefficients(const EigenDecomposition& eig, std::uint64_t b);

struct QndStep {
  Eigen::VectorXcd coeffs;  // renormalized
  double probability = 0.0;
};

/// One round: a_n -> a_n (1 +- exp(-i E_n t)) / 2, then renormalize.
/// Throws PostSelectionFailure when the outcome probability is below 1e-14.
QndStep qnd_round(const Eigen::VectorXcd& coeffs, const Eigen::VectorXd& energies, double t,
                  bool plus, int round_index = 1);

struct QndTrajectory {
  double t0 = 0.0;
  /// Eigenbasis coefficients after round r (index 0 = initial state).
  std::vector<Eigen::VectorXcd> round_coeffs;
  std::vector<double> success_probs;  // one per performed round
  std::vector<int> outcomes;          // +1 / -1 per round
  std::vector<double> energy_mean;    // per entry of round_coeffs
  std::vector<double> energy_variance;

  std::size_t rounds() const noexcept { return success_probs.size(); }
  /// Product of the per-round outcome probabilities.
  double total_probability() const;
};

/// Round r (1-based) evolves for 2^{r-1} t0 with t0 = pi / max_n |E_n|.
/// post_select keeps the + outcome every round; otherwise outcomes are drawn
/// from their Born probabilities with `rng` (required in that case).
QndTrajectory qnd_prepare(const EigenDecomposition& eig, std::uint64_t initial_index, int rounds,
                          bool post_select = true, std::mt19937_64* rng = nullptr);

/// Full-register state of a trajectory entry.
StateVector qnd_state(const EigenDecomposition& eig, const Eigen::VectorXcd& coeffs);

struct QndEnsembleMember {
  QndTrajectory trajectory;
  double weight = 0.0;  // fraction of samples with this outcome record
};

/// Samples `samples` trajectories without post-selection and merges equal
/// outcome records. Weights sum to 1.
std::vector<QndEnsembleMember> qnd_sample_ensemble(const EigenDecomposition& eig,
                                                   std::uint64_t initial_index, int rounds,
                                                   std::size_t samples, std::mt19937_64& rng);

}  // namespace ergo
