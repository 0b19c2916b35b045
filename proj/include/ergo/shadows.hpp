#pragma once

// Randomized single-qubit Pauli measurements ("classical shadows") and
// per-Pauli estimators built from them.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ergo/pauli.hpp"

namespace ergo {

/// Struct-of-arrays shot storage. Per shot, the measured axis of site j is
/// encoded in bit j of (basis_x, basis_z) with the PauliString convention
/// (X = (1,0), Y = (1,1), Z = (0,1)); bit j of `outcomes` is set when the
/// site read -1.
struct ShadowDataset {
  int n_sites = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> basis_x;
  std::vector<std::uint64_t> basis_z;
  std::vector<std::uint64_t> outcomes;

  std::size_t size() const noexcept { return outcomes.size(); }
  Axis basis(std::size_t shot, int site) const;
  int outcome(std::size_t shot, int site) const;  // +1 or -1

  /// "XZY...:+-+..." with site 0 first.
  std::string encode(std::size_t shot) const;
  void push_record(std::string_view record);

  /// Text file: '#' comment lines, then one record per shot.
  void write(std::ostream& os) const;
  static ShadowDataset read(std::istream& is);
};

struct ShadowOptions {
  std::size_t block_size = 8192;  // shots per independently seeded block
  int jobs = 1;
};

/// Draws `shots` records from v: a uniform axis per site, then a full
/// bitstring from the Born distribution in the rotated basis. Shot block b
/// uses its own generator seeded from (seed, b), so the dataset depends only
/// on (v, shots, seed, block_size).
ShadowDataset collect_shadows(const StateVector& v, std::size_t shots, std::uint64_t seed,
                              const ShadowOptions& opt = {});

struct EstimatorOptions {
  /// 0 or 1: plain mean over all shots. k > 1: median of k group means.
  std::size_t median_of_means_groups = 0;
};

/// Mean of the per-shot value 3^w * prod(outcomes on the support) over shots
/// whose axes match p on its support (0 otherwise). Requires Hermitian p.
double estimate_pauli(const ShadowDataset& ds, const PauliString& p,
                      const EstimatorOptions& opt = {});

/// Shot-estimated covariance matrix, symmetric by construction. All entries
/// come from the same dataset.
Eigen::MatrixXd estimate_covariance_matrix(const ShadowDataset& ds, const OperatorBasis& basis,
                                           const EstimatorOptions& opt = {});

/// N_L * eps / sqrt(N_L - 1): bound on the change of D_E when every entry of
/// M moves by at most eps.
double de_error_bound(double eps, std::size_t n_l);

/// 3^{2l} ln(N_M) / eps^2, the shot-count rule of thumb for l-local bases.
double shots_rule_of_thumb(int locality, std::size_t n_matrix_elements, double eps);

}  // namespace ergo
