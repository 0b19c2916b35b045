#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergo/pauli.hpp"

namespace ergo {

enum class ModelFamily { ising, xxz, custom };

std::string_view family_name(ModelFamily f);
ModelFamily parse_family(std::string_view s);

struct PauliTerm {
  double coefficient;
  PauliString op;
};

/// Declarative model description, as found in CLI configs.
/// Ising parameters: g, h, h1 (default 0.25), hN (default -0.25).
/// XXZ parameters: delta (alias "Δ", default 1), h1 (default 0.05).
struct HamiltonianSpec {
  ModelFamily family = ModelFamily::ising;
  int n_sites = 0;
  std::map<std::string, double> parameters;
  Boundary boundary = Boundary::open;
  std::vector<PauliTerm> terms;  // custom family only
};

class HamiltonianOperator {
 public:
  /// Terms are merged (equal strings summed, exact zeros dropped) and their
  /// phases folded into real coefficients. Non-Hermitian terms are rejected.
  HamiltonianOperator(int n_sites, const std::vector<PauliTerm>& terms,
                      ModelFamily family = ModelFamily::custom,
                      std::map<std::string, double> parameters = {},
                      Boundary boundary = Boundary::open);

  int n_sites() const noexcept { return n_sites_; }
  std::size_t dim() const noexcept { return std::size_t{1} << n_sites_; }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  ModelFamily family() const noexcept { return family_; }
  Boundary boundary() const noexcept { return boundary_; }
  const std::map<std::string, double>& parameters() const noexcept { return parameters_; }
  std::string label() const;

  /// True if every term commutes with the total magnetization sum_j Z_j.
  bool conserves_magnetization() const;
  /// True when every term has an even number of Y factors (real matrix).
  bool is_real() const;

  /// Kernel dimension of the covariance matrix expected on eigenstates, when
  /// the model family fixes it (1 for Ising with boundary fields, 2 for XXZ
  /// within a magnetization sector). Empty when unknown.
  std::optional<int> expected_kernel_size() const;

  /// Dense 2^N x 2^N matrix. Throws ResourceLimitError above `max_dim` and
  /// std::domain_error for Hamiltonians that are not real in the Z basis.
  Eigen::MatrixXd dense(std::size_t max_dim = std::size_t{1} << 14) const;
  /// Dense matrix restricted to the given computational basis states, which
  /// must span an invariant subspace (checked).
  Eigen::MatrixXd dense_block(std::span<const std::uint64_t> indices,
                              std::size_t max_dim = std::size_t{1} << 14) const;
  /// <b|H|b> for every computational basis state b.
  Eigen::VectorXd diagonal() const;

  /// c_alpha = (L_alpha | H) for each basis element. Terms outside the basis
  /// are dropped (orthogonal projection).
  Eigen::VectorXd coefficient_vector(const OperatorBasis& basis) const;
  /// True if every term is a member of the basis.
  bool in_span(const OperatorBasis& basis) const;

 private:
  int n_sites_;
  std::vector<PauliTerm> terms_;
  ModelFamily family_;
  std::map<std::string, double> parameters_;
  Boundary boundary_;
};

/// h1 Z_1 + hN Z_N + sum_i Z_i Z_{i+1} + sum_i (g X_i + h Z_i). Sites are
/// 0-based in the API, so Z_1 acts on site 0. Periodic adds Z_{N-1} Z_0.
HamiltonianOperator build_ising(int n, double g, double h, double h1 = 0.25, double hN = -0.25,
                                Boundary boundary = Boundary::open);

/// h1 Z_1 + sum_i (X_i X_{i+1} + Y_i Y_{i+1} + delta Z_i Z_{i+1}).
HamiltonianOperator build_xxz(int n, double delta = 1.0, double h1 = 0.05,
                              Boundary boundary = Boundary::open);

HamiltonianOperator build_model(const HamiltonianSpec& spec);

/// Computational basis states with sum_j Z_j = m, ascending.
std::vector<std::uint64_t> magnetization_sector_indices(int n, int m);

/// Magnetization of the largest sector (0 for even n, 1 for odd n).
int largest_sector(int n);

}  // namespace ergo
