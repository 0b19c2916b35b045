#pragma once

// Covariance matrix of a local operator basis on a state, its variance
// spectrum, and the derived metrics (variance gap, spread around 1, largest
// variance, susceptibility).

#include <Eigen/Dense>
#include <optional>
#include <random>

#include "ergo/models.hpp"
#include "ergo/pauli.hpp"

namespace ergo {

/// How variance_spectrum treats negative eigenvalues.
///  strict: values in [-1e-9, 0) are clamped to 0, anything lower throws
///          NumericalFailure (exact covariance matrices are PSD).
///  raw:    eigenvalues returned unchanged (estimated matrices, e.g. from
///          finite shot data, need not be PSD).
enum class SpectrumPolicy { strict, raw };

inline constexpr double kNegativeClamp = 1e-9;

struct VarianceSpectrum {
  Eigen::VectorXd sigma2;     // ascending
  Eigen::MatrixXd eigen_ops;  // column a = coefficients of operator O_a
  double min_raw = 0.0;       // smallest eigenvalue before clamping
};

struct MetricsRecord {
  double delta_m = 0.0;
  double d_e = 0.0;
  double sigma2_max = 0.0;
  double sigma2_0 = 0.0;
  std::size_t kernel_size = 0;
};

struct CovarianceResult {
  Eigen::MatrixXd m;
  Eigen::VectorXd sigma2;
  Eigen::MatrixXd eigen_ops;
  std::size_t kernel_size = 0;
  double tol_kernel = 0.0;
};

/// <L_alpha> for every basis element.
Eigen::VectorXd basis_expectations(const StateVector& v, const OperatorBasis& basis);

/// M_ab = 1/2 <{L_a, L_b}> - <L_a><L_b>, assembled from products L_a L_b =
/// phase * R with the expectation of each distinct R computed once.
Eigen::MatrixXd covariance_matrix(const StateVector& v, const OperatorBasis& basis);

/// Eigen-decomposition of M. Throws std::invalid_argument when M is not
/// symmetric within 1e-10 (relative to its largest entry).
VarianceSpectrum variance_spectrum(const Eigen::MatrixXd& m,
                                   SpectrumPolicy policy = SpectrumPolicy::strict);

/// max(1e-8 * sigma2_max, 1e-10)
double default_kernel_tolerance(const Eigen::VectorXd& sigma2);

std::size_t kernel_size(const Eigen::VectorXd& sigma2, double tol_kernel);

/// delta_m = sigma2[K] - sigma2[0]; d_e = rms of (sigma2[a] - 1) over a >= K;
/// sigma2_max = last entry. Throws DegenerateSpectrumError when K == size.
MetricsRecord metrics(const Eigen::VectorXd& sigma2, std::size_t kernel);

/// Covariance, spectrum and kernel in one call. `kernel_override` replaces
/// the tolerance-based kernel count (used for prepared, non-eigen states).
CovarianceResult analyze_state(const StateVector& v, const OperatorBasis& basis,
                               std::optional<std::size_t> kernel_override = std::nullopt,
                               SpectrumPolicy policy = SpectrumPolicy::strict);

/// Norm of the projection of c / |c| onto the span of the first `kernel`
/// eigen-operators.
double kernel_overlap(const Eigen::MatrixXd& eigen_ops, std::size_t kernel,
                      const Eigen::VectorXd& c);

enum class ChiMode { max, min };

/// sqrt(chi_H): 1 / sigma2[K] (max mode) or 1 / sigma2_max (min mode).
/// Returns +inf when the selected variance is 0.
double susceptibility_chi(const Eigen::VectorXd& sigma2, std::size_t kernel, ChiMode mode);

/// First-order change of eigen-operator `target` under M -> M + eps * dm:
/// sum_{a not in kernel, a != target} (o_a . dm o_t) / (s_t - s_a) o_a.
Eigen::VectorXd first_order_response(const VarianceSpectrum& spec, std::size_t kernel,
                                     const Eigen::MatrixXd& dm, std::size_t target = 0);

/// chi_H = |first_order_response|^2.
double susceptibility_general(const VarianceSpectrum& spec, std::size_t kernel,
                              const Eigen::MatrixXd& dm, std::size_t target = 0);

/// Purity of the reduced state on sites [start, start + length) from the
/// diagonal of M. The basis must contain every non-identity string on the
/// window; throws std::invalid_argument otherwise.
double purity_from_m(const Eigen::MatrixXd& m, const OperatorBasis& basis, int start, int length);

/// sum_alpha (L_alpha | H^k)^2 / (H^k | H^k) with (A|B) = Tr(A^T B) / 2^N,
/// using a dense H^k.
double hk_overlap(const OperatorBasis& basis, const HamiltonianOperator& h, int k = 2);

/// (P | A) for a Pauli string P and a real matrix A on the full register.
double pauli_overlap_dense(const PauliString& p, const Eigen::MatrixXd& a, int n_sites);

/// Normalized standard complex Gaussian amplitudes.
StateVector sample_haar_state(int n_sites, std::mt19937_64& rng);

}  // namespace ergo
