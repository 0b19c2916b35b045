#pragma once

// Periodic transverse-field Ising chain H = sum_j Z_j Z_{j+1} + g sum_j X_j
// solved as free fermions (Jordan-Wigner along X, X_j = 1 - 2 n_j), plus
// Gaussian-state correlations for fermion-bilinear covariance matrices.
//
// Majoranas per site: a_j = c_j + c_j^dag, b_j = -i (c_j - c_j^dag), with
// Z_j = K_j a_j, Y_j = -K_j b_j, K_j = prod_{l<j} X_l. The wrap bond picks up
// the fermion parity, so each parity sector has its own momentum grid:
//   periodic      k = 2 pi n / N          (odd fermion parity is physical)
//   antiperiodic  k = 2 pi (n + 1/2) / N  (even fermion parity is physical)

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace ergo {

enum class FermionSector { periodic, antiperiodic };

struct BdGModel {
  int n_sites = 0;
  double g = 0.0;
  FermionSector sector = FermionSector::periodic;
  /// Momenta in ascending order within (-pi, pi].
  std::vector<double> momenta;
  /// epsilon(k) = 2 sqrt(1 + g^2 - 2 g cos k) >= 0.
  std::vector<double> epsilon;
  /// Nambu blocks in the basis (c_k, c_{-k}^dag); H = sum_k Psi^dag H(k) Psi.
  std::vector<Eigen::Matrix2cd> blocks;
  /// H(k) = U(k) diag(eps/2, -eps/2) U(k)^dag, (gamma_k, gamma_{-k}^dag) = U^dag Psi_k.
  std::vector<Eigen::Matrix2cd> rotations;

  std::size_t size() const noexcept { return momenta.size(); }
  /// Index of -k.
  std::size_t partner(std::size_t i) const;
  /// Index of the momentum shifted by m grid steps (periodic wrap).
  std::size_t shift(std::size_t i, int m) const;
  double epsilon_max() const;
  /// Number of self-paired momenta (k = -k) whose quasiparticle is a hole
  /// (gamma_k = c_k^dag up to phase); these flip the parity bookkeeping.
  int hole_modes() const;
};

/// Requires even n >= 2.
BdGModel solve_tfim_periodic(int n, double g, FermionSector sector = FermionSector::periodic);

struct FermionGaussianState {
  BdGModel model;
  std::vector<std::uint8_t> occupations;  // gamma occupations, one per momentum

  double energy() const;  // sum_k eps(k) (n_k - 1/2)
  /// Occupation parity matches the spin-chain constraint of the sector.
  bool is_physical() const;
};

/// State from a 0/1 list; throws on a size mismatch.
FermionGaussianState make_state(const BdGModel& model, std::vector<std::uint8_t> occupations);
/// Fills the modes with |n| <= n_max in the momentum-integer labelling of
/// the periodic grid (2 n_max + 1 modes); for the antiperiodic grid fills the
/// 2 n_max + 2 modes closest to k = 0.
FermionGaussianState consecutive_filling(const BdGModel& model, int n_max);
FermionGaussianState random_occupations(const BdGModel& model, std::mt19937_64& rng);

/// Energies of all (physical_only: only parity-allowed) occupation lists.
/// Requires n_sites <= 20.
std::vector<double> many_body_energies(const BdGModel& model, bool physical_only = true);

/// (1/4) sum_k eps^2(k) [n_k (1 - n_{k+q}) + n_k (1 - n_{k-q})] with
/// q = 2 pi m / N, to leading order in q.
double cosine_variance_unnormalized(const FermionGaussianState& state, int m);
/// Normalized by the eigenstate average (1/8) sum_k eps^2(k). m != 0 (mod N).
double cosine_variance(const FermionGaussianState& state, int m);

struct QPoint {
  int m;
  double q;
  double sigma2;
};
std::vector<QPoint> gap_vs_q_curve(const FermionGaussianState& state, const std::vector<int>& ms);

/// Number of momenta k where n_k != n_{k+q0}.
int fermi_surface_count(const FermionGaussianState& state);
/// (2 eps_max^2 / Z) N_FS with Z = sum_k eps^2(k).
double fermi_surface_bound(const FermionGaussianState& state);

enum class AnticoncentrationMode { exact, stirling };

/// p(eps) = z (1 - eps) / (2 eps_max^2), z = sum_k eps^2(k) / N.
double fermi_surface_density(const BdGModel& model, double eps);
/// Exact: 2 C(N, N_FS) / 2^N with N_FS = p N rounded to the nearest even
/// integer. Stirling: 2 d^{S_b(p) - 1} / sqrt(2 pi p (1 - p) N), d = 2^N.
/// Throws std::domain_error unless 0 < p < 1.
double anticoncentration_from_density(int n, double p, AnticoncentrationMode mode);
double anticoncentration_count(int n, int n_fs);  // 2 C(N, N_FS) / 2^N
double anticoncentration_bound(const BdGModel& model, double eps, AnticoncentrationMode mode);
double binary_entropy(double p);  // base 2

/// Majorana two-point function G_{mu nu} = <gamma_mu gamma_nu>, ordering
/// (a_0, b_0, a_1, b_1, ...).
Eigen::MatrixXcd majorana_correlations(const FermionGaussianState& state);

/// Per-site fermion-bilinear basis, index 5 j + t with bond partner j+1 mod N:
///   t=0: -i a_j b_j (X_j)          t=1: -i b_j a_{j+1} (Z_j Z_{j+1})
///   t=2:  i b_j b_{j+1} (Z_j Y_{j+1})  t=3: -i a_j a_{j+1} (Y_j Z_{j+1})
///   t=4:  i a_j b_{j+1} (Y_j Y_{j+1})
/// The spin string in brackets equals the bilinear exactly on open bonds and
/// up to the sign -P (P = fermion parity) on the wrap bond.
struct MajoranaBilinear {
  int sign;  // operator = sign * i gamma_mu gamma_nu
  int mu, nu;
};
std::vector<MajoranaBilinear> fermion_bilinear_basis(int n_sites);

/// Covariance matrix of the 5N bilinears on a Gaussian state via Wick's
/// theorem: M = s_a s_b Re(G_mr G_ns - G_ms G_nr).
Eigen::MatrixXd ff_covariance_matrix(const FermionGaussianState& state);

struct SinusoidFit {
  double q = 0.0;
  int m = 0;
  double amplitude = 0.0;
  double residual = 0.0;  // 1 - explained fraction of sum of squares
};

/// Best single-momentum fit y_j ~ A cos(q j) + B sin(q j) over q = 2 pi m / N,
/// m = 0..N/2, by least squares at each m. Throws std::domain_error on a zero
/// vector.
SinusoidFit fit_sinusoid(const Eigen::VectorXd& y);

/// Same with a common q for several equal-length channels (columns).
SinusoidFit fit_sinusoid_channels(const Eigen::MatrixXd& channels);

}  // namespace ergo
