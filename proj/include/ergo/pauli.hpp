#pragma once

// Pauli strings, geometrically local operator bases, and statevectors.
//
// Conventions used throughout the library:
//  * Sites are 0-based, 0 = leftmost site of the chain.
//  * A PauliString stores two masks over *site* bits (bit j <-> site j):
//    (x_j, z_j) = (1,0) X, (1,1) Y, (0,1) Z, (0,0) identity, together with a
//    global phase i^phase. The operator is i^phase * prod_j sigma_j.
//  * Statevector amplitudes are indexed big-endian: site j is amplitude bit
//    (n-1-j), so |b_0 b_1 ... b_{n-1}> reads left to right as a binary number.
//    Z_j|b> = (1 - 2 b_j)|b>, i.e. bit value 0 is the +1 eigenstate of Z.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ergo {

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };
enum class Boundary { open, periodic };

char axis_char(Axis a);
std::string_view boundary_name(Boundary b);
Boundary parse_boundary(std::string_view s);

inline constexpr int kMaxSites = 62;

class PauliString {
 public:
  PauliString() = default;  // identity, phase +1

  static PauliString from_masks(std::uint64_t x, std::uint64_t z, int phase = 0);
  static PauliString single(int site, Axis axis);
  /// Sites must be strictly increasing.
  static PauliString from_support(std::span<const std::pair<int, Axis>> support,
                                  int phase = 0);
  /// Parses labels such as "X0 Z3", "-Y2", "i X0 X1" or "I" (identity).
  static PauliString parse(std::string_view label);

  std::uint64_t x_mask() const noexcept { return x_; }
  std::uint64_t z_mask() const noexcept { return z_; }
  std::uint64_t support_mask() const noexcept { return x_ | z_; }
  /// Exponent p of the global phase i^p, in [0, 4).
  int phase() const noexcept { return phase_; }

  std::vector<std::pair<int, Axis>> support() const;
  int weight() const noexcept;
  bool is_identity() const noexcept { return (x_ | z_) == 0; }
  bool is_hermitian() const noexcept { return (phase_ & 1) == 0; }
  /// Highest site index in the support, -1 for the identity.
  int max_site() const noexcept;
  /// Same string with phase +1.
  PauliString stripped() const noexcept { return from_masks(x_, z_, 0); }
  PauliString with_phase(int phase) const { return from_masks(x_, z_, phase); }

  std::string to_string() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  std::uint8_t phase_ = 0;
};

/// Exact matrix product a*b, phase tracked modulo 4.
PauliString pauli_product(const PauliString& a, const PauliString& b);

bool commutes(const PauliString& a, const PauliString& b) noexcept;

/// P|b> = factor |target> for computational basis index b on n sites.
struct PauliAction {
  std::uint64_t target;
  std::complex<double> factor;
};
PauliAction pauli_action(const PauliString& p, int n_sites, std::uint64_t b);

/// Site masks of p converted to amplitude-index masks for an n-site register.
std::pair<std::uint64_t, std::uint64_t> amplitude_masks(const PauliString& p, int n_sites);

struct PauliStringHash {
  std::size_t operator()(const PauliString& p) const noexcept;
};

class StateVector {
 public:
  /// Requires amps.size() == 2^n_sites and unit norm within 1e-12.
  StateVector(int n_sites, std::vector<std::complex<double>> amps);

  /// Rescales amps to unit norm. Throws on a zero vector.
  static StateVector normalized(int n_sites, std::vector<std::complex<double>> amps);
  static StateVector basis_state(int n_sites, std::uint64_t index);
  static StateVector from_real(int n_sites, std::span<const double> amps);

  int n_sites() const noexcept { return n_sites_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const std::complex<double>> amplitudes() const noexcept { return amps_; }
  std::complex<double> operator[](std::size_t i) const { return amps_[i]; }

 private:
  int n_sites_ = 0;
  std::vector<std::complex<double>> amps_;
};

class OperatorBasis {
 public:
  /// Validates: Hermitian phase +1, no identity, pairwise distinct, sites < n.
  OperatorBasis(int n_sites, std::vector<PauliString> elements, int locality = 0,
                Boundary boundary = Boundary::open);

  int n_sites() const noexcept { return n_sites_; }
  int locality() const noexcept { return locality_; }
  Boundary boundary() const noexcept { return boundary_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::vector<PauliString>& elements() const noexcept { return elements_; }
  const PauliString& operator[](std::size_t i) const { return elements_[i]; }
  std::optional<std::size_t> index_of(const PauliString& p) const;

 private:
  int n_sites_;
  int locality_;
  Boundary boundary_;
  std::vector<PauliString> elements_;
  std::unordered_map<PauliString, std::size_t, PauliStringHash> index_;
};

/// All geometrically `locality`-local Pauli strings, identity excluded.
///
/// Ordering: blocks of increasing window length w = 1..locality; within a
/// block by left site, then lexicographically over the axes of the window
/// read left to right (X < Y < Z, interior sites may also be I < X). For
/// locality 2 this is single-site strings by site then axis, followed by
/// nearest-neighbour pairs by left site then axis pair (XX, XY, ..., ZZ).
OperatorBasis generate_local_basis(int n_sites, int locality, Boundary boundary);

/// <v|p|v> for Hermitian p (phase +-1). Throws std::invalid_argument for a
/// non-Hermitian phase or a support outside the register.
double expectation(const PauliString& p, const StateVector& v);

/// <v|p|v> for any phase.
std::complex<double> expectation_complex(const PauliString& p, const StateVector& v);

}  // namespace ergo
