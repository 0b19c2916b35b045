#pragma once

// Data-parallel inner loops. Every kernel has a portable scalar reference
// implementation; wider variants are compiled separately and chosen at
// runtime from the CPU feature set. All variants must agree with the scalar
// reference (bit-exact for integer kernels, to rounding for floating point).

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>

namespace ergo::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

/// True when the running CPU and the build both support `b`.
bool backend_available(Backend b);

/// Backend used by the dispatching entry points. Defaults to the widest
/// available one; the ERGO_KERNELS environment variable ("scalar"/"avx2")
/// overrides the initial choice.
Backend active_backend();

/// Forces a backend. Throws std::invalid_argument if it is unavailable.
void set_backend(Backend b);

/// sum_b conj(v[b ^ x]) * v[b] * (-1)^{popcount(b & z)}
///
/// This is <v| X^x Z^z |v> with x and z given as masks over amplitude
/// index bits. `amps.size()` must be a power of two and x < amps.size().
std::complex<double> pauli_overlap(std::span<const std::complex<double>> amps,
                                   std::uint64_t x, std::uint64_t z);

/// Signed count over shot records: for every shot whose basis masks agree
/// with (px, pz) on the support `px | pz`, add (-1)^{popcount(outcome & support)}.
/// All spans must have equal length.
std::int64_t shadow_signed_matches(std::span<const std::uint64_t> basis_x,
                                   std::span<const std::uint64_t> basis_z,
                                   std::span<const std::uint64_t> outcomes,
                                   std::uint64_t px, std::uint64_t pz);

namespace scalar {
std::complex<double> pauli_overlap(std::span<const std::complex<double>> amps,
                                   std::uint64_t x, std::uint64_t z);
std::int64_t shadow_signed_matches(std::span<const std::uint64_t> basis_x,
                                   std::span<const std::uint64_t> basis_z,
                                   std::span<const std::uint64_t> outcomes,
                                   std::uint64_t px, std::uint64_t pz);
}  // namespace scalar

namespace avx2 {
std::complex<double> pauli_overlap(std::span<const std::complex<double>> amps,
                                   std::uint64_t x, std::uint64_t z);
std::int64_t shadow_signed_matches(std::span<const std::uint64_t> basis_x,
                                   std::span<const std::uint64_t> basis_z,
                                   std::span<const std::uint64_t> outcomes,
                                   std::uint64_t px, std::uint64_t pz);
}  // namespace avx2

}  // namespace ergo::kernels
