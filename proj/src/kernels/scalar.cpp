#include "ergo/kernels.hpp"

#include <bit>

namespace ergo::kernels::scalar {

std::complex<double> pauli_overlap(std::span<const std::complex<double>> amps,
                                   std::uint64_t x, std::uint64_t z) {
  double re = 0.0;
  double im = 0.0;
  const std::uint64_t dim = amps.size();
  for (std::uint64_t b = 0; b < dim; ++b) {
    const std::complex<double> a = amps[b ^ x];
    const std::complex<double> v = amps[b];
    const double s = (std::popcount(b & z) & 1) ? -1.0 : 1.0;
    re += s * (a.real() * v.real() + a.imag() * v.imag());
    im += s * (a.real() * v.imag() - a.imag() * v.real());
  }
  return {re, im};
}

std::int64_t shadow_signed_matches(std::span<const std::uint64_t> basis_x,
                                   std::span<const std::uint64_t> basis_z,
                                   std::span<const std::uint64_t> outcomes,
                                   std::uint64_t px, std::uint64_t pz) {
  const std::uint64_t support = px | pz;
  std::int64_t acc = 0;
  for (std::size_t s = 0; s < basis_x.size(); ++s) {
    if ((basis_x[s] & support) != px || (basis_z[s] & support) != pz) continue;
    acc += (std::popcount(outcomes[s] & support) & 1) ? -1 : 1;
  }
  return acc;
}

}  // namespace ergo::kernels::scalar
