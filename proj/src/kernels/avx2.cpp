// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher
// after a CPU feature check.

#include <immintrin.h>

#include <bit>

#include "ergo/kernels.hpp"

namespace ergo::kernels::avx2 {

namespace {

inline __m256d swap_halves(__m256d v) { return _mm256_permute4x64_pd(v, 0x4E); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// (x0 - x1 + x2 - x3)
inline double alternating_sum(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return (t[0] - t[1]) + (t[2] - t[3]);
}

}  // namespace

std::complex<double> pauli_overlap(std::span<const std::complex<double>> amps,
                                   std::uint64_t x, std::uint64_t z) {
  const std::uint64_t dim = amps.size();
  if (dim < 4) return scalar::pauli_overlap(amps, x, z);

  const double* v = reinterpret_cast<const double*>(amps.data());
  const std::uint64_t x_hi = x & ~std::uint64_t{3};
  const unsigned x_lo = static_cast<unsigned>(x & 3);
  const unsigned z_lo = static_cast<unsigned>(z & 3);

  // Relative signs of the four lanes b+j, j = 0..3, for b a multiple of 4.
  auto rel = [z_lo](unsigned j) { return (std::popcount(j & z_lo) & 1) ? -1.0 : 1.0; };
  const __m256d sign0 = _mm256_set_pd(rel(1), rel(1), rel(0), rel(0));
  const __m256d sign1 = _mm256_set_pd(rel(3), rel(3), rel(2), rel(2));
  const __m256d flip = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();

  __m256d acc_re0 = zero, acc_re1 = zero, acc_im0 = zero, acc_im1 = zero;
  for (std::uint64_t b = 0; b < dim; b += 4) {
    const std::uint64_t base = b ^ x_hi;
    const __m256d l0 = _mm256_loadu_pd(v + 2 * base);
    const __m256d l1 = _mm256_loadu_pd(v + 2 * (base + 2));
    __m256d a0, a1;
    switch (x_lo) {
      case 0: a0 = l0; a1 = l1; break;
      case 1: a0 = swap_halves(l0); a1 = swap_halves(l1); break;
      case 2: a0 = l1; a1 = l0; break;
      default: a0 = swap_halves(l1); a1 = swap_halves(l0); break;
    }
    const __m256d v0 = _mm256_loadu_pd(v + 2 * b);
    const __m256d v1 = _mm256_loadu_pd(v + 2 * (b + 2));

    const __m256d mask = (std::popcount(b & z) & 1) ? flip : zero;
    const __m256d s0 = _mm256_xor_pd(sign0, mask);
    const __m256d s1 = _mm256_xor_pd(sign1, mask);

    acc_re0 = _mm256_fmadd_pd(_mm256_mul_pd(a0, v0), s0, acc_re0);
    acc_re1 = _mm256_fmadd_pd(_mm256_mul_pd(a1, v1), s1, acc_re1);
    acc_im0 = _mm256_fmadd_pd(_mm256_mul_pd(a0, _mm256_permute_pd(v0, 0x5)), s0, acc_im0);
    acc_im1 = _mm256_fmadd_pd(_mm256_mul_pd(a1, _mm256_permute_pd(v1, 0x5)), s1, acc_im1);
  }
  const double re = hsum(_mm256_add_pd(acc_re0, acc_re1));
  const double im = alternating_sum(_mm256_add_pd(acc_im0, acc_im1));
  return {re, im};
}

std::int64_t shadow_signed_matches(std::span<const std::uint64_t> basis_x,
                                   std::span<const std::uint64_t> basis_z,
                                   std::span<const std::uint64_t> outcomes,
                                   std::uint64_t px, std::uint64_t pz) {
  const std::size_t n = basis_x.size();
  const std::uint64_t support = px | pz;
  const __m256i vsupp = _mm256_set1_epi64x(static_cast<long long>(support));
  const __m256i vpx = _mm256_set1_epi64x(static_cast<long long>(px));
  const __m256i vpz = _mm256_set1_epi64x(static_cast<long long>(pz));
  const __m256i one = _mm256_set1_epi64x(1);
  __m256i acc = _mm256_setzero_si256();

  std::size_t s = 0;
  for (; s + 4 <= n; s += 4) {
    const __m256i bx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(basis_x.data() + s));
    const __m256i bz = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(basis_z.data() + s));
    __m256i par = _mm256_and_si256(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(outcomes.data() + s)), vsupp);
    const __m256i match = _mm256_and_si256(
        _mm256_cmpeq_epi64(_mm256_and_si256(bx, vsupp), vpx),
        _mm256_cmpeq_epi64(_mm256_and_si256(bz, vsupp), vpz));
    par = _mm256_xor_si256(par, _mm256_srli_epi64(par, 32));
    par = _mm256_xor_si256(par, _mm256_srli_epi64(par, 16));
    par = _mm256_xor_si256(par, _mm256_srli_epi64(par, 8));
    par = _mm256_xor_si256(par, _mm256_srli_epi64(par, 4));
    par = _mm256_xor_si256(par, _mm256_srli_epi64(par, 2));
    par = _mm256_xor_si256(par, _mm256_srli_epi64(par, 1));
    par = _mm256_and_si256(par, one);
    // +1 for even parity, -1 for odd
    const __m256i val = _mm256_sub_epi64(one, _mm256_add_epi64(par, par));
    acc = _mm256_add_epi64(acc, _mm256_and_si256(match, val));
  }
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::int64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  if (s < n) {
    total += scalar::shadow_signed_matches(basis_x.subspan(s), basis_z.subspan(s),
                                           outcomes.subspan(s), px, pz);
  }
  return total;
}

}  // namespace ergo::kernels::avx2
