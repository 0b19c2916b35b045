#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ergo/kernels.hpp"

namespace ergo::kernels {

#ifndef ERGO_HAVE_AVX2
namespace avx2 {
// Never selected: backend_available(Backend::avx2) is false in this build.
std::complex<double> pauli_overlap(std::span<const std::complex<double>> amps,
                                   std::uint64_t x, std::uint64_t z) {
  return scalar::pauli_overlap(amps, x, z);
}
std::int64_t shadow_signed_matches(std::span<const std::uint64_t> bx,
                                   std::span<const std::uint64_t> bz,
                                   std::span<const std::uint64_t> out, std::uint64_t px,
                                   std::uint64_t pz) {
  return scalar::shadow_signed_matches(bx, bz, out, px, pz);
}
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(ERGO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("ERGO_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return Backend::scalar;
    if (want == "avx2" && cpu_has_avx2()) return Backend::avx2;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(b)));
  }
  current().store(b, std::memory_order_relaxed);
}

std::complex<double> pauli_overlap(std::span<const std::complex<double>> amps,
                                   std::uint64_t x, std::uint64_t z) {
  if (active_backend() == Backend::avx2) return avx2::pauli_overlap(amps, x, z);
  return scalar::pauli_overlap(amps, x, z);
}

std::int64_t shadow_signed_matches(std::span<const std::uint64_t> basis_x,
                                   std::span<const std::uint64_t> basis_z,
                                   std::span<const std::uint64_t> outcomes,
                                   std::uint64_t px, std::uint64_t pz) {
  if (active_backend() == Backend::avx2) {
    return avx2::shadow_signed_matches(basis_x, basis_z, outcomes, px, pz);
  }
  return scalar::shadow_signed_matches(basis_x, basis_z, outcomes, px, pz);
}

}  // namespace ergo::kernels
