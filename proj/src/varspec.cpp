#include "ergo/varspec.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "ergo/errors.hpp"
#include "ergo/kernels.hpp"
#include "ergo/linalg.hpp"

namespace ergo {

namespace {

// Expectations of phase-free Pauli strings, memoized by mask pair.
class ExpectationCache {
 public:
  explicit ExpectationCache(const StateVector& v) : v_(v) {}

  double get(std::uint64_t x, std::uint64_t z) {
    const auto key = std::pair{x, z};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double e = expectation(PauliString::from_masks(x, z), v_);
    cache_.emplace(key, e);
    return e;
  }

 private:
  struct Hash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
      return PauliStringHash{}(PauliString::from_masks(k.first, k.second));
    }
  };
  const StateVector& v_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, double, Hash> cache_;
};

}  // namespace

Eigen::VectorXd basis_expectations(const StateVector& v, const OperatorBasis& basis) {
  if (basis.n_sites() != v.n_sites()) throw std::invalid_argument("basis/state size mismatch");
  Eigen::VectorXd e(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t a = 0; a < basis.size(); ++a) e[static_cast<Eigen::Index>(a)] = expectation(basis[a], v);
  return e;
}

Eigen::MatrixXd covariance_matrix(const StateVector& v, const OperatorBasis& basis) {
  if (basis.n_sites() != v.n_sites()) throw std::invalid_argument("basis/state size mismatch");
  const auto n = static_cast<Eigen::Index>(basis.size());
  ExpectationCache cache(v);
  Eigen::VectorXd mean(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    mean[a] = cache.get(basis[a].x_mask(), basis[a].z_mask());
  }
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    m(a, a) = 1.0 - mean[a] * mean[a];
    for (Eigen::Index b = a + 1; b < n; ++b) {
      double sym = 0.0;
      if (commutes(basis[a], basis[b])) {
        const PauliString r = pauli_product(basis[a], basis[b]);
        // Commuting Hermitian strings multiply to +-R with R Hermitian.
        const double sign = r.phase() == 0 ? 1.0 : -1.0;
        sym = sign * cache.get(r.x_mask(), r.z_mask());
      }
      m(a, b) = m(b, a) = sym - mean[a] * mean[b];
    }
  }
  return m;
}

VarianceSpectrum variance_spectrum(const Eigen::MatrixXd& m, SpectrumPolicy policy) {
  if (m.rows() != m.cols()) throw std::invalid_argument("variance_spectrum: M not square");
  const double scale = m.size() ? std::max(1.0, m.cwiseAbs().maxCoeff()) : 1.0;
  if (asymmetry(m) > 1e-10 * scale) {
    throw std::invalid_argument("variance_spectrum: M not symmetric");
  }
  SymmetricEigen e = eigh(m);
  VarianceSpectrum out;
  out.min_raw = e.values.size() ? e.values[0] : 0.0;
  if (policy == SpectrumPolicy::strict) {
    for (Eigen::Index a = 0; a < e.values.size(); ++a) {
      if (e.values[a] < -kNegativeClamp) {
        throw NumericalFailure("covariance matrix has eigenvalue " + std::to_string(e.values[a]) +
                               " below -1e-9");
      }
      if (e.values[a] < 0.0) e.values[a] = 0.0;
    }
  }
  out.sigma2 = std::move(e.values);
  out.eigen_ops = std::move(e.vectors);
  return out;
}

double default_kernel_tolerance(const Eigen::VectorXd& sigma2) {
  const double smax = sigma2.size() ? sigma2[sigma2.size() - 1] : 0.0;
  return std::max(1e-8 * smax, 1e-10);
}

std::size_t kernel_size(const Eigen::VectorXd& sigma2, double tol_kernel) {
  std::size_t k = 0;
  for (Eigen::Index a = 0; a < sigma2.size(); ++a) {
    if (sigma2[a] < tol_kernel) ++k;
  }
  return k;
}

MetricsRecord metrics(const Eigen::VectorXd& sigma2, std::size_t kernel) {
  const auto n = static_cast<std::size_t>(sigma2.size());
  if (kernel >= n) {
    throw DegenerateSpectrumError("variance spectrum has no entries outside the kernel");
  }
  MetricsRecord r;
  r.kernel_size = kernel;
  r.sigma2_0 = sigma2[0];
  r.delta_m = sigma2[static_cast<Eigen::Index>(kernel)] - sigma2[0];
  r.sigma2_max = sigma2[sigma2.size() - 1];
  double ss = 0.0;
  for (std::size_t a = kernel; a < n; ++a) {
    const double d = sigma2[static_cast<Eigen::Index>(a)] - 1.0;
    ss += d * d;
  }
  r.d_e = std::sqrt(ss / static_cast<double>(n - kernel));
  return r;
}

CovarianceResult analyze_state(const StateVector& v, const OperatorBasis& basis,
                               std::optional<std::size_t> kernel_override, SpectrumPolicy policy) {
  CovarianceResult r;
  r.m = covariance_matrix(v, basis);
  VarianceSpectrum s = variance_spectrum(r.m, policy);
  r.sigma2 = std::move(s.sigma2);
  r.eigen_ops = std::move(s.eigen_ops);
  r.tol_kernel = default_kernel_tolerance(r.sigma2);
  r.kernel_size = kernel_override ? *kernel_override : kernel_size(r.sigma2, r.tol_kernel);
  return r;
}

double kernel_overlap(const Eigen::MatrixXd& eigen_ops, std::size_t kernel,
                      const Eigen::VectorXd& c) {
  if (c.size() != eigen_ops.rows()) throw std::invalid_argument("kernel_overlap: size mismatch");
  const double norm = c.norm();
  if (norm == 0.0) throw std::invalid_argument("kernel_overlap: zero coefficient vector");
  if (kernel == 0) return 0.0;
  const auto k = static_cast<Eigen::Index>(kernel);
  return (eigen_ops.leftCols(k).transpose() * (c / norm)).norm();
}

double susceptibility_chi(const Eigen::VectorXd& sigma2, std::size_t kernel, ChiMode mode) {
  if (kernel < 1) throw std::invalid_argument("susceptibility_chi: kernel must be non-empty");
  if (kernel >= static_cast<std::size_t>(sigma2.size())) {
    throw DegenerateSpectrumError("susceptibility_chi: no variance outside the kernel");
  }
  const double s = mode == ChiMode::max ? sigma2[static_cast<Eigen::Index>(kernel)]
                                        : sigma2[sigma2.size() - 1];
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / s;
}

Eigen::VectorXd first_order_response(const VarianceSpectrum& spec, std::size_t kernel,
                                     const Eigen::MatrixXd& dm, std::size_t target) {
  const Eigen::Index n = spec.sigma2.size();
  if (dm.rows() != n || dm.cols() != n) throw std::invalid_argument("first_order_response: size");
  if (static_cast<Eigen::Index>(target) >= n) throw std::out_of_range("first_order_response: target");
  const Eigen::VectorXd ot = spec.eigen_ops.col(static_cast<Eigen::Index>(target));
  const Eigen::VectorXd coupling = spec.eigen_ops.transpose() * (dm * ot);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const double st = spec.sigma2[static_cast<Eigen::Index>(target)];
  for (Eigen::Index a = static_cast<Eigen::Index>(kernel); a < n; ++a) {
    if (a == static_cast<Eigen::Index>(target)) continue;
    out += coupling[a] / (st - spec.sigma2[a]) * spec.eigen_ops.col(a);
  }
  return out;
}

double susceptibility_general(const VarianceSpectrum& spec, std::size_t kernel,
                              const Eigen::MatrixXd& dm, std::size_t target) {
  return first_order_response(spec, kernel, dm, target).squaredNorm();
}

double purity_from_m(const Eigen::MatrixXd& m, const OperatorBasis& basis, int start, int length) {
  const int n = basis.n_sites();
  if (length < 1 || start < 0 || start + length > n) {
    throw std::invalid_argument("purity_from_m: window outside chain");
  }
  if (m.rows() != static_cast<Eigen::Index>(basis.size()) || m.cols() != m.rows()) {
    throw std::invalid_argument("purity_from_m: M does not match basis");
  }
  const std::uint64_t window = ((std::uint64_t{1} << length) - 1) << start;
  double trace = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < basis.size(); ++a) {
    if ((basis[a].support_mask() & ~window) == 0) {
      trace += m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a));
      ++count;
    }
  }
  const std::size_t need = (std::size_t{1} << (2 * length)) - 1;
  if (count != need) {
    throw std::invalid_argument("purity_from_m: basis holds " + std::to_string(count) + " of the " +
                                std::to_string(need) + " strings on the window");
  }
  return std::ldexp(1.0, length) - std::ldexp(trace, -length);
}

double pauli_overlap_dense(const PauliString& p, const Eigen::MatrixXd& a, int n_sites) {
  const auto [x, z] = amplitude_masks(p, n_sites);
  const std::uint64_t d = std::uint64_t{1} << n_sites;
  if (static_cast<std::uint64_t>(a.rows()) != d || a.cols() != a.rows()) {
    throw std::invalid_argument("pauli_overlap_dense: matrix size");
  }
  // P|c> = i^{p+y} (-1)^{z.c} |c^x>, so Tr(P A) = sum_c i^{p+y} (-1)^{z.c} A(c, c^x).
  const int e = (p.phase() + std::popcount(x & z)) & 3;
  if (e & 1) return 0.0;  // imaginary antisymmetric P against a real matrix (or imaginary phase)
  double acc = 0.0;
  for (std::uint64_t c = 0; c < d; ++c) {
    const double v = a(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c ^ x));
    acc += (std::popcount(z & c) & 1) ? -v : v;
  }
  if (e == 2) acc = -acc;
  return acc / static_cast<double>(d);
}

double hk_overlap(const OperatorBasis& basis, const HamiltonianOperator& h, int k) {
  if (k < 1) throw std::invalid_argument("hk_overlap: k must be >= 1");
  if (basis.n_sites() != h.n_sites()) throw std::invalid_argument("hk_overlap: size mismatch");
  const Eigen::MatrixXd hd = h.dense();
  Eigen::MatrixXd hk = hd;
  for (int i = 1; i < k; ++i) hk = (hd * hk).eval();
  const double d = static_cast<double>(hd.rows());
  const double norm2 = hk.squaredNorm() / d;
  if (norm2 == 0.0) throw std::invalid_argument("hk_overlap: H^k vanishes");
  double acc = 0.0;
  for (const auto& l : basis.elements()) {
    const double o = pauli_overlap_dense(l, hk, h.n_sites());
    acc += o * o;
  }
  return acc / norm2;
}

StateVector sample_haar_state(int n_sites, std::mt19937_64& rng) {
  if (n_sites < 1 || n_sites > 30) throw std::invalid_argument("sample_haar_state: bad n_sites");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> amps(std::size_t{1} << n_sites);
  for (auto& a : amps) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    a = {re, im};
  }
  return StateVector::normalized(n_sites, std::move(amps));
}

}  // namespace ergo
