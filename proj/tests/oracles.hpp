#pragma once

// Dense reference implementations used only by tests: Kronecker-product Pauli
// matrices, dense expectation values and covariances, partial traces.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "ergo/models.hpp"
#include "ergo/pauli.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat pauli2(char c) {
  Mat m(2, 2);
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
  }
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// letters[j] acts on site j; site 0 is the leftmost Kronecker factor.
inline Mat dense(const std::string& letters) {
  Mat m = Mat::Identity(1, 1);
  for (char c : letters) m = kron(m, pauli2(c));
  return m;
}

inline std::string letters(const ergo::PauliString& p, int n) {
  std::string s(static_cast<std::size_t>(n), 'I');
  for (const auto& [site, axis] : p.support()) s[static_cast<std::size_t>(site)] = ergo::axis_char(axis);
  return s;
}

inline Mat dense(const ergo::PauliString& p, int n) {
  static const cplx phases[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
  return phases[p.phase()] * dense(letters(p, n));
}

inline Mat dense(const ergo::HamiltonianOperator& h) {
  const auto d = static_cast<Eigen::Index>(h.dim());
  Mat m = Mat::Zero(d, d);
  for (const auto& t : h.terms()) m += t.coefficient * dense(t.op, h.n_sites());
  return m;
}

inline Vec vec(const ergo::StateVector& v) {
  Vec out(static_cast<Eigen::Index>(v.dim()));
  for (std::size_t i = 0; i < v.dim(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline cplx expect(const Mat& a, const Vec& v) { return v.dot(a * v); }

/// M_ab = Re <{A,B}>/2 - <A><B> from dense matrices.
inline Eigen::MatrixXd covariance(const std::vector<Mat>& ops, const Vec& v) {
  const auto n = static_cast<Eigen::Index>(ops.size());
  std::vector<Vec> av(ops.size());
  Eigen::VectorXd mean(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    av[a] = ops[a] * v;
    mean[a] = v.dot(av[a]).real();
  }
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) m(a, b) = av[a].dot(av[b]).real() - mean[a] * mean[b];
  return m;
}

/// Reduced density matrix of sites [start, start + len) by explicit summation.
inline Mat reduced_density(const Vec& v, int n, int start, int len) {
  const int right = n - start - len;
  const Eigen::Index dl = Eigen::Index{1} << start, dw = Eigen::Index{1} << len, dr = Eigen::Index{1} << right;
  Mat rho = Mat::Zero(dw, dw);
  for (Eigen::Index l = 0; l < dl; ++l)
    for (Eigen::Index r = 0; r < dr; ++r)
      for (Eigen::Index i = 0; i < dw; ++i)
        for (Eigen::Index j = 0; j < dw; ++j)
          rho(i, j) += v[(l * dw + i) * dr + r] * std::conj(v[(l * dw + j) * dr + r]);
  return rho;
}

inline double purity(const Vec& v, int n, int start, int len) {
  const Mat rho = reduced_density(v, n, start, len);
  return (rho * rho).trace().real();
}

inline double entropy(const Vec& v, int n, int cut) {
  const Mat rho = reduced_density(v, n, 0, cut);
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()[i];
    if (p > 1e-15) s -= p * std::log(p);
  }
  return s;
}

inline Vec random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(g(rng), g(rng));
  return v.normalized();
}

inline ergo::StateVector to_state(const Vec& v, int n) {
  return ergo::StateVector(n, std::vector<cplx>(v.data(), v.data() + v.size()));
}

}  // namespace oracle
