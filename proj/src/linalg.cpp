#include "ergo/linalg.hpp"

#include <lapacke.h>

#include <atomic>
#include <cmath>
#include <iostream>
#include <mutex>
#include <string>

#include "ergo/errors.hpp"

namespace ergo {

namespace {

Eigen::VectorXd run_dsyevd(Eigen::MatrixXd& a, char jobz) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, jobz, 'U', n, a.data(), n, w.data());
  if (info != 0) {
    throw NumericalFailure("dsyevd failed with info=" + std::to_string(info));
  }
  return w;
}

bool lapack_self_check() {
  const Eigen::Index n = 200;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = std::sin(0.37 * static_cast<double>(i * n + j) + 1.0);
  Eigen::MatrixXd v = a;
  try {
    const Eigen::VectorXd w = run_dsyevd(v, 'V');
    const double resid = (a * v - v * w.asDiagonal()).norm();
    const double orth = (v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).norm();
    return std::isfinite(resid) && resid < 1e-8 * a.norm() && orth < 1e-8;
  } catch (const NumericalFailure&) {
    return false;
  }
}

std::atomic<int> g_backend{-1};
std::once_flag g_check;

EigenBackend resolve_backend() {
  std::call_once(g_check, [] {
    if (g_backend.load() >= 0) return;
    const bool ok = lapack_self_check();
    if (!ok) {
      std::cerr << "warning: LAPACK dsyevd failed its self-check; using Eigen's eigensolver (slower). "
                   "With OpenBLAS, setting OPENBLAS_CORETYPE=Haswell usually avoids this.\n";
    }
    int expected = -1;
    g_backend.compare_exchange_strong(expected, static_cast<int>(ok ? EigenBackend::lapack : EigenBackend::eigen));
  });
  return static_cast<EigenBackend>(g_backend.load());
}

}  // namespace

EigenBackend eigen_backend() { return resolve_backend(); }

void set_eigen_backend(EigenBackend b) { g_backend.store(static_cast<int>(b)); }

SymmetricEigen eigh(Eigen::MatrixXd a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigh: matrix not square");
  if (resolve_backend() == EigenBackend::eigen) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.selfadjointView<Eigen::Upper>());
    if (es.info() != Eigen::Success) throw NumericalFailure("eigen solver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
  }
  Eigen::VectorXd w = run_dsyevd(a, 'V');
  return {std::move(w), std::move(a)};
}

Eigen::VectorXd eigvalsh(Eigen::MatrixXd a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigvalsh: matrix not square");
  if (resolve_backend() == EigenBackend::eigen) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.selfadjointView<Eigen::Upper>(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigen solver did not converge");
    return es.eigenvalues();
  }
  return run_dsyevd(a, 'N');
}

double asymmetry(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace ergo
