#pragma once

#include <Eigen/Dense>

namespace ergo {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k pairs with values[k]
};

enum class EigenBackend { lapack, eigen };

/// Backend used by eigh/eigvalsh. On first call LAPACK is checked on a fixed
/// 200 x 200 matrix; some OpenBLAS builds pick CPU kernels that return wrong
/// eigenvectors, in which case Eigen's solver is used instead and a warning
/// goes to stderr once.
EigenBackend eigen_backend();
/// Overrides the automatic choice (tests, benchmarks).
void set_eigen_backend(EigenBackend b);

/// Full eigendecomposition of a real symmetric matrix (LAPACK dsyevd or
/// Eigen). Only the upper triangle is read. Throws NumericalFailure on
/// non-convergence.
SymmetricEigen eigh(Eigen::MatrixXd a);

/// Eigenvalues only (ascending).
Eigen::VectorXd eigvalsh(Eigen::MatrixXd a);

/// max |a_ij - a_ji|
double asymmetry(const Eigen::MatrixXd& a);

}  // namespace ergo
