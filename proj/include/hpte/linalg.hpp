#pragma once

// Thin LAPACK wrappers used by the tensor and oracle code.

#include "hpte/spin_algebra.hpp"

namespace hpte::linalg {

/// Thin SVD A = U diag(s) V^dagger with s descending. Throws
/// std::runtime_error if the input is non-finite or LAPACK fails.
struct Svd {
  Matrix u;
  Eigen::VectorXd s;
  Matrix v;
};

Svd svd(const Matrix& a);

/// Singular values only, descending.
Eigen::VectorXd singular_values(const Matrix& a);

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
struct HermitianEig {
  Eigen::VectorXd values;
  Matrix vectors;
};

HermitianEig eigh(const Matrix& h);

/// exp(i * h * t) for Hermitian h.
Matrix expi(const Matrix& h, double t);

/// Pins the BLAS backend to one thread so results do not depend on it.
void pin_blas_threads();

}  // namespace hpte::linalg
