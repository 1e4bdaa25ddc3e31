#include "hpte/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <stdexcept>
#include <string>

extern "C" void openblas_set_num_threads(int);

namespace hpte::linalg {

namespace {

// Multi-threaded LAPACK may change the last bits of an SVD with the thread
// count, and our own gate threads already use the cores.
void pin_once() {
  static const bool pinned = (openblas_set_num_threads(1), true);
  (void)pinned;
}

lapack_complex_double* lp(cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); }

void require_finite(const Matrix& a) {
  if (!a.allFinite()) throw std::runtime_error("SVD input contains non-finite values");
}

}  // namespace

Svd svd(const Matrix& a) {
  require_finite(a);
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  pin_once();
  Svd out;
  out.s.resize(k);
  if (k == 0) {
    out.u.resize(m, 0);
    out.v.resize(n, 0);
    return out;
  }
  Matrix work = a;
  Matrix u(m, k), vt(k, n);
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, lp(work.data()), m, out.s.data(),
                                   lp(u.data()), m, lp(vt.data()), k);
  if (info > 0) {
    // Divide and conquer occasionally fails to converge; QR iteration is slower but robust.
    work = a;
    Eigen::VectorXd superb(k);
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, lp(work.data()), m, out.s.data(),
                          lp(u.data()), m, lp(vt.data()), k, superb.data());
  }
  if (info != 0) throw std::runtime_error("SVD failed (LAPACK info " + std::to_string(info) + ")");
  out.u = std::move(u);
  out.v = vt.adjoint();
  return out;
}

Eigen::VectorXd singular_values(const Matrix& a) {
  require_finite(a);
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  pin_once();
  Eigen::VectorXd s(k);
  if (k == 0) return s;
  Matrix work = a;
  cplx dummy{};
  const lapack_int info =
      LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, lp(work.data()), m, s.data(), lp(&dummy), 1, lp(&dummy), 1);
  if (info != 0) throw std::runtime_error("SVD failed (LAPACK info " + std::to_string(info) + ")");
  return s;
}

HermitianEig eigh(const Matrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("eigh needs a square matrix");
  if (!h.allFinite()) throw std::runtime_error("eigh input contains non-finite values");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix expi(const Matrix& h, double t) {
  const auto e = eigh(h);
  Vector phases(e.values.size());
  for (Eigen::Index k = 0; k < e.values.size(); ++k) phases(k) = std::polar(1.0, e.values(k) * t);
  return e.vectors * phases.asDiagonal() * e.vectors.adjoint();
}

void pin_blas_threads() { openblas_set_num_threads(1); }

}  // namespace hpte::linalg
