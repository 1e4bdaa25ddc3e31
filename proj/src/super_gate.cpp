#include "hpte/super_gate.hpp"

#include "hpte/linalg.hpp"

#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace hpte {

TwoSiteSuperGate::TwoSiteSuperGate(const BondHamiltonian& source, double tau)
    : kind_(source.kind), tau_(tau), source_(source) {
  if (!std::isfinite(tau)) throw std::invalid_argument("gate time step must be finite");
  const int d = local_dim(kind_);
  const int D = d * d;
  const Matrix u = linalg::expi(source.matrix, tau);
  matrix_.resize(D * D, D * D);
  // (U X U^dagger)[r, c] = sum U[r, r'] X[r', c'] conj(U[c, c']), with r = (s1, s2), c = (s1', s2').
  for (int s1 = 0; s1 < d; ++s1)
    for (int s1p = 0; s1p < d; ++s1p)
      for (int s2 = 0; s2 < d; ++s2)
        for (int s2p = 0; s2p < d; ++s2p) {
          const int row = (s1 * d + s1p) * D + (s2 * d + s2p);
          for (int t1 = 0; t1 < d; ++t1)
            for (int t1p = 0; t1p < d; ++t1p)
              for (int t2 = 0; t2 < d; ++t2)
                for (int t2p = 0; t2p < d; ++t2p) {
                  const int col = (t1 * d + t1p) * D + (t2 * d + t2p);
                  matrix_(row, col) = u(s1 * d + s2, t1 * d + t2) * std::conj(u(s1p * d + s2p, t1p * d + t2p));
                }
        }
  build_blockings();
}

TwoSiteSuperGate::TwoSiteSuperGate(SpinKind kind, Matrix bond_matrix) : kind_(kind), matrix_(std::move(bond_matrix)) {
  const int D = local_dim(kind) * local_dim(kind);
  if (matrix_.rows() != D * D || matrix_.cols() != D * D) throw std::invalid_argument("gate matrix has wrong shape");
  build_blockings();
}

TwoSiteSuperGate TwoSiteSuperGate::identity(SpinKind kind) {
  const int D = local_dim(kind) * local_dim(kind);
  return TwoSiteSuperGate(kind, Matrix::Identity(D * D, D * D));
}

Matrix TwoSiteSuperGate::in_basis(const LocalOperatorBasis& basis) const {
  if (basis.kind != kind_) throw std::invalid_argument("basis belongs to a different spin kind");
  const int d = local_dim(kind_);
  const int D = d * d;
  // W[alpha, a] = (1/d) Tr[B_alpha^dagger E_a] = conj(B_alpha(s, s')) / sqrt(d)
  Matrix w(D, D);
  for (int alpha = 0; alpha < D; ++alpha)
    for (int a = 0; a < D; ++a) w(alpha, a) = std::conj(basis.elements[alpha](a / d, a % d)) / std::sqrt(double(d));
  const Matrix w2 = Eigen::kroneckerProduct(w, w).eval();
  return w2 * matrix_ * w2.adjoint();
}

void TwoSiteSuperGate::build_blockings() {
  const int D = local_dim(kind_) * local_dim(kind_);
  for (ChargeGroup group : {ChargeGroup::None, ChargeGroup::Z2, ChargeGroup::U1}) {
    Blocking& bl = blockings_[static_cast<int>(group)];
    bl.position.assign(D * D, -1);
    std::vector<int> pair_charge(D * D);
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) {
        const int qq = reduce_charge(group, unit_charge(kind_, a) + unit_charge(kind_, b));
        pair_charge[a * D + b] = qq;
        auto& block = bl.blocks[qq];
        bl.position[a * D + b] = static_cast<int>(block.pairs.size());
        block.pairs.emplace_back(a, b);
      }
    double off_block = 0.0;
    for (int r = 0; r < D * D; ++r)
      for (int c = 0; c < D * D; ++c)
        if (pair_charge[r] != pair_charge[c]) off_block = std::max(off_block, std::abs(matrix_(r, c)));
    bl.valid = off_block < 1e-12;
    for (auto& [qq, block] : bl.blocks) {
      const int n = static_cast<int>(block.pairs.size());
      block.matrix.resize(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const auto [ai, bi] = block.pairs[i];
          const auto [aj, bj] = block.pairs[j];
          block.matrix(i, j) = matrix_(ai * D + bi, aj * D + bj);
        }
    }
  }
}

}  // namespace hpte
