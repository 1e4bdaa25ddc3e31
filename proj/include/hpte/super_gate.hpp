#pragma once

#include "hpte/operator_mps.hpp"

#include <array>
#include <optional>

namespace hpte {

/// Conjugation X -> exp(i h tau) X exp(-i h tau) of a two-site operator, as a
/// d^4 x d^4 matrix on the matrix-unit pair basis (row index a * d^2 + b).
class TwoSiteSuperGate {
 public:
  TwoSiteSuperGate(const BondHamiltonian& source, double tau);

  /// Wraps an arbitrary d^4 x d^4 matrix (used for identity and test gates).
  TwoSiteSuperGate(SpinKind kind, Matrix bond_matrix);

  static TwoSiteSuperGate identity(SpinKind kind);

  SpinKind kind() const { return kind_; }
  double tau() const { return tau_; }
  const std::optional<BondHamiltonian>& source() const { return source_; }
  const Matrix& bond_matrix() const { return matrix_; }

  /// The same map expressed in the product basis B_a (x) B_b of a local basis.
  Matrix in_basis(const LocalOperatorBasis& basis) const;

  struct Block {
    std::vector<std::pair<int, int>> pairs;  // (a, b) with the block's pair charge
    Matrix matrix;
  };

  struct Blocking {
    bool valid = false;            // matrix is block diagonal in this grouping
    std::map<int, Block> blocks;   // by reduced pair charge
    std::vector<int> position;     // a * d^2 + b -> row inside its block
  };

  const Blocking& blocking(ChargeGroup group) const { return blockings_[static_cast<int>(group)]; }

 private:
  void build_blockings();

  SpinKind kind_;
  double tau_ = 0.0;
  std::optional<BondHamiltonian> source_;
  Matrix matrix_;
  std::array<Blocking, 3> blockings_;
};

}  // namespace hpte
