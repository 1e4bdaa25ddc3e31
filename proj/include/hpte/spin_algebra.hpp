#pragma once

// Local Hilbert spaces, spin matrices, operator bases and the XXZ bond term.

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace hpte {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class SpinKind { Half, One };

/// Local Hilbert-space dimension d (2 for spin-1/2, 3 for spin-1).
int local_dim(SpinKind kind);
std::string to_string(SpinKind kind);
SpinKind parse_spin_kind(std::string_view text);

struct SpinMatrices {
  Matrix sx, sy, sz;
};

/// Pauli matrices for spin-1/2, spin-1 matrices (eigenvalues -1, 0, 1) for spin-1.
/// States are ordered by descending magnetization: index 0 is the highest m.
SpinMatrices spin_matrices(SpinKind kind);

/// Orthonormal Hermitian operator basis under (1/d) Tr[A^dagger B].
struct LocalOperatorBasis {
  SpinKind kind;
  std::vector<Matrix> elements;

  int size() const { return static_cast<int>(elements.size()); }
};

LocalOperatorBasis make_basis(SpinKind kind);

/// Gram matrix G_ab = (1/d) Tr[B_a^dagger B_b].
Matrix gram_matrix(const LocalOperatorBasis& basis);

/// Coefficients c_a = (1/d) Tr[B_a^dagger op].
Vector expand(const Matrix& op, const LocalOperatorBasis& basis);
Matrix resum(const Vector& coefficients, const LocalOperatorBasis& basis);

/// h = -1/2 (sx.sx + sy.sy + delta sz.sz) on two sites, row index s1 * d + s2.
struct BondHamiltonian {
  SpinKind kind;
  double delta;
  Matrix matrix;
};

BondHamiltonian make_bond_hamiltonian(SpinKind kind, double delta);

enum class OperatorName { Sz, Sx, Sy, SPlus, StringZ };

std::string to_string(OperatorName name);

/// Named operator with a 1-based site. For StringZ the site j is the first
/// site *not* covered: the operator is the product of sz over sites 1..j-1.
struct OperatorSpec {
  OperatorName name;
  int site;
};

/// Parses "sz(20)", "s_plus(3)", "string_z(20)", ...
OperatorSpec parse_operator_spec(std::string_view text);
std::string to_string(const OperatorSpec& spec);

/// Single-site matrix for sz, sx, sy, s_plus; s_plus = (sx + i sy) / 2.
/// StringZ has no single-site form and is rejected (use operator_factors).
Matrix local_operator(OperatorName name, SpinKind kind);

struct SiteFactor {
  int site;  // 1-based
  Matrix op;
};

/// Non-identity on-site factors of a product operator on an L-site chain.
std::vector<SiteFactor> operator_factors(const OperatorSpec& spec, SpinKind kind, int length);

// Matrix-unit basis E_a = sqrt(d) |s><s'|, a = s * d + s'. It is orthonormal
// under the same weighted trace and every element carries a definite
// magnetization charge s' - s, which the tensor-network code exploits.
Matrix unit_element(SpinKind kind, int a);
int unit_charge(SpinKind kind, int a);

}  // namespace hpte
