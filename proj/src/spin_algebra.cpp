#include "hpte/spin_algebra.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace hpte {

namespace {

constexpr cplx I{0.0, 1.0};

double weighted_inner_real(const Matrix& a, const Matrix& b) {
  return ((a.adjoint() * b).trace() / static_cast<double>(a.rows())).real();
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

int local_dim(SpinKind kind) { return kind == SpinKind::Half ? 2 : 3; }

std::string to_string(SpinKind kind) { return kind == SpinKind::Half ? "half" : "one"; }

SpinKind parse_spin_kind(std::string_view text) {
  const auto t = trim(text);
  if (t == "half" || t == "1/2" || t == "0.5") return SpinKind::Half;
  if (t == "one" || t == "1") return SpinKind::One;
  throw std::invalid_argument("unknown spin kind '" + t + "' (expected half or one)");
}

SpinMatrices spin_matrices(SpinKind kind) {
  SpinMatrices s;
  if (kind == SpinKind::Half) {
    s.sx = Matrix::Zero(2, 2);
    s.sy = Matrix::Zero(2, 2);
    s.sz = Matrix::Zero(2, 2);
    s.sx(0, 1) = s.sx(1, 0) = 1.0;
    s.sy(0, 1) = -I;
    s.sy(1, 0) = I;
    s.sz(0, 0) = 1.0;
    s.sz(1, 1) = -1.0;
    return s;
  }
  const double r = 1.0 / std::sqrt(2.0);
  s.sx = Matrix::Zero(3, 3);
  s.sy = Matrix::Zero(3, 3);
  s.sz = Matrix::Zero(3, 3);
  s.sx(0, 1) = s.sx(1, 0) = s.sx(1, 2) = s.sx(2, 1) = r;
  s.sy(0, 1) = -I * r;
  s.sy(1, 0) = I * r;
  s.sy(1, 2) = -I * r;
  s.sy(2, 1) = I * r;
  s.sz(0, 0) = 1.0;
  s.sz(2, 2) = -1.0;
  return s;
}

LocalOperatorBasis make_basis(SpinKind kind) {
  const int d = local_dim(kind);
  const auto s = spin_matrices(kind);
  const Matrix one = Matrix::Identity(d, d);

  // Fixed generating list; Gram-Schmidt with real coefficients keeps
  // every element Hermitian. Linearly dependent generators are skipped.
  std::vector<Matrix> generators{one, s.sx, s.sy, s.sz};
  if (kind == SpinKind::One) {
    generators.push_back(s.sx * s.sy + s.sy * s.sx);
    generators.push_back(s.sy * s.sz + s.sz * s.sy);
    generators.push_back(s.sz * s.sx + s.sx * s.sz);
    generators.push_back(s.sx * s.sx);
    generators.push_back(s.sy * s.sy);
    generators.push_back(s.sz * s.sz);
  }

  LocalOperatorBasis basis{kind, {}};
  for (const auto& g : generators) {
    Matrix v = g;
    for (const auto& b : basis.elements) v -= weighted_inner_real(b, v) * b;
    // Second pass for numerical orthogonality.
    for (const auto& b : basis.elements) v -= weighted_inner_real(b, v) * b;
    const double n2 = weighted_inner_real(v, v);
    if (n2 < 1e-20) continue;
    basis.elements.push_back(v / std::sqrt(n2));
  }
  if (basis.size() != d * d) throw std::logic_error("operator basis generation is incomplete");
  return basis;
}

Matrix gram_matrix(const LocalOperatorBasis& basis) {
  const int n = basis.size();
  Matrix g(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      g(a, b) = (basis.elements[a].adjoint() * basis.elements[b]).trace() /
                static_cast<double>(basis.elements[a].rows());
  return g;
}

Vector expand(const Matrix& op, const LocalOperatorBasis& basis) {
  Vector c(basis.size());
  for (int a = 0; a < basis.size(); ++a)
    c(a) = (basis.elements[a].adjoint() * op).trace() / static_cast<double>(op.rows());
  return c;
}

Matrix resum(const Vector& coefficients, const LocalOperatorBasis& basis) {
  const int d = local_dim(basis.kind);
  Matrix op = Matrix::Zero(d, d);
  for (int a = 0; a < basis.size(); ++a) op += coefficients(a) * basis.elements[a];
  return op;
}

BondHamiltonian make_bond_hamiltonian(SpinKind kind, double delta) {
  if (!std::isfinite(delta)) throw std::invalid_argument("anisotropy delta must be finite");
  const auto s = spin_matrices(kind);
  using Eigen::kroneckerProduct;
  Matrix h = kroneckerProduct(s.sx, s.sx).eval();
  h += kroneckerProduct(s.sy, s.sy).eval();
  h += delta * kroneckerProduct(s.sz, s.sz).eval();
  h *= -0.5;
  return {kind, delta, h};
}

std::string to_string(OperatorName name) {
  switch (name) {
    case OperatorName::Sz: return "sz";
    case OperatorName::Sx: return "sx";
    case OperatorName::Sy: return "sy";
    case OperatorName::SPlus: return "s_plus";
    case OperatorName::StringZ: return "string_z";
  }
  return "?";
}

OperatorSpec parse_operator_spec(std::string_view text) {
  const auto t = trim(text);
  const auto open = t.find('(');
  const auto close = t.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open || close + 1 != t.size())
    throw std::invalid_argument("operator '" + t + "' must look like name(site)");
  const auto name = trim(std::string_view(t).substr(0, open));
  const auto arg = trim(std::string_view(t).substr(open + 1, close - open - 1));
  OperatorSpec spec{};
  if (name == "sz") spec.name = OperatorName::Sz;
  else if (name == "sx") spec.name = OperatorName::Sx;
  else if (name == "sy") spec.name = OperatorName::Sy;
  else if (name == "s_plus" || name == "splus") spec.name = OperatorName::SPlus;
  else if (name == "string_z") spec.name = OperatorName::StringZ;
  else throw std::invalid_argument("unknown operator name '" + name + "'");
  std::size_t used = 0;
  try {
    spec.site = std::stoi(arg, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != arg.size()) throw std::invalid_argument("operator site '" + arg + "' is not an integer");
  return spec;
}

std::string to_string(const OperatorSpec& spec) {
  return to_string(spec.name) + "(" + std::to_string(spec.site) + ")";
}

Matrix local_operator(OperatorName name, SpinKind kind) {
  const auto s = spin_matrices(kind);
  switch (name) {
    case OperatorName::Sz: return s.sz;
    case OperatorName::Sx: return s.sx;
    case OperatorName::Sy: return s.sy;
    case OperatorName::SPlus: return (s.sx + I * s.sy) / 2.0;
    case OperatorName::StringZ: break;
  }
  throw std::invalid_argument("string_z is not a single-site operator");
}

std::vector<SiteFactor> operator_factors(const OperatorSpec& spec, SpinKind kind, int length) {
  if (length < 1) throw std::invalid_argument("chain length must be positive");
  if (spec.name == OperatorName::StringZ) {
    if (spec.site < 1 || spec.site > length + 1)
      throw std::invalid_argument("string_z cutoff site out of range");
    std::vector<SiteFactor> out;
    const Matrix sz = spin_matrices(kind).sz;
    for (int l = 1; l < spec.site; ++l) out.push_back({l, sz});
    return out;
  }
  if (spec.site < 1 || spec.site > length) throw std::invalid_argument("operator site out of range");
  return {{spec.site, local_operator(spec.name, kind)}};
}

Matrix unit_element(SpinKind kind, int a) {
  const int d = local_dim(kind);
  if (a < 0 || a >= d * d) throw std::out_of_range("matrix-unit index out of range");
  Matrix e = Matrix::Zero(d, d);
  e(a / d, a % d) = std::sqrt(static_cast<double>(d));
  return e;
}

int unit_charge(SpinKind kind, int a) {
  const int d = local_dim(kind);
  return a % d - a / d;
}

}  // namespace hpte
