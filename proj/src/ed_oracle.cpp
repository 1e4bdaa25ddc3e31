#include "hpte/ed_oracle.hpp"

#include "hpte/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace hpte::ed {

namespace {

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

Matrix embed_bond(const Matrix& h, int d, int length, int bond) {
  const Matrix left = Matrix::Identity(ipow(d, bond - 1), ipow(d, bond - 1));
  const Matrix right = Matrix::Identity(ipow(d, length - bond - 1), ipow(d, length - bond - 1));
  return Eigen::kroneckerProduct(Eigen::kroneckerProduct(left, h).eval(), right).eval();
}

}  // namespace

int max_length(SpinKind kind) { return kind == SpinKind::Half ? 10 : 6; }

void check_size(int length, SpinKind kind) {
  if (length < 1) throw std::invalid_argument("chain length must be positive");
  if (length > max_length(kind))
    throw std::invalid_argument("exact solver limited to L <= " + std::to_string(max_length(kind)) + " for spin " +
                                to_string(kind));
}

DenseOperator product_operator(const std::vector<SiteFactor>& factors, int length, SpinKind kind) {
  check_size(length, kind);
  const int d = local_dim(kind);
  std::vector<Matrix> ops(length, Matrix::Identity(d, d));
  for (const auto& f : factors) {
    if (f.site < 1 || f.site > length) throw std::invalid_argument("factor site out of range");
    ops[f.site - 1] = f.op;
  }
  Matrix m = ops[0];
  for (int k = 1; k < length; ++k) m = Eigen::kroneckerProduct(m, ops[k]).eval();
  return {length, kind, std::move(m)};
}

DenseOperator from_spec(const OperatorSpec& spec, int length, SpinKind kind) {
  return product_operator(operator_factors(spec, kind, length), length, kind);
}

DenseOperator chain_hamiltonian(const BondHamiltonian& bond, int length) {
  check_size(length, bond.kind);
  const int d = local_dim(bond.kind);
  const int n = ipow(d, length);
  Matrix h = Matrix::Zero(n, n);
  for (int b = 1; b < length; ++b) h += embed_bond(bond.matrix, d, length, b);
  return {length, bond.kind, std::move(h)};
}

double weighted_norm_sq(const DenseOperator& op) {
  return op.matrix.squaredNorm() / static_cast<double>(op.matrix.rows());
}

DenseOperator normalized(const DenseOperator& op) {
  const double n2 = weighted_norm_sq(op);
  if (n2 == 0.0) throw std::invalid_argument("cannot normalize the zero operator");
  return {op.length, op.kind, op.matrix / std::sqrt(n2)};
}

ExactPropagator::ExactPropagator(const DenseOperator& hamiltonian)
    : length_(hamiltonian.length), kind_(hamiltonian.kind) {
  check_size(length_, kind_);
  const Matrix& h = hamiltonian.matrix;
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument("Hamiltonian is not Hermitian");
  if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real());
    if (solver.info() != Eigen::Success) throw std::runtime_error("exact diagonalization failed");
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors().cast<cplx>();
  } else {
    auto e = linalg::eigh(h);
    energies_ = std::move(e.values);
    vectors_ = std::move(e.vectors);
  }
}

DenseOperator ExactPropagator::evolve(const DenseOperator& op, double t) const {
  if (op.length != length_ || op.kind != kind_) throw std::invalid_argument("operator and Hamiltonian differ in shape");
  Matrix rotated = vectors_.adjoint() * op.matrix * vectors_;
  for (Eigen::Index m = 0; m < rotated.rows(); ++m)
    for (Eigen::Index n = 0; n < rotated.cols(); ++n) rotated(m, n) *= std::polar(1.0, (energies_(m) - energies_(n)) * t);
  return {length_, kind_, vectors_ * rotated * vectors_.adjoint()};
}

DenseOperator evolve_exact(const DenseOperator& op, const DenseOperator& hamiltonian, double t) {
  return ExactPropagator(hamiltonian).evolve(op, t);
}

cplx weighted_overlap(const DenseOperator& a, const DenseOperator& b) {
  if (a.matrix.rows() != b.matrix.rows()) throw std::invalid_argument("operators differ in dimension");
  return (a.matrix.conjugate().cwiseProduct(b.matrix)).sum() / static_cast<double>(a.matrix.rows());
}

cplx itac_exact(const DenseOperator& op, const DenseOperator& hamiltonian, double t) {
  return weighted_overlap(evolve_exact(op, hamiltonian, t), op);
}

LambdaMatrix lambda_matrix(const DenseOperator& op, int cut) {
  check_size(op.length, op.kind);
  if (cut < 1 || cut >= op.length) throw std::out_of_range("cut out of range");
  const int d = local_dim(op.kind);
  const int D = d * d;
  const int L = op.length;
  const long total = static_cast<long>(ipow(D, L));
  const double n = static_cast<double>(op.matrix.rows());

  // Coefficients on the matrix-unit product basis, site 1 most significant.
  Vector c(total);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    int row = 0, col = 0, pw = 1;
    for (int k = 0; k < L; ++k) {
      const int a = static_cast<int>(rem % D);
      rem /= D;
      row += (a / d) * pw;
      col += (a % d) * pw;
      pw *= d;
    }
    c(idx) = op.matrix(row, col) / std::sqrt(n);
  }

  // Rotate every site into the Hermitian basis.
  const auto basis = make_basis(op.kind);
  Matrix w(D, D);
  for (int alpha = 0; alpha < D; ++alpha)
    for (int a = 0; a < D; ++a) w(alpha, a) = std::conj(basis.elements[alpha](a / d, a % d)) / std::sqrt(double(d));
  Vector tmp(D);
  for (int k = 0; k < L; ++k) {
    const long inner = ipow(D, L - 1 - k);
    const long outer = total / (inner * D);
    for (long o = 0; o < outer; ++o)
      for (long i = 0; i < inner; ++i) {
        for (int a = 0; a < D; ++a) tmp(a) = c(o * D * inner + a * inner + i);
        const Vector r = w * tmp;
        for (int a = 0; a < D; ++a) c(o * D * inner + a * inner + i) = r(a);
      }
  }

  const long cols = ipow(D, L - cut);
  const long rows = total / cols;
  LambdaMatrix lam{cut, Matrix(rows, cols)};
  for (long r = 0; r < rows; ++r)
    for (long q = 0; q < cols; ++q) lam.coefficients(r, q) = c(r * cols + q);
  return lam;
}

namespace {

std::vector<double> squared_singular_values(const Matrix& m) {
  const Eigen::VectorXd s = linalg::singular_values(m);
  std::vector<double> out(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) out[k] = s(k) * s(k);
  return out;
}

}  // namespace

SchmidtSpectrum schmidt_exact(const DenseOperator& op, int cut) {
  auto values = squared_singular_values(lambda_matrix(op, cut).coefficients);
  double sum = 0.0;
  for (double v : values) sum += v;
  if (sum == 0.0) throw std::invalid_argument("zero operator has no Schmidt spectrum");
  for (double& v : values) v /= sum;
  return {cut, std::move(values)};
}

InequalityChain inequality_chain(const DenseOperator& op_t, const DenseOperator& op_0, double alpha, int cut) {
  if (!(alpha > 1.0)) throw std::invalid_argument("inequality chain needs alpha > 1");
  if (cut == 0) cut = op_0.length / 2;
  const Matrix lam_t = lambda_matrix(op_t, cut).coefficients;
  const Matrix lam_0 = lambda_matrix(op_0, cut).coefficients;
  const auto sp_t = squared_singular_values(lam_t);
  const auto sp_0 = squared_singular_values(lam_0);

  InequalityChain c;
  c.itac_abs = std::abs((lam_t.conjugate().cwiseProduct(lam_0)).sum());
  const std::size_t n = std::min(sp_t.size(), sp_0.size());
  for (std::size_t k = 0; k < n; ++k) c.schmidt_bound += std::sqrt(std::max(0.0, sp_t[k] * sp_0[k]));
  double trace_sqrt = 0.0, power_sum = 0.0;
  for (double v : sp_0) trace_sqrt += std::sqrt(std::max(0.0, v));
  for (double v : sp_t) power_sum += std::pow(std::max(0.0, v), alpha);
  c.renyi_bound = std::pow(trace_sqrt, 1.0 - 1.0 / alpha) * std::pow(power_sum, 1.0 / (2.0 * alpha));
  constexpr double tol = 1e-10;
  c.all_hold = c.itac_abs <= c.schmidt_bound + tol && c.schmidt_bound <= c.renyi_bound + tol;
  return c;
}

InequalityChain verify_inequality_chain(const DenseOperator& op, const DenseOperator& hamiltonian, double t,
                                        double alpha, int cut) {
  if (std::abs(weighted_norm_sq(op) - 1.0) > 1e-10) throw std::invalid_argument("operator must be normalized");
  return inequality_chain(evolve_exact(op, hamiltonian, t), op, alpha, cut);
}

TimeSeriesRecord measure_exact(const DenseOperator& op_t, const DenseOperator& op_0, double t,
                               const std::vector<double>& alphas) {
  TimeSeriesRecord r;
  r.t = t;
  r.alphas = alphas;
  r.entropies.assign(alphas.size(), std::vector<double>(std::max(0, op_t.length - 1), 0.0));
  r.chi_used = 1;
  for (int b = 1; b < op_t.length; ++b) {
    const auto sp = schmidt_exact(op_t, b);
    for (std::size_t i = 0; i < alphas.size(); ++i) r.entropies[i][b - 1] = renyi_entropy(sp, alphas[i]);
    r.chi_used = std::max<int>(r.chi_used, std::count_if(sp.values.begin(), sp.values.end(),
                                                           [](double v) { return v > 1e-14; }));
  }
  r.itac = weighted_overlap(op_t, op_0) / std::sqrt(weighted_norm_sq(op_t) * weighted_norm_sq(op_0));
  r.discarded_weight = 0.0;
  for (double a : alphas) r.bound_rhs.push_back(entropy_bound_rhs(r.itac, a));
  return r;
}

}  // namespace hpte::ed
