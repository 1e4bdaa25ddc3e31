#pragma once

// Dense exact reference for small chains: exact Heisenberg evolution,
// autocorrelations and operator Schmidt spectra.

#include "hpte/operator_mps.hpp"
#include "hpte/tebd_engine.hpp"

namespace hpte::ed {

/// d^L x d^L operator. Size guard: L <= 10 for spin-1/2, L <= 6 for spin-1.
struct DenseOperator {
  int length = 0;
  SpinKind kind = SpinKind::Half;
  Matrix matrix;
};

int max_length(SpinKind kind);
void check_size(int length, SpinKind kind);

DenseOperator product_operator(const std::vector<SiteFactor>& factors, int length, SpinKind kind);
DenseOperator from_spec(const OperatorSpec& spec, int length, SpinKind kind);

/// Open chain sum of the bond Hamiltonian.
DenseOperator chain_hamiltonian(const BondHamiltonian& bond, int length);

/// (1/d^L) Tr[O^dagger O]
double weighted_norm_sq(const DenseOperator& op);
DenseOperator normalized(const DenseOperator& op);

/// Caches the eigen-decomposition of H for repeated evolutions.
class ExactPropagator {
 public:
  explicit ExactPropagator(const DenseOperator& hamiltonian);

  /// O(t) = exp(iHt) O exp(-iHt)
  DenseOperator evolve(const DenseOperator& op, double t) const;

 private:
  int length_;
  SpinKind kind_;
  Eigen::VectorXd energies_;
  Matrix vectors_;
};

DenseOperator evolve_exact(const DenseOperator& op, const DenseOperator& hamiltonian, double t);

/// (1/d^L) Tr[O^dagger(t) O(0)] for normalized O.
cplx itac_exact(const DenseOperator& op, const DenseOperator& hamiltonian, double t);
cplx weighted_overlap(const DenseOperator& a, const DenseOperator& b);

/// Coefficients Lambda_mn of O in the product basis (B_a1 x ... x B_a_cut) (x) (...)
/// built from the Hermitian local basis; rows belong to sites 1..cut.
struct LambdaMatrix {
  int cut = 0;
  Matrix coefficients;
};

LambdaMatrix lambda_matrix(const DenseOperator& op, int cut);

/// Squared singular values of Lambda, normalized to unit sum.
SchmidtSpectrum schmidt_exact(const DenseOperator& op, int cut);

struct InequalityChain {
  double itac_abs = 0.0;       // |Tr[Lambda^dagger(t) Lambda(0)]|
  double schmidt_bound = 0.0;  // sum_k sqrt(lambda_k(t) lambda_k(0))
  double renyi_bound = 0.0;    // (Tr sqrt rho(0))^(1 - 1/alpha) (sum lambda_k^alpha)^(1/(2 alpha))
  bool all_hold = false;       // ordering holds within 1e-10
};

/// Evaluates the autocorrelation bound chain at one cut (default: centre).
InequalityChain verify_inequality_chain(const DenseOperator& op, const DenseOperator& hamiltonian, double t,
                                        double alpha, int cut = 0);
InequalityChain inequality_chain(const DenseOperator& op_t, const DenseOperator& op_0, double alpha, int cut);

/// Same observables as tebd_engine::measure, computed exactly.
TimeSeriesRecord measure_exact(const DenseOperator& op_t, const DenseOperator& op_0, double t,
                               const std::vector<double>& alphas);

}  // namespace hpte::ed
