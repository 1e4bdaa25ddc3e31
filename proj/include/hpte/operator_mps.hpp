#pragma once

// Operators of an L-site chain stored as states in operator space: a tensor
// train over the d^2-dimensional local operator space, kept in canonical form
// with the Schmidt spectrum of every bond available without extra sweeps.
//
// Storage is the inverse-free variant of the Vidal form: site tensors are the
// right-canonical B_j = Gamma_j lambda_j and each bond carries its Schmidt
// coefficients. The local index runs over the matrix-unit basis (see
// unit_element), which makes every tensor block-sparse in the magnetization
// charge. Schmidt spectra do not depend on the choice of orthonormal local basis.

#include "hpte/spin_algebra.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

namespace hpte {

/// Abelian charge used to block the tensors. None puts everything in one block.
enum class ChargeGroup : std::int32_t { None = 0, Z2 = 1, U1 = 2 };

int reduce_charge(ChargeGroup group, int q);
std::string to_string(ChargeGroup group);

/// Schmidt coefficients (singular values, not squared) of one bond, by charge sector.
struct Bond {
  std::map<int, Eigen::VectorXd> sectors;

  int dim() const;
  int dim(int charge) const;
};

/// Blocks keyed by (left bond charge, local matrix-unit index). A block maps the
/// left sector to the right sector with charge reduce(left + unit_charge(a)).
struct SiteTensor {
  std::map<std::pair<int, int>, Matrix> blocks;
};

struct SchmidtSpectrum {
  int bond_index;
  std::vector<double> values;  // squared Schmidt coefficients, non-increasing
};

struct TruncationPolicy {
  int chi_max = 256;
  double cutoff = 1e-14;  // smallest kept squared Schmidt value

  void validate() const;
};

struct VectorizedMPO {
  int length = 0;
  SpinKind kind = SpinKind::Half;
  ChargeGroup group = ChargeGroup::None;
  std::vector<SiteTensor> sites;  // length entries
  std::vector<Bond> bonds;        // length + 1 entries; bonds[b] sits between sites b and b+1 (1-based)
  double norm_log = 0.0;          // log of the weighted HS norm of the represented operator
  double discarded_weight = 0.0;  // cumulative truncated probability
  int degenerate_cuts = 0;        // truncations that split a (near-)degenerate multiplet

  int local_size() const { return local_dim(kind) * local_dim(kind); }
  int max_bond_dimension() const;
};

/// Bond-dimension-1 operator from on-site factors (1-based sites); identity elsewhere.
/// The represented operator is normalized and its true norm goes to norm_log.
/// The charge group is the finest one under which every factor is homogeneous.
VectorizedMPO from_product_operator(const std::vector<SiteFactor>& factors, int length, SpinKind kind);

/// Exact (untruncated) tensor train of a dense d^L x d^L operator. Meant for small L.
VectorizedMPO from_dense_operator(const Matrix& op, int length, SpinKind kind);

/// Dense d^L x d^L matrix including the norm factor.
Matrix to_dense(const VectorizedMPO& mpo);

/// Squared Schmidt values across bond b in 1..L-1.
SchmidtSpectrum schmidt_spectrum(const VectorizedMPO& mpo, int bond);

/// S_alpha in bits; alpha == 1 is the von Neumann entropy.
double renyi_entropy(const std::vector<double>& spectrum, double alpha);
double renyi_entropy(const SchmidtSpectrum& spectrum, double alpha);

/// Weighted HS inner product (1/d^L) Tr[A^dagger B] including both norm factors.
cplx overlap(const VectorizedMPO& a, const VectorizedMPO& b);

/// Same, for the normalized operators (norm factors dropped).
cplx normalized_overlap(const VectorizedMPO& a, const VectorizedMPO& b);

struct CanonicalError {
  double left = 0.0;
  double right = 0.0;
};

/// Largest deviation from identity of the left and right environments over all bonds.
CanonicalError canonical_error(const VectorizedMPO& mpo);

class TwoSiteSuperGate;

struct GateOutcome {
  double discarded = 0.0;  // truncated probability of this application
  int kept = 0;            // new bond dimension
  bool degenerate_cut = false;
};

/// Applies a two-site super-gate on bond b (sites b, b+1), re-splits by SVD and
/// truncates according to the policy. Gates on distinct bonds of equal parity
/// touch disjoint data and may run concurrently.
GateOutcome apply_two_site_gate(VectorizedMPO& mpo, int bond, const TwoSiteSuperGate& gate,
                                const TruncationPolicy& policy);

namespace detail {
/// apply_two_site_gate without touching the shared counters of the MPO.
GateOutcome apply_gate_local(VectorizedMPO& mpo, int bond, const TwoSiteSuperGate& gate,
                             const TruncationPolicy& policy);
}  // namespace detail

// Checkpoint format, see docs/checkpoint_format.md.
void write_mpo(std::ostream& out, const VectorizedMPO& mpo);
VectorizedMPO read_mpo(std::istream& in);

}  // namespace hpte
