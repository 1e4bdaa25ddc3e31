#pragma once

// Adjoint-fermion picture of the spin-1/2 XX chain. Operator space of an
// L-site chain is the Fock space of 2L modes; mode 2j-1 and 2j belong to site j
// (1-based). Mode m is created by multiplying with the Majorana operator w_m,
// and a Majorana monomial P_alpha is always taken in ascending mode order.
// At Delta = 0 the super-Hamiltonian is quadratic and splits into two
// uncoupled hopping chains, so operators with a single occupation pattern
// evolve as Slater determinants.

#include "hpte/spin_algebra.hpp"

#include <array>
#include <utility>
#include <variant>
#include <vector>

namespace hpte::ff {

struct ModeOccupation {
  int length = 0;               // spin sites
  std::vector<int> occupied;    // ascending, 1-based modes in 1..2L
  cplx phase{1.0, 0.0};         // |O> = phase * |P_occupied>
};

struct OccupationSuperposition {
  std::vector<std::pair<cplx, ModeOccupation>> terms;
};

using MappedOperator = std::variant<ModeOccupation, OccupationSuperposition>;

/// sz_j -> -i |w_{2j-1} w_{2j}>; sx_j, sy_j -> (-i)^{j-1} times the string
/// w_1 ... w_{2j-2} followed by w_{2j-1} (resp. w_{2j}); string_z(j) -> (-i)^{j-1}
/// w_1 ... w_{2j-2}; s_plus is the two-term superposition (sx + i sy) / 2.
MappedOperator map_operator(OperatorName name, int site, int length);

/// Modes of the two hopping chains, in chain order: {1, 4, 5, 8, 9, ...} and {2, 3, 6, 7, ...}.
std::array<std::vector<int>, 2> chain_modes(int length);

/// 2L x 2L single-particle matrix of H_XX = i sum_j (a+_{2j} a_{2j+1} + a+_{2j-1} a_{2j+2} - h.c.).
struct SingleParticleHamiltonian {
  int length = 0;
  Matrix h;
};

SingleParticleHamiltonian xx_hamiltonian(int length);

/// C_mn = <a+_m a_n> over 2L modes.
struct GaussianState {
  int n_modes = 0;
  Matrix corr;

  double particle_number() const { return corr.trace().real(); }
};

GaussianState from_occupation(const ModeOccupation& occupation);

/// C(t) = exp(i h t) C exp(-i h t).
GaussianState evolve_gaussian(const GaussianState& state, const SingleParticleHamiltonian& h, double t);

/// Diagonalizes h once and reuses it for many times.
class GaussianPropagator {
 public:
  explicit GaussianPropagator(const SingleParticleHamiltonian& h);

  GaussianState evolve(const GaussianState& state, double t) const;
  /// Faster path for a Slater determinant given by its occupied modes.
  GaussianState evolve(const ModeOccupation& occupation, double t) const;

 private:
  Eigen::VectorXd energies_;
  Matrix vectors_;
};

/// Particle-number variance of modes 1..2b (spin bond b, 1 <= b < L).
double partition_fluctuation(const GaussianState& state, int cut);

/// Same variance restricted to one of the two chains (0 or 1).
double chain_fluctuation(const GaussianState& state, int cut, int chain);

/// Renyi-2 entropy (bits) of modes 1..2b: -sum log2(nu^2 + (1 - nu)^2).
double partition_renyi2(const GaussianState& state, int cut);

/// (4/ln2) dN^2 >= S2 >= (2/ln2) dN^2.
struct FluctuationBounds {
  double delta_n2 = 0.0;
  double s2 = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool holds = true;  // within 1e-9
};

FluctuationBounds fluctuation_bounds(const GaussianState& state, int cut);

/// Least-squares fit dN^2 = slope * ln t + offset.
struct GrowthFit {
  double slope = 0.0;
  double offset = 0.0;
  double residual = 0.0;  // RMS deviation
  double per_chain_slope = 0.0;
  bool low_confidence = false;  // fewer than 3 points or less than one decade in t
};

GrowthFit fit_antal_growth(const std::vector<std::pair<double, double>>& series, int chains = 1);

/// Asymptotic per-chain slope 1 / (2 pi^2) of the domain-wall number variance.
double antal_slope();

}  // namespace hpte::ff
