#include "hpte/free_fermion.hpp"

#include "hpte/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hpte::ff {

namespace {

constexpr cplx I{0.0, 1.0};

cplx string_phase(int site) {
  // prod_{l<j} sz_l = prod_{l<j} (-i w_{2l-1} w_{2l})
  cplx p{1.0, 0.0};
  for (int l = 1; l < site; ++l) p *= -I;
  return p;
}

ModeOccupation string_occupation(int site, int length, int extra_mode) {
  ModeOccupation occ{length, {}, string_phase(site)};
  for (int m = 1; m <= 2 * (site - 1); ++m) occ.occupied.push_back(m);
  if (extra_mode > 0) occ.occupied.push_back(extra_mode);
  return occ;
}

void check_cut(const GaussianState& state, int cut) {
  if (cut < 1 || 2 * cut >= state.n_modes) throw std::out_of_range("partition cut out of range");
}

Eigen::VectorXd block_occupations(const GaussianState& state, const std::vector<int>& modes) {
  Matrix block(modes.size(), modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = 0; j < modes.size(); ++j) block(i, j) = state.corr(modes[i], modes[j]);
  Eigen::VectorXd nu = linalg::eigh(block).values;
  return nu.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

MappedOperator map_operator(OperatorName name, int site, int length) {
  if (length < 1) throw std::invalid_argument("chain length must be positive");
  const int hi = name == OperatorName::StringZ ? length + 1 : length;
  if (site < 1 || site > hi) throw std::out_of_range("operator site out of range");
  switch (name) {
    case OperatorName::Sz:
      return ModeOccupation{length, {2 * site - 1, 2 * site}, -I};
    case OperatorName::Sx:
      return string_occupation(site, length, 2 * site - 1);
    case OperatorName::Sy:
      return string_occupation(site, length, 2 * site);
    case OperatorName::StringZ:
      return string_occupation(site, length, 0);
    case OperatorName::SPlus: {
      OccupationSuperposition sp;
      sp.terms.emplace_back(0.5, string_occupation(site, length, 2 * site - 1));
      sp.terms.emplace_back(0.5 * I, string_occupation(site, length, 2 * site));
      return sp;
    }
  }
  throw std::invalid_argument("unknown operator");
}

std::array<std::vector<int>, 2> chain_modes(int length) {
  std::array<std::vector<int>, 2> chains;
  for (int m = 1; m <= 2 * length; ++m) {
    const int r = m % 4;
    chains[(r == 0 || r == 1) ? 0 : 1].push_back(m);
  }
  return chains;
}

SingleParticleHamiltonian xx_hamiltonian(int length) {
  if (length < 2) throw std::invalid_argument("XX chain needs at least two sites");
  const int n = 2 * length;
  SingleParticleHamiltonian out{length, Matrix::Zero(n, n)};
  const auto hop = [&](int m, int k) {  // i a+_m a_k + h.c., 1-based modes
    out.h(m - 1, k - 1) += I;
    out.h(k - 1, m - 1) -= I;
  };
  for (int j = 1; j < length; ++j) {
    hop(2 * j, 2 * j + 1);
    hop(2 * j - 1, 2 * j + 2);
  }
  return out;
}

GaussianState from_occupation(const ModeOccupation& occupation) {
  const int n = 2 * occupation.length;
  GaussianState s{n, Matrix::Zero(n, n)};
  for (int m : occupation.occupied) {
    if (m < 1 || m > n) throw std::out_of_range("occupied mode out of range");
    s.corr(m - 1, m - 1) = 1.0;
  }
  return s;
}

GaussianState evolve_gaussian(const GaussianState& state, const SingleParticleHamiltonian& h, double t) {
  return GaussianPropagator(h).evolve(state, t);
}

GaussianPropagator::GaussianPropagator(const SingleParticleHamiltonian& h) {
  if ((h.h - h.h.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("single-particle Hamiltonian is not Hermitian");
  auto e = linalg::eigh(h.h);
  energies_ = std::move(e.values);
  vectors_ = std::move(e.vectors);
}

GaussianState GaussianPropagator::evolve(const GaussianState& state, double t) const {
  if (state.n_modes != vectors_.rows()) throw std::invalid_argument("state and Hamiltonian have different mode counts");
  Vector phases(energies_.size());
  for (Eigen::Index k = 0; k < energies_.size(); ++k) phases(k) = std::polar(1.0, energies_(k) * t);
  const Matrix u = vectors_ * phases.asDiagonal() * vectors_.adjoint();
  return {state.n_modes, u * state.corr * u.adjoint()};
}

GaussianState GaussianPropagator::evolve(const ModeOccupation& occupation, double t) const {
  const int n = static_cast<int>(vectors_.rows());
  if (2 * occupation.length != n) throw std::invalid_argument("occupation and Hamiltonian have different mode counts");
  // C(t) = Phi Phi^dagger with Phi = U(t)[:, occupied].
  Matrix vt_occ(n, occupation.occupied.size());
  for (std::size_t k = 0; k < occupation.occupied.size(); ++k)
    vt_occ.col(k) = vectors_.row(occupation.occupied[k] - 1).adjoint();
  Vector phases(energies_.size());
  for (Eigen::Index k = 0; k < energies_.size(); ++k) phases(k) = std::polar(1.0, energies_(k) * t);
  const Matrix phi = vectors_ * (phases.asDiagonal() * vt_occ);
  return {n, phi * phi.adjoint()};
}

double partition_fluctuation(const GaussianState& state, int cut) {
  check_cut(state, cut);
  const auto ca = state.corr.topLeftCorner(2 * cut, 2 * cut);
  // C is Hermitian, so Tr C_A^2 is the squared Frobenius norm.
  return ca.trace().real() - ca.squaredNorm();
}

double chain_fluctuation(const GaussianState& state, int cut, int chain) {
  check_cut(state, cut);
  if (chain < 0 || chain > 1) throw std::out_of_range("chain index must be 0 or 1");
  const auto chains = chain_modes(state.n_modes / 2);
  std::vector<int> modes;
  for (int m : chains[chain])
    if (m <= 2 * cut) modes.push_back(m - 1);
  double v = 0.0;
  for (int i : modes) {
    v += state.corr(i, i).real();
    for (int j : modes) v -= std::norm(state.corr(i, j));
  }
  return v;
}

double partition_renyi2(const GaussianState& state, int cut) {
  check_cut(state, cut);
  std::vector<int> modes(2 * cut);
  for (int m = 0; m < 2 * cut; ++m) modes[m] = m;
  double s = 0.0;
  for (double nu : block_occupations(state, modes)) s -= std::log2(nu * nu + (1.0 - nu) * (1.0 - nu));
  return s;
}

FluctuationBounds fluctuation_bounds(const GaussianState& state, int cut) {
  FluctuationBounds b;
  b.delta_n2 = partition_fluctuation(state, cut);
  b.s2 = partition_renyi2(state, cut);
  b.lower = 2.0 / std::numbers::ln2 * b.delta_n2;
  b.upper = 4.0 / std::numbers::ln2 * b.delta_n2;
  b.holds = b.s2 <= b.upper + 1e-9 && b.s2 >= b.lower - 1e-9;
  return b;
}

GrowthFit fit_antal_growth(const std::vector<std::pair<double, double>>& series, int chains) {
  if (chains < 1) throw std::invalid_argument("chain count must be positive");
  if (series.size() < 2) throw std::invalid_argument("growth fit needs at least two points");
  const double n = static_cast<double>(series.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, tmin = series.front().first, tmax = tmin;
  for (const auto& [t, y] : series) {
    if (!(t > 0.0)) throw std::invalid_argument("growth fit needs positive times");
    const double x = std::log(t);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw std::invalid_argument("growth fit needs distinct times");
  GrowthFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.offset = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (const auto& [t, y] : series) {
    const double r = y - (fit.slope * std::log(t) + fit.offset);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.per_chain_slope = fit.slope / chains;
  fit.low_confidence = series.size() < 3 || tmax / tmin < 10.0;
  return fit;
}

double antal_slope() { return 1.0 / (2.0 * std::numbers::pi * std::numbers::pi); }

}  // namespace hpte::ff
