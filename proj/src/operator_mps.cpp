#include "hpte/operator_mps.hpp"

#include "hpte/linalg.hpp"
#include "hpte/super_gate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace hpte {

namespace {

constexpr double kZeroEntry = 1e-14;
// Singular values below this fraction of the largest one are rounding noise.
constexpr double kNoiseFloor = 1e-13;

bool homogeneous(const Matrix& op, SpinKind kind, ChargeGroup group) {
  const int d = local_dim(kind);
  const double scale = op.cwiseAbs().maxCoeff();
  std::set<int> seen;
  for (int s = 0; s < d; ++s)
    for (int sp = 0; sp < d; ++sp)
      if (std::abs(op(s, sp)) > kZeroEntry * scale) seen.insert(reduce_charge(group, unit_charge(kind, s * d + sp)));
  return seen.size() <= 1;
}

std::vector<int> local_charges(const VectorizedMPO& mpo) {
  std::vector<int> q(mpo.local_size());
  for (int a = 0; a < mpo.local_size(); ++a) q[a] = reduce_charge(mpo.group, unit_charge(mpo.kind, a));
  return q;
}

Bond trivial_bond(int charge) {
  Bond b;
  b.sectors[charge] = Eigen::VectorXd::Ones(1);
  return b;
}

}  // namespace

int reduce_charge(ChargeGroup group, int q) {
  switch (group) {
    case ChargeGroup::None: return 0;
    case ChargeGroup::Z2: return ((q % 2) + 2) % 2;
    case ChargeGroup::U1: return q;
  }
  return 0;
}

std::string to_string(ChargeGroup group) {
  switch (group) {
    case ChargeGroup::None: return "none";
    case ChargeGroup::Z2: return "z2";
    case ChargeGroup::U1: return "u1";
  }
  return "?";
}

int Bond::dim() const {
  int n = 0;
  for (const auto& [q, v] : sectors) n += static_cast<int>(v.size());
  return n;
}

int Bond::dim(int charge) const {
  const auto it = sectors.find(charge);
  return it == sectors.end() ? 0 : static_cast<int>(it->second.size());
}

void TruncationPolicy::validate() const {
  if (chi_max < 1) throw std::invalid_argument("chi_max must be at least 1");
  if (!(cutoff >= 0.0 && cutoff < 1.0)) throw std::invalid_argument("cutoff must lie in [0, 1)");
}

int VectorizedMPO::max_bond_dimension() const {
  int chi = 0;
  for (const auto& b : bonds) chi = std::max(chi, b.dim());
  return chi;
}

VectorizedMPO from_product_operator(const std::vector<SiteFactor>& factors, int length, SpinKind kind) {
  if (length < 1) throw std::invalid_argument("chain length must be positive");
  const int d = local_dim(kind);
  std::vector<Matrix> ops(length, Matrix::Identity(d, d));
  std::vector<bool> used(length, false);
  for (const auto& f : factors) {
    if (f.site < 1 || f.site > length) throw std::invalid_argument("factor site out of range");
    if (used[f.site - 1]) throw std::invalid_argument("factor sites must be distinct");
    if (f.op.rows() != d || f.op.cols() != d) throw std::invalid_argument("factor has wrong local dimension");
    if (!f.op.allFinite()) throw std::invalid_argument("factor contains non-finite entries");
    if (f.op.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("zero operator factor");
    used[f.site - 1] = true;
    ops[f.site - 1] = f.op;
  }

  ChargeGroup group = ChargeGroup::None;
  for (ChargeGroup g : {ChargeGroup::U1, ChargeGroup::Z2}) {
    if (std::all_of(ops.begin(), ops.end(), [&](const Matrix& m) { return homogeneous(m, kind, g); })) {
      group = g;
      break;
    }
  }

  VectorizedMPO mpo;
  mpo.length = length;
  mpo.kind = kind;
  mpo.group = group;
  mpo.sites.resize(length);
  mpo.bonds.reserve(length + 1);

  const double scale = std::sqrt(static_cast<double>(d));
  int charge = 0;
  mpo.bonds.push_back(trivial_bond(charge));
  for (int k = 0; k < length; ++k) {
    const Matrix& x = ops[k];
    const double max_abs = x.cwiseAbs().maxCoeff();
    const double norm = x.norm() / scale;
    mpo.norm_log += std::log(norm);
    int site_charge = 0;
    for (int a = 0; a < d * d; ++a) {
      const cplx c = x(a / d, a % d) / scale / norm;
      if (std::abs(x(a / d, a % d)) <= kZeroEntry * max_abs) continue;
      site_charge = reduce_charge(group, unit_charge(kind, a));
      mpo.sites[k].blocks[{charge, a}] = Matrix::Constant(1, 1, c);
    }
    charge = reduce_charge(group, charge + site_charge);
    mpo.bonds.push_back(trivial_bond(charge));
  }
  return mpo;
}

VectorizedMPO from_dense_operator(const Matrix& op, int length, SpinKind kind) {
  const int d = local_dim(kind);
  const int D = d * d;
  if (length < 1) throw std::invalid_argument("chain length must be positive");
  const double dim_f = std::pow(static_cast<double>(d), length);
  if (dim_f > 1024.0) throw std::invalid_argument("dense operator too large");
  const int dim = static_cast<int>(dim_f);
  if (op.rows() != dim || op.cols() != dim) throw std::invalid_argument("dense operator has wrong shape");

  // Coefficients on the matrix-unit product basis, site 1 most significant.
  const long total = static_cast<long>(dim) * dim;
  Vector coeff(total);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    int row = 0, col = 0, pw = 1;
    for (int k = 0; k < length; ++k) {
      const int a = static_cast<int>(rem % D);
      rem /= D;
      row += (a / d) * pw;
      col += (a % d) * pw;
      pw *= d;
    }
    coeff(idx) = op(row, col) / std::sqrt(dim_f);
  }
  const double norm = coeff.norm();
  if (norm == 0.0) throw std::invalid_argument("zero operator");
  coeff /= norm;

  VectorizedMPO mpo;
  mpo.length = length;
  mpo.kind = kind;
  mpo.group = ChargeGroup::None;
  mpo.norm_log = std::log(norm);
  mpo.sites.resize(length);
  mpo.bonds.assign(length + 1, trivial_bond(0));

  // Right-to-left sweep: right-canonical B tensors (dense, as vectors of D matrices).
  std::vector<std::vector<Matrix>> b(length);
  long prefix = total / D;
  int n_right = 1;
  Matrix rest(prefix, D);
  for (long p = 0; p < prefix; ++p)
    for (int a = 0; a < D; ++a) rest(p, a) = coeff(p * D + a);
  for (int k = length - 1; k >= 1; --k) {
    const auto f = linalg::svd(rest);
    const double smax = f.s.size() ? f.s(0) : 0.0;
    int keep = 0;
    while (keep < f.s.size() && f.s(keep) > 1e-14 * smax) ++keep;
    b[k].assign(D, Matrix(keep, n_right));
    for (int a = 0; a < D; ++a)
      for (int r = 0; r < n_right; ++r)
        for (int l = 0; l < keep; ++l) b[k][a](l, r) = std::conj(f.v(a * n_right + r, l));
    const Matrix us = f.u.leftCols(keep) * f.s.head(keep).asDiagonal();
    prefix /= D;
    Matrix next(prefix, static_cast<long>(D) * keep);
    for (long p = 0; p < prefix; ++p)
      for (int a = 0; a < D; ++a)
        for (int l = 0; l < keep; ++l) next(p, a * keep + l) = us(p * D + a, l);
    rest = std::move(next);
    n_right = keep;
  }
  b[0].assign(D, Matrix(1, n_right));
  for (int a = 0; a < D; ++a)
    for (int r = 0; r < n_right; ++r) b[0][a](0, r) = rest(0, a * n_right + r);

  // Left-to-right sweep to expose the Schmidt values at each bond.
  Eigen::VectorXd lam_left = Eigen::VectorXd::Ones(1);
  for (int k = 0; k + 1 < length; ++k) {
    const long nl = b[k][0].rows();
    const long nr = b[k][0].cols();
    Matrix theta(nl * D, nr);
    for (int a = 0; a < D; ++a)
      for (long l = 0; l < nl; ++l) theta.row(l * D + a) = lam_left(l) * b[k][a].row(l);
    const auto f = linalg::svd(theta);
    int keep = 0;
    while (keep < f.s.size() && f.s(keep) > 1e-14 * f.s(0)) ++keep;
    const Matrix v = f.v.leftCols(keep);
    for (int a = 0; a < D; ++a) {
      b[k][a] = (b[k][a] * v).eval();
      b[k + 1][a] = (v.adjoint() * b[k + 1][a]).eval();
    }
    lam_left = f.s.head(keep) / f.s.head(keep).norm();
    mpo.bonds[k + 1].sectors[0] = lam_left;
  }
  for (int k = 0; k < length; ++k)
    for (int a = 0; a < D; ++a)
      if (b[k][a].cwiseAbs().maxCoeff() > 0.0) mpo.sites[k].blocks[{0, a}] = b[k][a];
  return mpo;
}

Matrix to_dense(const VectorizedMPO& mpo) {
  const int d = local_dim(mpo.kind);
  const int D = d * d;
  const double dim_f = std::pow(static_cast<double>(d), mpo.length);
  if (dim_f > 1024.0) throw std::invalid_argument("operator too large for dense reconstruction");
  const auto q = local_charges(mpo);

  // env[charge]: rows = prefix configurations of local indices, cols = bond index.
  std::map<int, Matrix> env;
  env[0] = Matrix::Ones(1, 1);
  long prefix = 1;
  for (int k = 0; k < mpo.length; ++k) {
    std::map<int, Matrix> next;
    for (const auto& [qr, lam] : mpo.bonds[k + 1].sectors) next[qr] = Matrix::Zero(prefix * D, lam.size());
    for (const auto& [key, block] : mpo.sites[k].blocks) {
      const auto [ql, a] = key;
      const auto it = env.find(ql);
      if (it == env.end()) continue;
      Matrix& out = next.at(reduce_charge(mpo.group, ql + q[a]));
      const Matrix contrib = it->second * block;
      for (long p = 0; p < prefix; ++p) out.row(p * D + a) += contrib.row(p);
    }
    env = std::move(next);
    prefix *= D;
  }
  Vector coeff = Vector::Zero(prefix);
  for (const auto& [qq, m] : env) coeff += m.col(0);

  const int dim = static_cast<int>(dim_f);
  Matrix op(dim, dim);
  const double factor = std::sqrt(dim_f) * std::exp(mpo.norm_log);
  for (long idx = 0; idx < prefix; ++idx) {
    long rem = idx;
    int row = 0, col = 0, pw = 1;
    for (int k = 0; k < mpo.length; ++k) {
      const int a = static_cast<int>(rem % D);
      rem /= D;
      row += (a / d) * pw;
      col += (a % d) * pw;
      pw *= d;
    }
    op(row, col) = factor * coeff(idx);
  }
  return op;
}

SchmidtSpectrum schmidt_spectrum(const VectorizedMPO& mpo, int bond) {
  if (bond < 1 || bond >= mpo.length) throw std::out_of_range("bond index out of range");
  SchmidtSpectrum out{bond, {}};
  for (const auto& [q, v] : mpo.bonds[bond].sectors)
    for (Eigen::Index k = 0; k < v.size(); ++k) out.values.push_back(v(k) * v(k));
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

double renyi_entropy(const std::vector<double>& spectrum, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("Renyi index must be positive and finite");
  if (alpha == 1.0) {
    double s = 0.0;
    for (double l : spectrum)
      if (l > 0.0) s -= l * std::log2(l);
    return s;
  }
  double sum = 0.0;
  for (double l : spectrum)
    if (l > 0.0) sum += std::pow(l, alpha);
  return std::log2(sum) / (1.0 - alpha);
}

double renyi_entropy(const SchmidtSpectrum& spectrum, double alpha) { return renyi_entropy(spectrum.values, alpha); }

cplx normalized_overlap(const VectorizedMPO& a, const VectorizedMPO& b) {
  if (a.length != b.length || a.kind != b.kind) throw std::invalid_argument("overlap of operators on different chains");
  const auto qa = local_charges(a);
  const auto qb = local_charges(b);
  std::map<std::pair<int, int>, Matrix> env;
  env[{0, 0}] = Matrix::Ones(1, 1);
  for (int k = 0; k < a.length; ++k) {
    std::map<std::pair<int, int>, Matrix> next;
    const auto& sa = a.sites[k].blocks;
    const auto& sb = b.sites[k].blocks;
    for (const auto& [charges, e] : env) {
      const auto [ca, cb] = charges;
      for (auto it = sa.lower_bound({ca, 0}); it != sa.end() && it->first.first == ca; ++it) {
        const int x = it->first.second;
        const auto jt = sb.find({cb, x});
        if (jt == sb.end()) continue;
        const std::pair<int, int> key{reduce_charge(a.group, ca + qa[x]), reduce_charge(b.group, cb + qb[x])};
        Matrix contrib = it->second.adjoint() * e * jt->second;
        auto [pos, inserted] = next.try_emplace(key, std::move(contrib));
        if (!inserted) pos->second += it->second.adjoint() * e * jt->second;
      }
    }
    env = std::move(next);
  }
  cplx total = 0.0;
  for (const auto& [key, e] : env) total += e.sum();
  return total;
}

cplx overlap(const VectorizedMPO& a, const VectorizedMPO& b) {
  return normalized_overlap(a, b) * std::exp(a.norm_log + b.norm_log);
}

CanonicalError canonical_error(const VectorizedMPO& mpo) {
  CanonicalError err;
  const auto q = local_charges(mpo);
  for (int k = 0; k < mpo.length; ++k) {
    const Bond& left = mpo.bonds[k];
    const Bond& right = mpo.bonds[k + 1];
    std::map<int, Matrix> rsum, lsum;
    for (const auto& [ql, lam] : left.sectors) rsum[ql] = Matrix::Zero(lam.size(), lam.size());
    for (const auto& [qr, lam] : right.sectors) lsum[qr] = Matrix::Zero(lam.size(), lam.size());
    for (const auto& [key, block] : mpo.sites[k].blocks) {
      const auto [ql, a] = key;
      const int qr = reduce_charge(mpo.group, ql + q[a]);
      rsum.at(ql) += block * block.adjoint();
      const Eigen::VectorXd& lam_l = left.sectors.at(ql);
      lsum.at(qr) += block.adjoint() * lam_l.cwiseAbs2().asDiagonal() * block;
    }
    for (const auto& [ql, m] : rsum) {
      const Eigen::VectorXd& lam = left.sectors.at(ql);
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          if (lam(i) < 1e-8 || lam(j) < 1e-8) continue;
          err.right = std::max(err.right, std::abs(m(i, j) - (i == j ? 1.0 : 0.0)));
        }
    }
    for (const auto& [qr, m] : lsum) {
      const Eigen::VectorXd& lam = right.sectors.at(qr);
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          if (lam(i) < 1e-8 || lam(j) < 1e-8) continue;
          const cplx target = (i == j) ? cplx(lam(i) * lam(i)) : cplx(0.0);
          err.left = std::max(err.left, std::abs(m(i, j) - target) / (lam(i) * lam(j)));
        }
    }
  }
  return err;
}

namespace detail {

GateOutcome apply_gate_local(VectorizedMPO& mpo, int bond, const TwoSiteSuperGate& gate,
                             const TruncationPolicy& policy) {
  if (bond < 1 || bond >= mpo.length) throw std::out_of_range("gate bond out of range");
  if (gate.kind() != mpo.kind) throw std::invalid_argument("gate and operator have different local spaces");
  const auto& blocking = gate.blocking(mpo.group);
  if (!blocking.valid) throw std::invalid_argument("gate does not conserve the operator's charge grouping");

  const ChargeGroup group = mpo.group;
  const int D = mpo.local_size();
  const auto q = local_charges(mpo);
  const Bond& left = mpo.bonds[bond - 1];
  const Bond& right = mpo.bonds[bond + 1];
  SiteTensor& site_l = mpo.sites[bond - 1];
  SiteTensor& site_r = mpo.sites[bond];

  // theta[(ql, qr)]: columns = pairs of the gate block, rows = (l, r) column-major.
  std::map<std::pair<int, int>, Matrix> theta;
  for (const auto& [ql, lam_l] : left.sectors) {
    for (const auto& [qr, lam_r] : right.sectors) {
      const auto bit = blocking.blocks.find(reduce_charge(group, qr - ql));
      if (bit == blocking.blocks.end()) continue;
      const auto& pairs = bit->second.pairs;
      const long nl = lam_l.size(), nr = lam_r.size();
      Matrix t = Matrix::Zero(nl * nr, static_cast<long>(pairs.size()));
      bool any = false;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs[p];
        const int qm = reduce_charge(group, ql + q[a]);
        const auto it_l = site_l.blocks.find({ql, a});
        if (it_l == site_l.blocks.end()) continue;
        const auto it_r = site_r.blocks.find({qm, b});
        if (it_r == site_r.blocks.end()) continue;
        Eigen::Map<Matrix>(t.col(p).data(), nl, nr).noalias() = it_l->second * it_r->second;
        any = true;
      }
      if (!any) continue;
      theta.emplace(std::pair{ql, qr}, t * bit->second.matrix.transpose());
    }
  }

  // A run of rows (ql, a) or columns (b, qr) inside one middle-charge sector.
  struct Group {
    long offset;
    long size;
    int a_or_b;
    int other_charge;  // ql for rows, qr for columns
  };
  struct Sector {
    std::vector<Group> rows, cols;
    Matrix m;
    linalg::Svd f;
  };
  std::map<int, Sector> middle;
  for (const auto& [ql, lam_l] : left.sectors)
    for (int a = 0; a < D; ++a) {
      auto& s = middle[reduce_charge(group, ql + q[a])];
      const long off = s.rows.empty() ? 0 : s.rows.back().offset + s.rows.back().size;
      s.rows.push_back({off, static_cast<long>(lam_l.size()), a, ql});
    }
  for (auto& [qm, s] : middle)
    for (int b = 0; b < D; ++b) {
      const int qr = reduce_charge(group, qm + q[b]);
      const int nr = right.dim(qr);
      if (nr == 0) continue;
      const long off = s.cols.empty() ? 0 : s.cols.back().offset + s.cols.back().size;
      s.cols.push_back({off, nr, b, qr});
    }

  struct Candidate {
    double s;
    int charge;
    int index;
  };
  std::vector<Candidate> candidates;
  for (auto it = middle.begin(); it != middle.end();) {
    auto& [qm, s] = *it;
    if (s.cols.empty()) {
      it = middle.erase(it);
      continue;
    }
    const long nrow = s.rows.back().offset + s.rows.back().size;
    const long ncol = s.cols.back().offset + s.cols.back().size;
    s.m = Matrix::Zero(nrow, ncol);
    bool any = false;
    for (const auto& rg : s.rows)
      for (const auto& cg : s.cols) {
        const auto tt = theta.find({rg.other_charge, cg.other_charge});
        if (tt == theta.end()) continue;
        const int p = blocking.position[rg.a_or_b * D + cg.a_or_b];
        s.m.block(rg.offset, cg.offset, rg.size, cg.size) =
            Eigen::Map<const Matrix>(tt->second.col(p).data(), rg.size, cg.size);
        any = true;
      }
    if (!any) {
      it = middle.erase(it);
      continue;
    }
    Matrix scaled = s.m;
    for (const auto& rg : s.rows)
      scaled.middleRows(rg.offset, rg.size) = left.sectors.at(rg.other_charge).asDiagonal() *
                                              s.m.middleRows(rg.offset, rg.size);
    s.f = linalg::svd(scaled);
    for (Eigen::Index k = 0; k < s.f.s.size(); ++k)
      if (s.f.s(k) > 0.0) candidates.push_back({s.f.s(k), qm, static_cast<int>(k)});
    ++it;
  }
  if (candidates.empty()) throw std::runtime_error("gate application produced a zero operator");

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.s != y.s) return x.s > y.s;
    if (x.charge != y.charge) return x.charge < y.charge;
    return x.index < y.index;
  });
  // Values below the numerical rank threshold are noise, whatever the cutoff.
  const double floor = candidates.front().s * kNoiseFloor;
  while (candidates.size() > 1 && candidates.back().s <= floor) candidates.pop_back();
  double total = 0.0;
  for (const auto& c : candidates) total += c.s * c.s;

  std::size_t keep = 0;
  while (keep < candidates.size() && keep < static_cast<std::size_t>(policy.chi_max) &&
         (keep == 0 || candidates[keep].s * candidates[keep].s / total > policy.cutoff))
    ++keep;

  GateOutcome out;
  double kept_weight = 0.0;
  for (std::size_t k = 0; k < keep; ++k) kept_weight += candidates[k].s * candidates[k].s;
  out.discarded = std::max(0.0, 1.0 - kept_weight / total);
  if (keep < candidates.size() && keep == static_cast<std::size_t>(policy.chi_max)) {
    const double gap = (candidates[keep - 1].s * candidates[keep - 1].s - candidates[keep].s * candidates[keep].s) / total;
    out.degenerate_cut = gap < 1e-12;
  }

  std::map<int, int> kept_per_sector;
  for (std::size_t k = 0; k < keep; ++k) ++kept_per_sector[candidates[k].charge];
  const double norm = std::sqrt(kept_weight);

  Bond mid;
  SiteTensor new_l, new_r;
  for (const auto& [qm, k] : kept_per_sector) {
    const Sector& s = middle.at(qm);
    mid.sectors[qm] = s.f.s.head(k) / norm;
    const Matrix v = s.f.v.leftCols(k);
    for (const auto& cg : s.cols) {
      Matrix block = v.middleRows(cg.offset, cg.size).adjoint();
      if (block.cwiseAbs().maxCoeff() > 0.0) new_r.blocks.emplace(std::pair{qm, cg.a_or_b}, std::move(block));
    }
    const Matrix mv = s.m * v / norm;
    for (const auto& rg : s.rows) {
      Matrix block = mv.middleRows(rg.offset, rg.size);
      if (block.cwiseAbs().maxCoeff() > 0.0)
        new_l.blocks.emplace(std::pair{rg.other_charge, rg.a_or_b}, std::move(block));
    }
  }
  out.kept = mid.dim();
  mpo.bonds[bond] = std::move(mid);
  site_l = std::move(new_l);
  site_r = std::move(new_r);
  return out;
}

}  // namespace detail

GateOutcome apply_two_site_gate(VectorizedMPO& mpo, int bond, const TwoSiteSuperGate& gate,
                                const TruncationPolicy& policy) {
  policy.validate();
  const auto out = detail::apply_gate_local(mpo, bond, gate, policy);
  mpo.discarded_weight += out.discarded;
  if (out.degenerate_cut) ++mpo.degenerate_cuts;
  return out;
}

}  // namespace hpte
