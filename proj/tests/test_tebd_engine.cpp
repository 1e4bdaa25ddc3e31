#include "hpte/ed_oracle.hpp"
#include "hpte/linalg.hpp"
#include "hpte/super_gate.hpp"
#include "hpte/tebd_engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace hpte;

namespace {

VectorizedMPO product(OperatorName name, int site, int length, SpinKind kind = SpinKind::Half) {
  return from_product_operator(operator_factors({name, site}, kind, length), length, kind);
}

double parity_sum(const TrotterSchedule& s, BondParity p) {
  double sum = 0.0;
  for (const auto& sub : s.substeps)
    if (sub.parity == p) sum += sub.coefficient;
  return sum;
}

EvolveOptions options_until(double t_final, double every = 0.25) {
  EvolveOptions o;
  o.t_final = t_final;
  o.measure_every = every;
  return o;
}

}  // namespace

TEST(TebdEngine, SecondOrderSchedule) {
  const auto s = build_schedule(2, 0.1);
  ASSERT_EQ(s.substeps.size(), 3u);
  EXPECT_EQ(s.substeps[0].parity, BondParity::Even);
  EXPECT_EQ(s.substeps[1].parity, BondParity::Odd);
  EXPECT_EQ(s.substeps[2].parity, BondParity::Even);
  EXPECT_DOUBLE_EQ(s.substeps[0].coefficient, 0.5);
  EXPECT_DOUBLE_EQ(s.substeps[1].coefficient, 1.0);
  EXPECT_DOUBLE_EQ(s.substeps[2].coefficient, 0.5);
}

TEST(TebdEngine, FourthOrderScheduleIsPalindromic) {
  const auto s = build_schedule(4, 0.05);
  EXPECT_NEAR(parity_sum(s, BondParity::Even), 1.0, 1e-14);
  EXPECT_NEAR(parity_sum(s, BondParity::Odd), 1.0, 1e-14);
  const size_t n = s.substeps.size();
  for (size_t k = 0; k < n; ++k) {
    EXPECT_EQ(s.substeps[k].parity, s.substeps[n - 1 - k].parity);
    EXPECT_NEAR(s.substeps[k].coefficient, s.substeps[n - 1 - k].coefficient, 1e-15);
  }
  for (size_t k = 1; k < n; ++k) EXPECT_NE(s.substeps[k].parity, s.substeps[k - 1].parity);
}

TEST(TebdEngine, ScheduleErrors) {
  EXPECT_THROW(build_schedule(3, 0.1), std::invalid_argument);
  EXPECT_THROW(build_schedule(4, 0.0), std::invalid_argument);
  EXPECT_THROW(build_schedule(2, -0.1), std::invalid_argument);
  const auto r = time_reversed(build_schedule(4, 0.1));
  EXPECT_DOUBLE_EQ(r.dt, -0.1);
}

TEST(TebdEngine, GateIsUnitary) {
  for (auto kind : {SpinKind::Half, SpinKind::One}) {
    const TwoSiteSuperGate g(make_bond_hamiltonian(kind, 0.5), 0.137);
    const Matrix& m = g.bond_matrix();
    EXPECT_LT((m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff(), 1e-12);
    const Matrix h = g.in_basis(make_basis(kind));
    EXPECT_LT((h.adjoint() * h - Matrix::Identity(h.rows(), h.cols())).cwiseAbs().maxCoeff(), 1e-12);
    // Hermitian basis and real Hamiltonian: the conjugation map is real.
    EXPECT_LT(h.imag().cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TebdEngine, ZeroDurationGivesSingleRecord) {
  const auto result = evolve(product(OperatorName::Sz, 4, 8), make_bond_hamiltonian(SpinKind::Half, 1.0),
                             build_schedule(4, 0.05), options_until(0.0));
  ASSERT_EQ(result.records.size(), 1u);
  const auto& r = result.records.front();
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.itac, cplx(1.0, 0.0));
  for (int b = 1; b < 8; ++b) EXPECT_NEAR(r.entropy(2.0, b), 0.0, 1e-15);
  const auto check = check_entropy_bound(r, 2.0);
  EXPECT_TRUE(check.holds);
  EXPECT_NEAR(check.slack, 0.0, 1e-14);
}

TEST(TebdEngine, ItacMatchesExactAtXXPoint) {
  const int L = 8;
  const auto bond = make_bond_hamiltonian(SpinKind::Half, 0.0);
  const auto result = evolve(product(OperatorName::Sz, 4, L), bond, build_schedule(4, 0.05), options_until(1.0));
  const auto& last = result.records.back();
  ASSERT_NEAR(last.t, 1.0, 1e-12);
  const auto op = ed::from_spec({OperatorName::Sz, 4}, L, SpinKind::Half);
  const cplx exact = ed::itac_exact(op, ed::chain_hamiltonian(bond, L), 1.0);
  EXPECT_LT(std::abs(last.itac - exact), 1e-5);
}

TEST(TebdEngine, ObservablesMatchExactForSpinOne) {
  const int L = 4;
  const auto bond = make_bond_hamiltonian(SpinKind::One, 1.0);
  const auto result = evolve(product(OperatorName::SPlus, 2, L, SpinKind::One), bond, build_schedule(4, 0.05),
                             options_until(1.0, 0.5));
  const auto op = ed::normalized(ed::from_spec({OperatorName::SPlus, 2}, L, SpinKind::One));
  const ed::ExactPropagator prop(ed::chain_hamiltonian(bond, L));
  for (const auto& r : result.records) {
    const auto e = ed::measure_exact(prop.evolve(op, r.t), op, r.t, {1.0, 2.0});
    EXPECT_LT(std::abs(r.itac - e.itac), 1e-5);
    for (int b = 1; b < L; ++b) EXPECT_NEAR(r.entropy(2.0, b), e.entropy(2.0, b), 1e-5);
  }
}

TEST(TebdEngine, EntropyBoundHoldsAtXXPoint) {
  const auto result = evolve(product(OperatorName::Sz, 10, 20), make_bond_hamiltonian(SpinKind::Half, 0.0),
                             build_schedule(4, 0.05), options_until(5.0));
  for (const auto& r : result.records) EXPECT_TRUE(check_entropy_bound(r, 2.0).holds) << "t = " << r.t;
}

TEST(TebdEngine, EntropyBoundHasSlackForSpinOne) {
  EvolveOptions o = options_until(1.0, 0.5);
  o.alphas = {2.0, 3.0};
  const auto result = evolve(product(OperatorName::Sz, 3, 6, SpinKind::One), make_bond_hamiltonian(SpinKind::One, 1.0),
                             build_schedule(4, 0.05), o);
  for (const auto& r : result.records) {
    for (double alpha : {2.0, 3.0}) {
      const auto check = check_entropy_bound(r, alpha);
      EXPECT_TRUE(check.holds);
      if (r.t > 0.0) {
        EXPECT_GT(check.slack, 0.0);
      }
    }
  }
}

TEST(TebdEngine, BoundIsVacuousForVanishingAutocorrelation) {
  EXPECT_TRUE(std::isinf(entropy_bound_rhs(cplx(1e-13, 0.0), 2.0)));
  TimeSeriesRecord r;
  r.alphas = {2.0};
  r.entropies = {{3.0, 5.0}};
  r.itac = cplx(0.0, 1e-14);
  const auto check = check_entropy_bound(r, 2.0);
  EXPECT_TRUE(check.holds);
  EXPECT_TRUE(check.vacuous);
  r.itac = 0.9;
  EXPECT_FALSE(check_entropy_bound(r, 2.0).holds);
  EXPECT_THROW(check_entropy_bound(r, 1.0), std::invalid_argument);
}

TEST(TebdEngine, ReversedScheduleReturnsToInitialOperator) {
  const auto initial = product(OperatorName::Sx, 4, 8);
  const auto bond = make_bond_hamiltonian(SpinKind::Half, 0.5);
  EvolveOptions o = options_until(1.0);
  o.policy.chi_max = 1 << 12;
  o.policy.cutoff = 0.0;
  const auto forward = evolve(initial, bond, build_schedule(4, 0.05), o);
  o.t_final = 0.0;
  const auto back = evolve_from(forward.final_state, initial, 1.0, bond, time_reversed(build_schedule(4, 0.05)), o);
  EXPECT_NEAR(back.records.back().t, 0.0, 1e-12);
  EXPECT_GE(std::abs(back.records.back().itac), 1.0 - 1e-8);
}

TEST(TebdEngine, TotalMagnetizationIsConserved) {
  // The uniform sum of sz is not a product operator; build it densely on a small chain.
  const int L = 6;
  const auto bond = make_bond_hamiltonian(SpinKind::Half, 0.7);
  ed::DenseOperator total{L, SpinKind::Half, Matrix::Zero(64, 64)};
  for (int j = 1; j <= L; ++j) total.matrix += ed::from_spec({OperatorName::Sz, j}, L, SpinKind::Half).matrix;
  const auto h = ed::chain_hamiltonian(bond, L);
  EXPECT_LT((h.matrix * total.matrix - total.matrix * h.matrix).norm(), 1e-12);

  EvolveOptions o = options_until(2.0, 1.0);
  o.policy.cutoff = 0.0;
  const auto mpo = from_dense_operator(total.matrix, L, SpinKind::Half);
  const auto result = evolve(mpo, bond, build_schedule(4, 0.05), o);
  for (const auto& r : result.records) EXPECT_NEAR(std::abs(r.itac), 1.0, 1e-8);
}

TEST(TebdEngine, AbortOnDiscardedWeight) {
  EvolveOptions o = options_until(4.0, 0.5);
  o.policy.chi_max = 2;
  o.abort_discarded = 1e-6;
  const auto result = evolve(product(OperatorName::Sz, 4, 8), make_bond_hamiltonian(SpinKind::Half, 1.0),
                             build_schedule(4, 0.05), o);
  EXPECT_TRUE(result.aborted);
  EXPECT_FALSE(result.abort_reason.empty());
  EXPECT_LT(result.records.back().t, 4.0);
}

TEST(TebdEngine, ThreadCountDoesNotChangeResults) {
  const auto initial = product(OperatorName::Sx, 6, 12);
  const auto bond = make_bond_hamiltonian(SpinKind::Half, 0.5);
  EvolveOptions o = options_until(1.0, 0.5);
  o.policy.chi_max = 16;
  const auto serial = evolve(initial, bond, build_schedule(4, 0.05), o);
  o.threads = 4;
  const auto parallel = evolve(initial, bond, build_schedule(4, 0.05), o);
  ASSERT_EQ(serial.records.size(), parallel.records.size());
  for (size_t k = 0; k < serial.records.size(); ++k) {
    EXPECT_EQ(serial.records[k].itac, parallel.records[k].itac);
    EXPECT_EQ(serial.records[k].entropies, parallel.records[k].entropies);
    EXPECT_EQ(serial.records[k].discarded_weight, parallel.records[k].discarded_weight);
  }
}

TEST(TebdEngine, LightConeAdvisory) {
  EXPECT_DOUBLE_EQ(light_cone_time(40), 10.0);
  EXPECT_DOUBLE_EQ(light_cone_time(40, 4.0), 5.0);
}

TEST(TebdEngine, CheckpointResumeMatchesStraightRun) {
  const auto initial = product(OperatorName::Sz, 4, 8);
  const auto bond = make_bond_hamiltonian(SpinKind::Half, 1.0);
  const auto schedule = build_schedule(4, 0.05);
  const auto full = evolve(initial, bond, schedule, options_until(1.0));
  const auto half = evolve(initial, bond, schedule, options_until(0.5));

  const auto path = (std::filesystem::temp_directory_path() / "hpte_test_resume.ckpt").string();
  write_checkpoint(path, {0.5, half.final_state, initial});
  const auto ck = read_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(ck.t, 0.5);
  const auto resumed = evolve_from(ck.state, ck.initial, ck.t, bond, schedule, options_until(1.0));
  EXPECT_NEAR(resumed.records.back().t, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(resumed.records.back().itac - full.records.back().itac), 0.0, 1e-12);
  EXPECT_NEAR(resumed.records.back().entropy(2.0, 4), full.records.back().entropy(2.0, 4), 1e-12);
  EXPECT_THROW(read_checkpoint("/nonexistent/hpte.ckpt"), std::runtime_error);
}
