#include "liftguard/lift.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "liftguard/errors.hpp"
#include "liftguard/plants.hpp"
#include "liftguard/zeros.hpp"

namespace liftguard {
namespace {

bool has_unit_zero(const ZeroReport& r) {
  for (const ZeroRecord& z : r.zeros)
    if (std::abs(z.z - 1.0) <= 1e-6) return true;
  return false;
}

TEST(BuildLifted, ScalarTwoStepFormula) {
  DiscretePlant fast;
  fast.system = {Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 2.0),
                 Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, 0.5)};
  fast.period = 0.1;
  const LiftedSystem L = lift_discrete(fast, 2);
  EXPECT_DOUBLE_EQ(L.system.A(0, 0), 0.49);
  EXPECT_DOUBLE_EQ(L.system.B(0, 0), 2.0 + 0.7 * 2.0);
  EXPECT_DOUBLE_EQ(L.system.C(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(L.system.C(1, 0), 2.1);
  EXPECT_DOUBLE_EQ(L.system.D(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(L.system.D(1, 0), 6.5);
  EXPECT_DOUBLE_EQ(L.base_period, 0.2);
}

TEST(BuildLifted, RejectsSmallM) {
  try {
    build_lifted(integrator_chain(2), 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kArgument);
  }
}

TEST(BuildLiftedProperty, MatchesFastPlantSimulation) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    RandomPlantSpec spec;
    spec.states = 1 + trial % 5;
    spec.inputs = 1 + trial % 2;
    spec.outputs = 1 + (trial / 2) % 2;
    spec.feedthrough = trial % 3 == 0;
    const int m = 2 + trial % 4;
    const LiftedSystem L = build_lifted(random_plant(rng, spec), 0.6, m);
    Vector x0(spec.states);
    for (auto& v : x0) v = nd(rng);
    Vector u(spec.inputs);
    for (auto& v : u) v = nd(rng);
    const auto fast = ss_response(L.fast_plant.system, std::vector<Vector>(m, u), x0);
    const auto lifted = ss_response(L.system, std::vector<Vector>(1, u), x0);
    for (int i = 0; i < m; ++i) {
      EXPECT_LT((fast[i] - lifted[0].segment(i * spec.outputs, spec.outputs)).norm(),
                1e-12 * (1 + fast[i].norm()));
    }
  }
}

TEST(BuildLifted, TripleIntegratorHasNoUnstableZeros) {
  std::mt19937_64 rng(2);
  const LiftedSystem L = build_lifted(integrator_chain(3), 1.0, 4);
  const ZeroReport r = transmission_zeros(L.system, rng);
  for (const ZeroRecord& z : r.zeros) {
    EXPECT_TRUE(std::abs(z.z) <= 1.0 + 1e-7 || std::abs(z.z - 1.0) <= 1e-6) << z.z;
  }
}

TEST(CheckAssumptions, Examples) {
  const LiftedSystem ok = build_lifted(integrator_chain(3), 1.0, 4);
  const AssumptionReport r = check_assumptions(ok);
  EXPECT_TRUE(r.b_full_rank);
  EXPECT_TRUE(r.obs_full_rank);
  EXPECT_EQ(r.obs_rank.singular_values.size(), 3);

  const AssumptionReport small = check_assumptions(build_lifted(integrator_chain(3), 1.0, 2));
  EXPECT_FALSE(small.obs_full_rank);
  EXPECT_EQ(small.obs_rank.rank, 1);

  Matrix B(2, 2);
  B << 1, 1, 2, 2;
  Matrix A(2, 2);
  A << -1, 0, 0, -2;
  const auto dup = make_continuous_plant(A, B, Matrix::Identity(2, 2), Matrix::Zero(2, 2));
  EXPECT_FALSE(check_assumptions(build_lifted(dup, 0.5, 3)).b_full_rank);
}

TEST(ChooseM, Examples) {
  const ChooseMResult siso = choose_m(integrator_chain(3), 1.0);
  EXPECT_GE(siso.m, 2);
  EXPECT_LE(siso.m, 4);
  EXPECT_TRUE(siso.report.satisfied());

  Matrix A(2, 2);
  A << 0, 1, -2, -3;
  const auto full_c = make_continuous_plant(A, Matrix::Ones(2, 1) * 0.5, Matrix::Identity(2, 2),
                                            Matrix::Zero(2, 1));
  EXPECT_EQ(choose_m(full_c, 0.3).m, 2);

  Matrix B(2, 2);
  B << 0, 0, 1, 1;
  const auto redundant = make_continuous_plant(A, B, Matrix::Identity(2, 2), Matrix::Zero(2, 2));
  try {
    choose_m(redundant, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kModel);
  }
}

TEST(ShiftConsistency, PassesAndCatchesCorruption) {
  std::mt19937_64 rng(3);
  LiftedSystem L = build_lifted(integrator_chain(3), 0.5, 4);
  const ShiftCheck good = shift_consistency_check(L, 5, rng, 50);
  EXPECT_TRUE(good.consistent);
  EXPECT_LE(good.worst_error, 1e-10);
  EXPECT_TRUE(shift_consistency_check(L, 1, rng, 1).consistent);

  L.system.D(2, 0) += 1e-3;
  const ShiftCheck bad = shift_consistency_check(L, 2, rng, 50);
  EXPECT_FALSE(bad.consistent);
}

TEST(StructuralIdentitiesProperty, DifferencingAndHoldSums) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    RandomPlantSpec spec;
    spec.states = 1 + trial % 6;
    spec.inputs = 1 + trial % 3;
    spec.outputs = 1 + (trial / 3) % 3;
    spec.feedthrough = trial % 2 == 0;
    const int m = 2 + trial % 5;
    const LiftedSystem L = build_lifted(random_plant(rng, spec), 0.4, m);
    const StateSpace& f = L.fast_plant.system;
    const Matrix X = differencing_matrix(m, f.outputs());
    const Matrix O = observability_stack(f, m);
    const Matrix I = Matrix::Identity(f.states(), f.states());
    EXPECT_LT((X * L.system.C - O * (I - f.A)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((X * L.system.D + O * f.B).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(((I - f.A) * L.system.B - (I - L.system.A) * f.B).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LiftedZerosProperty, LiftedZerosAreNotUnstable) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    RandomPlantSpec spec;
    spec.inputs = 1 + trial % 2;
    spec.states = spec.inputs + trial % 4;
    spec.outputs = spec.inputs + trial % 2;
    spec.max_real = 0.8;
    spec.period = 0.5;
    spec.rate = 5;
    const ContinuousPlant p = random_plant(rng, spec);
    const ChooseMResult cm = choose_m(p, 0.5);
    const LiftedSystem L = build_lifted(p, 0.5, cm.m);
    const ZeroReport r = transmission_zeros(L.system, rng);
    for (const ZeroRecord& z : r.zeros) {
      const bool at_one = std::abs(z.z - 1.0) <= 1e-6;
      EXPECT_TRUE(at_one || std::abs(z.z) <= 1.0 + 1e-7) << "trial " << trial << " z " << z.z;
    }
    const CoprimeFactors f = coprime_factorize(L.system);
    EXPECT_NE(multiplicity_at_one(f.Ntilde).verdict, AtOne::kMultiple);
    ++checked;
  }
  EXPECT_EQ(checked, 40);
}

TEST(LiftedUnitZero, ContinuousZeroAtOriginSurvivesLifting) {
  std::mt19937_64 rng(6);
  const ContinuousPlant p = second_order_with_zero(0.0);
  const LiftedSystem L = build_lifted(p, 0.5, 3);
  EXPECT_TRUE(has_unit_zero(transmission_zeros(L.fast_plant, rng)));
  EXPECT_TRUE(has_unit_zero(transmission_zeros(L.system, rng)));
  const CoprimeFactors f = coprime_factorize(L.system);
  EXPECT_EQ(multiplicity_at_one(f.Ntilde).verdict, AtOne::kSimple);

  const LiftedSystem L2 = build_lifted(second_order_with_zero(1.5), 0.5, 3);
  EXPECT_FALSE(has_unit_zero(transmission_zeros(L2.system, rng)));
}

TEST(LiftedUnitZero, FatPlantsAlwaysGainUnitZero) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    RandomPlantSpec spec;
    spec.states = 2 + trial % 4;
    spec.inputs = 2;
    spec.outputs = 1;
    const LiftedSystem L = build_lifted(random_plant(rng, spec), 0.5, 2 + trial % 3);
    EXPECT_TRUE(has_unit_zero(transmission_zeros(L.system, rng))) << trial;
  }
}

TEST(LiftSingleRateController, ReadsFirstSubSample) {
  Controller k;
  k.system = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 2.0),
              Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1)};
  const Controller lk = lift_single_rate_controller(k, 3);
  EXPECT_EQ(lk.kind, ControllerKind::kLifted);
  ASSERT_EQ(lk.system.B.cols(), 3);
  EXPECT_EQ(lk.system.B(0, 0), 2.0);
  EXPECT_EQ(lk.system.B(0, 1), 0.0);
  EXPECT_EQ(lk.system.B(0, 2), 0.0);
}

}  // namespace
}  // namespace liftguard
