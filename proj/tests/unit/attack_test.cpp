#include "liftguard/attack.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "liftguard/errors.hpp"
#include "liftguard/plants.hpp"

namespace liftguard {
namespace {

constexpr double kTheta = 0.01;

ContinuousPlant scalar_plant(double a) {
  return make_continuous_plant(Matrix::Constant(1, 1, a), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                               Matrix::Zero(1, 1));
}

template <typename F>
void expect_error(ErrorKind kind, F&& f) {
  try {
    f();
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

SimTrace replay(LoopConfig loop, const AttackPlan& plan) {
  loop.attack = plan;
  loop.horizon = plan.horizon;
  return simulate(loop);
}

class TripleIntegrator : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    loop_ = new LoopConfig(make_loop(integrator_chain(3), 1.0, 1, kTheta, 200));
    std::mt19937_64 rng(1);
    plan_ = new AttackPlan(synth_actuator_attack(*loop_, rng));
  }
  static void TearDownTestSuite() {
    delete loop_;
    delete plan_;
  }
  static LoopConfig* loop_;
  static AttackPlan* plan_;
};
LoopConfig* TripleIntegrator::loop_ = nullptr;
AttackPlan* TripleIntegrator::plan_ = nullptr;

TEST_F(TripleIntegrator, PlanFollowsLargestNonMinimumPhaseZero) {
  const AttackPlan& p = *plan_;
  EXPECT_EQ(p.kind, AttackKind::kActuatorZero);
  // ZOH triple integrator: numerator z^2 + 4z + 1.
  EXPECT_NEAR(p.zeta.real(), -2.0 - std::sqrt(3.0), 1e-12);
  EXPECT_EQ(p.zeta.imag(), 0.0);
  EXPECT_NEAR(std::abs(p.direction(0)), 1.0, 1e-15);
  EXPECT_EQ(p.horizon, 200);
  EXPECT_TRUE(p.has_exact());
  EXPECT_GT(p.digits, 150);
  EXPECT_EQ(p.zeta_exact.re.substr(0, 12), "-3.732050807");
  EXPECT_GT(p.calibration.c0_hat, 0.0);
  EXPECT_DOUBLE_EQ(p.epsilon * p.calibration.c0_hat, p.calibration.expected_peak);
}

TEST_F(TripleIntegrator, ReplayIsStealthyAndUnbounded) {
  const SimTrace tr = replay(*loop_, *plan_);
  EXPECT_FALSE(tr.verdict.detected);
  EXPECT_LE(tr.verdict.peak, kTheta / 2);
  const double growth = std::abs(tr.d_a.back()(0)) / std::abs(tr.d_a.front()(0));
  EXPECT_GE(growth, 1e3);
  EXPECT_GE(growth_factor(*plan_), 1e3);
  EXPECT_GT(tr.digits, 100);
}

TEST_F(TripleIntegrator, PeakIsLinearInEpsilon) {
  AttackPlan a = *plan_, b = *plan_;
  a.epsilon = 1e-4;
  b.epsilon = 3e-4;
  const double pa = replay(*loop_, a).verdict.peak;
  const double pb = replay(*loop_, b).verdict.peak;
  EXPECT_NEAR(pb / pa, 3.0, 3e-6);
}

TEST_F(TripleIntegrator, PerturbedPlanIsDetected) {
  const SimTrace tr = replay(*loop_, perturbed(*plan_, 0.1));
  EXPECT_TRUE(tr.verdict.detected);
  EXPECT_LT(tr.verdict.step, plan_->horizon);
}

TEST_F(TripleIntegrator, DualRateReplayIsDetected) {
  const LoopConfig dual = make_loop(integrator_chain(3), 1.0, 4, kTheta, 200);
  const SimTrace tr = replay(dual, *plan_);
  EXPECT_TRUE(tr.verdict.detected);
  EXPECT_LT(tr.verdict.step, plan_->horizon);
}

TEST_F(TripleIntegrator, DualRateLoopHasNoActuatorPlan) {
  const LoopConfig dual = make_loop(integrator_chain(3), 1.0, 4, kTheta, 200);
  std::mt19937_64 rng(2);
  expect_error(ErrorKind::kCapability, [&] { synth_actuator_attack(dual, rng); });
}

TEST_F(TripleIntegrator, SynthesisIsDeterministic) {
  std::mt19937_64 rng(1);
  const AttackPlan again = synth_actuator_attack(*loop_, rng);
  EXPECT_EQ(again.zeta_exact.re, plan_->zeta_exact.re);
  EXPECT_EQ(again.direction_exact[0].re, plan_->direction_exact[0].re);
  EXPECT_EQ(again.epsilon, plan_->epsilon);
}

TEST(SynthActuatorAttack, DoubleIntegratorIsNotVulnerable) {
  const LoopConfig loop = make_loop(integrator_chain(2), 0.5, 1, kTheta, 200);
  std::mt19937_64 rng(3);
  try {
    synth_actuator_attack(loop, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapability);
    EXPECT_STREQ(e.what(), "plant not vulnerable on requested channel");
  }
}

TEST(SynthActuatorAttack, ComplexZeroPairGivesRealStealthySignal) {
  // (s^2 - 2s + 5) / (s + 1)^3: right-half-plane zeros 1 +- 2i.
  Matrix A(3, 3);
  A << 0, 1, 0, 0, 0, 1, -1, -3, -3;
  Matrix B = Matrix::Zero(3, 1);
  B(2, 0) = 1;
  Matrix C(1, 3);
  C << 5, -2, 1;
  const LoopConfig loop = make_loop(make_continuous_plant(A, B, C, Matrix::Zero(1, 1)), 0.3, 1,
                                    kTheta, 200);
  std::mt19937_64 rng(4);
  const AttackPlan p = synth_actuator_attack(loop, rng);
  EXPECT_NE(p.zeta.imag(), 0.0);
  EXPECT_GT(std::abs(p.zeta), 1.0);
  const StateSpace G = loop_plant(loop);
  EXPECT_LT(std::abs(G.evaluate(p.zeta)(0, 0)), 1e-12 * std::abs(G.evaluate(1.1 * p.zeta)(0, 0)));
  const SimTrace tr = replay(loop, p);
  EXPECT_FALSE(tr.verdict.detected);
  EXPECT_LE(tr.verdict.peak, kTheta / 2);
  EXPECT_GE(growth_factor(p), 1e3);
}

/// Continuous plant whose ZOH discretization at T is
/// (z - 1)^2 / ((z - 0.5)(z - 0.6)(z - 0.7)).
ContinuousPlant double_unit_zero_plant(double T) {
  const double p[3] = {0.5, 0.6, 0.7};
  Matrix Ac = Matrix::Zero(3, 3), Bc(3, 1), Cc(1, 3);
  for (int i = 0; i < 3; ++i) {
    double den = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) den *= p[i] - p[j];
    const double a = std::log(p[i]) / T;
    Ac(i, i) = a;
    Bc(i, 0) = a / (p[i] - 1.0);
    Cc(0, i) = (p[i] - 1.0) * (p[i] - 1.0) / den;
  }
  return make_continuous_plant(Ac, Bc, Cc, Matrix::Zero(1, 1));
}

TEST(SynthActuatorAttack, MultipleZeroAtOneGivesRamp) {
  const LoopConfig loop = make_loop(double_unit_zero_plant(0.5), 0.5, 1, kTheta, 200);
  const StateSpace G = loop_plant(loop);
  EXPECT_LT(std::abs(G.evaluate(1.0)(0, 0)), 1e-12);
  std::mt19937_64 rng(5);
  const AttackPlan p = synth_actuator_attack(loop, rng);
  EXPECT_EQ(p.shape, SignalShape::kRamp);
  EXPECT_EQ(p.horizon, 2000);
  const SimTrace tr = replay(loop, p);
  EXPECT_FALSE(tr.verdict.detected);
  EXPECT_LE(tr.verdict.peak, kTheta / 2);
  EXPECT_GE(std::abs(tr.d_a.back()(0)), 1e3 * std::abs(tr.d_a.front()(0)));
}

TEST(SynthActuatorAttack, SimpleZeroAtOneIsNotVulnerable) {
  // s^2 / ((s + 1)(s + 2)(s + 3)) samples to a simple zero at z = 1 and a
  // real zero outside the unit circle; only the latter carries a plan.
  Matrix A(3, 3);
  A << 0, 1, 0, 0, 0, 1, -6, -11, -6;
  Matrix B = Matrix::Zero(3, 1);
  B(2, 0) = 1;
  Matrix C(1, 3);
  C << 0, 0, 1;
  const LoopConfig loop = make_loop(make_continuous_plant(A, B, C, Matrix::Zero(1, 1)), 0.5, 1,
                                    kTheta, 200);
  std::mt19937_64 rng(5);
  const AttackPlan p = synth_actuator_attack(loop, rng);
  EXPECT_EQ(p.shape, SignalShape::kGeometric);
  EXPECT_GT(p.zeta.real(), 1.0);
  EXPECT_NEAR(p.zeta.imag(), 0.0, 0.0);
}

TEST(SynthSensorAttack, ScalarUnstablePlant) {
  const LoopConfig loop = make_loop(scalar_plant(1.0), std::numbers::ln2, 1, kTheta, 200);
  const AttackPlan p = synth_sensor_attack(loop);
  EXPECT_EQ(p.kind, AttackKind::kSensorPole);
  EXPECT_NEAR(p.zeta.real(), 2.0, 1e-13);
  EXPECT_EQ(p.horizon, 200);
  const SimTrace tr = replay(loop, p);
  EXPECT_FALSE(tr.verdict.detected);
  EXPECT_LE(tr.verdict.peak, kTheta / 2);
  EXPECT_GE(std::abs(tr.d_s.back()(0)) / std::abs(tr.d_s.front()(0)), 1e3);
  // The physical output is driven away while the measurement stays quiet.
  EXPECT_GT(std::abs(tr.y_plant.back()(0)), 1e3);
}

TEST(SynthSensorAttack, DualRateLoopStaysVulnerable) {
  const LoopConfig loop = make_loop(scalar_plant(1.0), std::numbers::ln2, 2, kTheta, 200);
  const AttackPlan p = synth_sensor_attack(loop);
  EXPECT_NEAR(p.zeta.real(), std::sqrt(2.0), 1e-13);
  const SimTrace tr = replay(loop, p);
  EXPECT_FALSE(tr.verdict.detected);
  EXPECT_LE(tr.verdict.peak, kTheta / 2);
}

TEST(SynthSensorAttack, StableAndIntegratorPlantsAreNotVulnerable) {
  const LoopConfig stable = make_loop(scalar_plant(-1.0), 0.5, 1, kTheta, 200);
  expect_error(ErrorKind::kCapability, [&] { synth_sensor_attack(stable); });
  const LoopConfig integrator = make_loop(scalar_plant(0.0), 0.5, 1, kTheta, 200);
  expect_error(ErrorKind::kCapability, [&] { synth_sensor_attack(integrator); });
}

TEST(SynthCoordinatedAttack, ZeroInputGivesZeroCompanion) {
  const StateSpace p = discretize(integrator_chain(2), 0.5).system;
  const std::vector<Vector> d_a(20, Vector::Zero(1));
  const SignalPair s = synth_coordinated_attack(p, d_a);
  for (const Vector& d : s.second) EXPECT_EQ(d.norm(), 0.0);
}

TEST(SynthCoordinatedAttack, RampIsMaskedOnStablePlants) {
  for (double a : {-1.0, -0.2}) {
    LoopConfig loop = make_loop(scalar_plant(a), 0.5, 1, kTheta, 500);
    loop.x0_plant = Vector::Constant(1, 0.3);
    const SimTrace base = simulate(loop);
    std::vector<Vector> d_a;
    for (int k = 0; k < 500; ++k) d_a.push_back(Vector::Constant(1, k));
    const SignalPair s = synth_coordinated_attack(loop_plant(loop), d_a);
    LoopConfig attacked = loop;
    attacked.d_a = s.first;
    attacked.d_s = s.second;
    const SimTrace tr = simulate(attacked);
    double dev = 0.0;
    for (std::size_t j = 0; j < tr.y.size(); ++j) dev = std::max(dev, (tr.y[j] - base.y[j]).norm());
    EXPECT_LE(dev, 1e-10) << a;
  }
}

TEST(CoordinatedPlan, RampPlanIsMaskedOnUnstablePlant) {
  LoopConfig loop = make_loop(scalar_plant(1.0), 0.5, 1, kTheta, 500);
  loop.x0_plant = Vector::Constant(1, 0.003);
  const SimTrace base = simulate(loop);
  AttackPlan p = coordinated_plan(loop);
  p.horizon = 500;
  loop.attack = p;
  const SimTrace tr = simulate(loop);
  double dev = 0.0;
  for (std::size_t j = 0; j < tr.y.size(); ++j) dev = std::max(dev, (tr.y[j] - base.y[j]).norm());
  EXPECT_LE(dev, 1e-10);
  EXPECT_GT(std::abs(tr.y_plant.back()(0)), 1e50);
}

TEST(CoordinatedPlan, GeometricPlanIsMaskedInDualRate) {
  LoopConfig loop = make_loop(integrator_chain(2), 0.5, 3, kTheta, 300);
  const SimTrace base = simulate(loop);
  const AttackPlan p = coordinated_plan(loop, SignalShape::kGeometric, 1.0, Complex(1.1, 0.0));
  loop.attack = p;
  const SimTrace tr = simulate(loop);
  EXPECT_FALSE(tr.verdict.detected);
  double dev = 0.0;
  for (std::size_t j = 0; j < tr.y.size(); ++j) dev = std::max(dev, (tr.y[j] - base.y[j]).norm());
  EXPECT_LE(dev, 1e-10);
  EXPECT_GT(std::abs(tr.d_a.back()(0)), 1e10);
}

TEST(SynthFatMasking, IdenticalChannelsCancelExactly) {
  StateSpace p;
  p.A = Matrix::Constant(1, 1, 0.8);
  p.B = Matrix::Constant(1, 2, 0.5);
  p.C = Matrix::Ones(1, 1);
  p.D = Matrix::Zero(1, 2);
  std::vector<double> d1;
  for (int k = 0; k < 50; ++k) d1.push_back(std::pow(1.05, k));
  const FatMasking f = synth_fat_masking(p, d1);
  EXPECT_EQ(f.delay, 0);
  for (int k = 0; k < 50; ++k) {
    EXPECT_EQ(f.d1[k], d1[k]);
    EXPECT_EQ(f.d2[k], -d1[k]);
  }
  const FatMasking z = synth_fat_masking(p, std::vector<double>(10, 0.0));
  for (double v : z.d2) EXPECT_EQ(v, 0.0);
}

TEST(SynthFatMaskingProperty, RandomBiproperPlantsStayQuiet) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    RandomPlantSpec spec;
    spec.states = 1 + trial % 4;
    spec.inputs = 2;
    spec.outputs = 1;
    spec.feedthrough = true;
    const StateSpace p = discretize(random_plant(rng, spec), 0.5).system;
    std::vector<double> d1;
    for (int k = 0; k < 100; ++k) d1.push_back(std::pow(1.05, k));
    const FatMasking f = synth_fat_masking(p, d1);
    std::vector<Vector> input;
    double scale = 1.0;
    for (int k = 0; k < 100; ++k) {
      input.push_back(Vector::Zero(2));
      input.back() << f.d1[k], f.d2[k];
      scale = std::max(scale, input.back().cwiseAbs().maxCoeff());
    }
    double dev = 0.0;
    for (const Vector& y : ss_response(p, input)) dev = std::max(dev, std::abs(y(0)));
    EXPECT_LE(dev, 1e-8 * std::max(1.0, scale / 1e6)) << trial;
  }
}

TEST(SynthFatMasking, StrictlyProperChannelDelaysFreeSignal) {
  StateSpace p;
  p.A = Matrix(2, 2);
  p.A << 0.5, 1, 0, 0.3;
  p.B = Matrix(2, 2);
  p.B << 1, 0, 0, 1;
  p.C = Matrix(1, 2);
  p.C << 1, 0;
  p.D = Matrix(1, 2);
  p.D << 0.4, 0.0;
  std::vector<double> d1(30, 1.0);
  const FatMasking f = synth_fat_masking(p, d1);
  EXPECT_EQ(f.delay, 2);
  EXPECT_EQ(f.d1[0], 0.0);
  EXPECT_EQ(f.d1[2], 1.0);
  std::vector<Vector> input;
  for (int k = 0; k < 30; ++k) {
    input.push_back(Vector::Zero(2));
    input.back() << f.d1[k], f.d2[k];
  }
  for (const Vector& y : ss_response(p, input)) EXPECT_LT(std::abs(y(0)), 1e-12);
}

TEST(SynthFatMasking, Errors) {
  StateSpace p;
  p.A = Matrix::Constant(1, 1, 0.5);
  p.B = Matrix(1, 2);
  p.B << 1, 0;
  p.C = Matrix::Ones(1, 1);
  p.D = Matrix::Zero(1, 2);
  expect_error(ErrorKind::kCapability, [&] { synth_fat_masking(p, std::vector<double>(5, 1.0)); });

  // Non-minimum-phase masking channel: the inverse filter runs away.
  p.B << 1, 1;
  p.D << 0, 1;
  p.C(0, 0) = -40.0;
  std::vector<double> d1(400, 1.0);
  try {
    synth_fat_masking(p, d1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
    EXPECT_NE(e.detail().find("step="), std::string::npos);
  }
}

TEST(FatMaskingPlan, SingleRateStealthyDualRateDetected) {
  Matrix A(2, 2);
  A << -1, 0, 0, -2;
  const ContinuousPlant p =
      make_continuous_plant(A, Matrix::Identity(2, 2), Matrix::Ones(1, 2), Matrix::Zero(1, 2));
  const LoopConfig single = make_loop(p, 0.5, 1, kTheta, 200);
  std::mt19937_64 rng(7);
  const AttackPlan plan = synth_actuator_attack(single, rng);
  EXPECT_EQ(plan.kind, AttackKind::kFatMasking);
  const SimTrace tr = replay(single, plan);
  EXPECT_FALSE(tr.verdict.detected);
  EXPECT_LE(tr.verdict.peak, 1e-8);
  EXPECT_GE(std::abs(tr.d_a.back()(0)), 1e3 * plan.epsilon);

  LoopConfig dual = make_loop(p, 0.5, 2, kTheta, 200);
  EXPECT_TRUE(replay(dual, plan).verdict.detected);
}

TEST(DefaultHorizon, Examples) {
  EXPECT_EQ(default_horizon(Complex(-3.732, 0)), 200);
  EXPECT_EQ(default_horizon(Complex(1.01, 0)), 695);
  expect_error(ErrorKind::kArgument, [] { default_horizon(Complex(0.5, 0)); });
}

}  // namespace
}  // namespace liftguard
