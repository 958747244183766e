#include "liftguard/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "liftguard/errors.hpp"
#include "liftguard/plants.hpp"

namespace liftguard {
namespace {

bool contains(const ZeroReport& r, Complex z, double tol) {
  return std::any_of(r.zeros.begin(), r.zeros.end(),
                     [&](const ZeroRecord& rec) { return std::abs(rec.z - z) <= tol; });
}

StateSpace scalar(double a, double b, double c, double d) {
  return {Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, c),
          Matrix::Constant(1, 1, d)};
}

/// SISO realization of (b1 z + b0) / (z^2 + a1 z + a0) + d in controllable form.
StateSpace second_order(double a1, double a0, double b1, double b0, double d) {
  StateSpace s;
  s.A.resize(2, 2);
  s.A << 0, 1, -a0, -a1;
  s.B.resize(2, 1);
  s.B << 0, 1;
  s.C.resize(1, 2);
  s.C << b0, b1;
  s.D = Matrix::Constant(1, 1, d);
  return s;
}

TEST(TransmissionZeros, DoubleIntegrator) {
  std::mt19937_64 rng(1);
  for (double T : {0.05, 0.5, 2.0}) {
    const ZeroReport r = transmission_zeros(discretize(integrator_chain(2), T), rng);
    ASSERT_EQ(r.zeros.size(), 1u);
    EXPECT_NEAR(std::abs(r.zeros[0].z - Complex(-1.0, 0.0)), 0.0, 1e-8);
    ASSERT_TRUE(r.zeros[0].lambda.has_value());
    EXPECT_NEAR(std::abs(*r.zeros[0].lambda - Complex(-1.0, 0.0)), 0.0, 1e-8);
    EXPECT_EQ(r.zeros[0].classification, ZeroClass::kBoundarySimple);
    EXPECT_EQ(r.shape, SystemShape::kSquare);
    EXPECT_EQ(r.infinite_zero_count.value(), 1);
  }
}

TEST(TransmissionZeros, TripleIntegrator) {
  // ZOH numerator of 1/s^3 is proportional to z^2 + 4 z + 1.
  std::mt19937_64 rng(2);
  const double r1 = -2.0 - std::sqrt(3.0), r2 = -2.0 + std::sqrt(3.0);
  for (double T : {0.1, 1.0, 2.5}) {
    const ZeroReport r = transmission_zeros(discretize(integrator_chain(3), T), rng);
    ASSERT_EQ(r.zeros.size(), 2u);
    EXPECT_NEAR(std::abs(r.zeros[0].z - r1), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(r.zeros[1].z - r2), 0.0, 1e-8);
    EXPECT_EQ(r.zeros[0].classification, ZeroClass::kNmpStrict);
    EXPECT_EQ(r.zeros[1].classification, ZeroClass::kMinimumPhase);
    EXPECT_NEAR(r.zeros[0].lambda->real(), 1.0 / r1, 1e-8);
  }
}

TEST(TransmissionZeros, ScalarWithFeedthrough) {
  std::mt19937_64 rng(3);
  const ZeroReport r = transmission_zeros(scalar(0.5, 1, 1, 1), rng);
  ASSERT_EQ(r.zeros.size(), 1u);
  EXPECT_NEAR(r.zeros[0].z.real(), -0.5, 1e-12);
  EXPECT_NEAR(r.zeros[0].lambda->real(), -2.0, 1e-11);
  EXPECT_EQ(r.zeros[0].classification, ZeroClass::kMinimumPhase);
  EXPECT_EQ(r.infinite_zero_count.value(), 0);
}

TEST(TransmissionZeros, ZeroAtOriginHasNoLambda) {
  // z / (z - 0.5)
  std::mt19937_64 rng(4);
  const ZeroReport r = transmission_zeros(scalar(0.5, 1, 0.5, 1), rng);
  ASSERT_EQ(r.zeros.size(), 1u);
  EXPECT_LT(std::abs(r.zeros[0].z), 1e-12);
  EXPECT_FALSE(r.zeros[0].lambda.has_value());
}

TEST(TransmissionZeros, RecordsSatisfyPencilResidual) {
  std::mt19937_64 rng(5);
  const ZeroReport r = transmission_zeros(discretize(integrator_chain(5), 0.3), rng);
  EXPECT_EQ(r.zeros.size(), 4u);
  for (const ZeroRecord& z : r.zeros) {
    EXPECT_LE(z.residual, 1e-6 * z.pencil_norm);
    EXPECT_NEAR(std::abs(*z.lambda * z.z - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(max_abs(z.input_direction), 1.0, 1e-15);
  }
}

TEST(TransmissionZeros, DirectionsSpanPencilNullSpace) {
  std::mt19937_64 rng(6);
  const StateSpace sys = discretize(integrator_chain(3), 1.0).system;
  const ZeroReport r = transmission_zeros(sys, rng);
  for (const ZeroRecord& z : r.zeros) {
    const CVector lhs = z.z * z.state_direction - sys.A.cast<Complex>() * z.state_direction -
                        sys.B.cast<Complex>() * z.input_direction;
    const CVector out = sys.C.cast<Complex>() * z.state_direction +
                        sys.D.cast<Complex>() * z.input_direction;
    EXPECT_LT(lhs.norm(), 1e-8 * (1 + z.state_direction.norm()));
    EXPECT_LT(out.norm(), 1e-8 * (1 + z.state_direction.norm()));
  }
}

TEST(TransmissionZeros, NonMinimalIsModelError) {
  StateSpace sys{Matrix::Identity(2, 2) * 0.5, Matrix::Ones(2, 1), Matrix::Ones(1, 2),
                 Matrix::Zero(1, 1)};
  std::mt19937_64 rng(7);
  try {
    transmission_zeros(sys, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kModel);
  }
}

TEST(TransmissionZerosProperty, SimilarityInvariance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    RandomPlantSpec spec;
    spec.states = 2 + trial % 5;
    spec.inputs = 1 + trial % 2;
    spec.outputs = spec.inputs;
    spec.feedthrough = trial % 3 == 0;
    const StateSpace sys = discretize(random_plant(rng, spec), 0.5).system;
    Matrix S(spec.states, spec.states);
    for (auto& v : S.reshaped()) v = nd(rng);
    S += 3.0 * Matrix::Identity(spec.states, spec.states);
    const Matrix Si = S.inverse();
    const StateSpace sim{Si * sys.A * S, Si * sys.B, sys.C * S, sys.D};
    const ZeroReport a = transmission_zeros(sys, rng);
    const ZeroReport b = transmission_zeros(sim, rng);
    ASSERT_EQ(a.zeros.size(), b.zeros.size());
    for (const ZeroRecord& z : a.zeros) {
      EXPECT_TRUE(contains(b, z.z, 1e-6 * std::max(1.0, std::abs(z.z)))) << z.z;
    }
  }
}

/// Tall system with a planted zero at z0: C and D are chosen so that the
/// pencil annihilates [xi; nu] with xi = (z0 I - A)^{-1} B nu.
StateSpace tall_with_zero(std::mt19937_64& rng, int n, int nu, int ny, double z0) {
  std::normal_distribution<double> nd;
  StateSpace s;
  s.A.resize(n, n);
  s.B.resize(n, nu);
  s.C.resize(ny, n);
  s.D.resize(ny, nu);
  for (auto* M : {&s.A, &s.B, &s.C, &s.D})
    for (auto& v : M->reshaped()) v = nd(rng);
  s.A *= 0.6 / std::sqrt(static_cast<double>(n));
  Vector nu_dir(nu);
  for (auto& v : nu_dir) v = nd(rng);
  const Vector xi = (z0 * Matrix::Identity(n, n) - s.A).partialPivLu().solve(s.B * nu_dir);
  Vector w(n + nu);
  w << xi, nu_dir;
  Matrix CD(ny, n + nu);
  CD << s.C, s.D;
  CD -= (CD * w) * w.transpose() / w.squaredNorm();
  s.C = CD.leftCols(n);
  s.D = CD.rightCols(nu);
  return s;
}

TEST(TransmissionZerosProperty, TallSquaringsMatchGridOracle) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> where(-2.5, 2.5);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 4;
    const double z0 = where(rng);
    const StateSpace sys = tall_with_zero(rng, n, 1, 2 + trial % 2, z0);
    if (!check_minimal(sys).minimal()) continue;
    const ZeroReport r = transmission_zeros(sys, rng);
    EXPECT_EQ(r.shape, SystemShape::kTall);
    ASSERT_EQ(r.zeros.size(), 1u) << "trial " << trial;
    EXPECT_NEAR(r.zeros[0].z.real(), z0, 1e-6 * std::max(1.0, std::abs(z0)));
    // Oracle: smallest pencil singular value on a ring around z0 stays away
    // from zero while dropping at z0 itself.
    const Vector at = pencil_singular_values(sys, z0);
    double ring_min = 1e300;
    for (int k = 0; k < 16; ++k) {
      const Complex p = z0 + std::polar(1e-2, 2 * std::numbers::pi * k / 16);
      const Vector sv = pencil_singular_values(sys, p);
      ring_min = std::min(ring_min, sv(sv.size() - 1));
    }
    EXPECT_LT(at(at.size() - 1), 1e-3 * ring_min);
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(TransmissionZerosProperty, GenericTallSystemHasNoZeros) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    RandomPlantSpec spec;
    spec.states = 2 + trial % 4;
    spec.inputs = 1;
    spec.outputs = 2;
    const ZeroReport r = transmission_zeros(discretize(random_plant(rng, spec), 0.4), rng);
    EXPECT_TRUE(r.zeros.empty());
    EXPECT_FALSE(r.infinite_zero_count.has_value());
  }
}

TEST(Poles, Examples) {
  const auto integ = poles(discretize(integrator_chain(1), 0.7).system);
  ASSERT_EQ(integ.size(), 1u);
  EXPECT_EQ(integ[0].classification, PoleClass::kBoundary);

  const ContinuousPlant unstable = make_continuous_plant(
      Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
  const auto u = poles(discretize(unstable, std::log(2.0)).system);
  EXPECT_NEAR(u[0].z.real(), 2.0, 1e-14);
  EXPECT_EQ(u[0].classification, PoleClass::kUnstable);

  const ContinuousPlant stable = make_continuous_plant(
      -Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
  const auto s = poles(discretize(stable, 1.0).system);
  EXPECT_NEAR(s[0].z.real(), std::exp(-1.0), 1e-15);
  EXPECT_EQ(s[0].classification, PoleClass::kStable);
}

/// Numerator coefficients of a SISO system: fit det of the pencil, which
/// equals num(z) up to sign, by sampling three points.
std::vector<Complex> numerator_roots_quadratic(const StateSpace& s) {
  auto num = [&](Complex z) {
    const CMatrix zi = z * CMatrix::Identity(2, 2) - s.A.cast<Complex>();
    return (s.evaluate(z)(0, 0)) * zi.determinant();
  };
  const Complex n0 = num(0.0), n1 = num(1.0), nm = num(-1.0);
  const Complex c0 = n0, c2 = (n1 + nm) / 2.0 - n0, c1 = (n1 - nm) / 2.0;
  const Complex disc = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
  return {(-c1 + disc) / (2.0 * c2), (-c1 - disc) / (2.0 * c2)};
}

TEST(MultiplicityAtOne, SyntheticDoubleZero) {
  // (z - 1)^2 / (z - 0.5)^2 = 1 + (-z + 0.75) / (z^2 - z + 0.25)
  const StateSpace n = second_order(-1.0, 0.25, -1.0, 0.75, 1.0);
  for (const Complex r : numerator_roots_quadratic(n)) {
    EXPECT_NEAR(std::abs(r - 1.0), 0.0, 1e-6);
  }
  const MultiplicityAtOne m = multiplicity_at_one(n);
  EXPECT_EQ(m.verdict, AtOne::kMultiple);
  EXPECT_EQ(m.value_rank.rank, 0);
  ASSERT_EQ(m.chain_head.size(), 1);
  EXPECT_NEAR(std::abs(m.chain_head(0)), 1.0, 1e-12);
}

TEST(MultiplicityAtOne, SimpleAndNotAZero) {
  // (z - 1)(z - 0.3) / (z - 0.5)^2 = 1 + (-0.3 z + 0.05) / (z^2 - z + 0.25)
  const StateSpace simple = second_order(-1.0, 0.25, -0.3, 0.05, 1.0);
  EXPECT_EQ(multiplicity_at_one(simple).verdict, AtOne::kSimple);
  // (z - 0.2) / (z - 0.5)
  EXPECT_EQ(multiplicity_at_one(scalar(0.5, 1, 0.3, 1)).verdict, AtOne::kNotAZero);
}

TEST(MultiplicityAtOne, UnstableFactorIsPreconditionError) {
  try {
    multiplicity_at_one(scalar(1.5, 1, 1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPrecondition);
  }
}

TEST(ClassifyVulnerability, Examples) {
  std::mt19937_64 rng(19);
  const auto triple = classify_vulnerability(
      transmission_zeros(discretize(integrator_chain(3), 1.0), rng));
  EXPECT_EQ(triple.actuator.status, Exposure::kYes);
  ASSERT_TRUE(triple.actuator.witness_zero.has_value());
  EXPECT_NEAR(triple.actuator.witness_zero->lambda->real(), -0.2679491924, 1e-8);

  const auto dbl = classify_vulnerability(
      transmission_zeros(discretize(integrator_chain(2), 1.0), rng));
  EXPECT_EQ(dbl.actuator.status, Exposure::kNo);
  // Jordan block at z = 1: repeated boundary pole, left undecided.
  EXPECT_EQ(dbl.sensor.status, Exposure::kUndecided);

  const ContinuousPlant unstable = make_continuous_plant(
      Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
  const auto sen = classify_vulnerability(transmission_zeros(discretize(unstable, 1.0), rng));
  EXPECT_EQ(sen.sensor.status, Exposure::kYes);
  ASSERT_TRUE(sen.sensor.witness_pole.has_value());
  EXPECT_NEAR(sen.sensor.witness_pole->z.real(), std::exp(1.0), 1e-12);
}

TEST(ClassifyVulnerability, FatPlantIsAlwaysExposed) {
  std::mt19937_64 rng(23);
  RandomPlantSpec spec;
  spec.inputs = 2;
  spec.outputs = 1;
  spec.max_real = -0.1;
  const ZeroReport r = transmission_zeros(discretize(random_plant(rng, spec), 0.5), rng);
  EXPECT_EQ(r.shape, SystemShape::kFat);
  EXPECT_EQ(classify_vulnerability(r).actuator.status, Exposure::kYes);
}

TEST(ClassifyVulnerability, DoubleZeroAtOneNeedsMultiplicityTest) {
  std::mt19937_64 rng(29);
  const StateSpace n = second_order(-1.0, 0.25, -1.0, 0.75, 1.0);
  const ZeroReport r = transmission_zeros(n, rng);
  ASSERT_EQ(r.zeros.size(), 2u);
  EXPECT_EQ(r.zeros[0].classification, ZeroClass::kBoundaryMultiple);
  EXPECT_EQ(classify_vulnerability(r).actuator.status, Exposure::kUndecided);
  EXPECT_EQ(classify_vulnerability(r, multiplicity_at_one(n)).actuator.status, Exposure::kYes);
}

}  // namespace
}  // namespace liftguard
