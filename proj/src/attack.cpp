#include "liftguard/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "liftguard/errors.hpp"
#include "liftguard/lift.hpp"
#include "masking.hpp"
#include "mp.hpp"
#include "refine.hpp"

namespace liftguard {

namespace {

constexpr const char* kNotVulnerable = "plant not vulnerable on requested channel";
constexpr int kGuardDigits = 40;

int plan_digits(double samples, Complex zeta) {
  return kGuardDigits +
         static_cast<int>(std::ceil(samples * std::log10(std::max(1.0, std::abs(zeta)))));
}

/// Normalizes the refined vector entries [first, first + count) to unit
/// 2-norm in extended precision and stores them on the plan.
void store_direction(AttackPlan& plan, const std::vector<std::string>& re,
                     const std::vector<std::string>& im, int first, int count) {
  mp::PrecisionScope scope(plan.digits + 10);
  std::vector<mp::Real> r(count), i(count);
  mp::Real norm2 = 0;
  for (int k = 0; k < count; ++k) {
    r[k] = mp::Real(re[first + k]);
    i[k] = mp::Real(im[first + k]);
    norm2 += r[k] * r[k] + i[k] * i[k];
  }
  const mp::Real norm = boost::multiprecision::sqrt(norm2);
  plan.direction.resize(count);
  plan.direction_exact.clear();
  for (int k = 0; k < count; ++k) {
    r[k] /= norm;
    i[k] /= norm;
    plan.direction(k) = Complex(mp::to_double(r[k]), mp::to_double(i[k]));
    plan.direction_exact.push_back(
        {mp::to_decimal(r[k], plan.digits), mp::to_decimal(i[k], plan.digits)});
  }
}

std::vector<int> support(const CVector& v) {
  std::vector<int> out;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-12) out.push_back(i);
  return out;
}

void stamp(AttackPlan& plan, const LoopConfig& loop, int horizon) {
  plan.theta = loop.theta;
  plan.period = loop.T;
  plan.m = loop.m;
  plan.horizon = horizon;
}

/// Square-down matrix for tall systems, fixed so plans are reproducible.
Matrix squaring_matrix(int rows, int cols) {
  std::mt19937_64 rng(0x1f2e3d4c5b6a7988ULL);
  std::normal_distribution<double> nd;
  Matrix W(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) W(i, j) = nd(rng);
  return W;
}

AttackPlan ramp_plan(const LoopConfig& loop, const MultiplicityAtOne& chain,
                     const AttackOptions& options) {
  AttackPlan plan;
  plan.kind = AttackKind::kActuatorZero;
  plan.shape = SignalShape::kRamp;
  plan.zeta = Complex(1.0, 0.0);
  const double s = chain.chain_head.norm();
  plan.ramp_head = chain.chain_head / s;
  plan.ramp_tail = chain.chain_tail / s;
  plan.direction = plan.ramp_head.cast<Complex>();
  plan.channels = support(plan.direction);
  stamp(plan, loop, options.horizon.value_or(default_ramp_horizon()));
  plan.note = "polynomial attack along a multiple zero at z = 1";
  return plan;
}

}  // namespace

int default_horizon(Complex zeta) {
  const double g = std::log10(std::abs(zeta));
  if (!(g > 0.0)) fail(ErrorKind::kArgument, "default_horizon: |zeta| must exceed 1");
  return std::max(200, static_cast<int>(std::ceil(3.0 / g)));
}

int default_ramp_horizon() { return 2000; }

AttackPlan synth_actuator_attack(const LoopConfig& loop, std::mt19937_64& rng,
                                 const AttackOptions& options) {
  return synth_actuator_attack(loop, transmission_zeros(loop_plant(loop), rng), options);
}

AttackPlan synth_actuator_attack(const LoopConfig& loop, const ZeroReport& report,
                                 const AttackOptions& options) {
  const StateSpace G = loop_plant(loop);
  if (report.states != G.states() || report.inputs != G.inputs() ||
      report.outputs != G.outputs()) {
    fail(ErrorKind::kDimension, "synth_actuator_attack: report does not describe the loop plant");
  }
  if (loop.m == 1 && report.shape == SystemShape::kFat && G.outputs() == 1) {
    return fat_masking_plan(loop, Complex(1.1, 0.0), options);
  }

  const ZeroRecord* witness = nullptr;
  for (const ZeroRecord& z : report.zeros) {
    if (z.classification != ZeroClass::kNmpStrict) continue;
    if (!witness || std::abs(z.z) > std::abs(witness->z)) witness = &z;
  }
  if (!witness) {
    bool at_one = false;
    for (const ZeroRecord& z : report.zeros)
      if (std::abs(z.z - 1.0) <= 1e-6) at_one = true;
    if (at_one) {
      const MultiplicityAtOne chain = multiplicity_at_one(coprime_factorize(G).Ntilde);
      if (chain.verdict == AtOne::kMultiple) {
        AttackPlan plan = ramp_plan(loop, chain, options);
        calibrate(plan, loop, options.safety);
        return plan;
      }
    }
    fail(ErrorKind::kCapability, kNotVulnerable,
         at_one ? "only a simple zero at z = 1" : "no strictly non-minimum-phase zero");
  }

  // Pencil [zI - A, -B; C', D'] with the output rows squared down if tall.
  const int n = G.states(), nu = G.inputs(), ny = G.outputs();
  Matrix Cs = G.C, Ds = G.D;
  if (ny > nu) {
    const Matrix W = squaring_matrix(nu, ny);
    Cs = W * G.C;
    Ds = W * G.D;
  }
  const int rows = static_cast<int>(Cs.rows());
  if (rows != nu) fail(ErrorKind::kCapability, kNotVulnerable, "pencil is not square");
  Matrix M = Matrix::Zero(n + nu, n + nu), E = Matrix::Zero(n + nu, n + nu);
  M << G.A, G.B, -Cs, -Ds;
  E.topLeftCorner(n, n).setIdentity();

  const Complex z0 = witness->z;
  const CMatrix P0 = z0 * E.cast<Complex>() - M.cast<Complex>();
  const CVector v0 = smallest_right_singular_vector(P0);
  int pivot = n;
  for (int i = n; i < n + nu; ++i)
    if (std::abs(v0(i)) > std::abs(v0(pivot))) pivot = i;

  const int horizon = options.horizon.value_or(default_horizon(z0));
  const int digits = plan_digits(horizon, z0);
  const RefinedPair rp = refine_pencil_pair(M, E, z0, v0, pivot, digits);

  // The refined pair must annihilate the full (unsquared) pencil too.
  const CVector xi = rp.v.head(n), nu_dir = rp.v.tail(nu);
  const CVector top = (rp.zeta * Matrix::Identity(n, n) - G.A).cast<Complex>() * xi -
                      G.B.cast<Complex>() * nu_dir;
  const CVector bottom = G.C.cast<Complex>() * xi + G.D.cast<Complex>() * nu_dir;
  const double scale = (1.0 + std::abs(rp.zeta) + G.A.norm() + G.B.norm() + G.C.norm() +
                        G.D.norm()) * rp.v.norm();
  if (!(std::max(top.norm(), bottom.norm()) <= 1e-9 * scale)) {
    fail(ErrorKind::kNumeric, "synth_actuator_attack: refined zero does not annihilate the plant");
  }

  AttackPlan plan;
  plan.kind = AttackKind::kActuatorZero;
  plan.shape = SignalShape::kGeometric;
  plan.digits = digits;
  plan.zeta = rp.zeta;
  plan.zeta_exact = {rp.zeta_re, rp.zeta_im};
  store_direction(plan, rp.v_re, rp.v_im, n, nu);
  plan.channels = support(plan.direction);
  stamp(plan, loop, horizon);
  calibrate(plan, loop, options.safety);
  return plan;
}

AttackPlan synth_sensor_attack(const LoopConfig& loop, const AttackOptions& options) {
  const StateSpace fast = loop.m == 1 ? discretize(loop.plant, loop.T).system
                                      : discretize_fast(loop.plant, loop.T, loop.m).system;
  const std::vector<PoleRecord> ps = poles(fast);
  const PoleRecord* witness = nullptr;
  bool repeated_boundary = false;
  for (const PoleRecord& p : ps) {
    if (p.classification == PoleClass::kBoundary && p.multiplicity > 1) repeated_boundary = true;
    if (p.classification != PoleClass::kUnstable) continue;
    if (!witness || std::abs(p.z) > std::abs(witness->z)) witness = &p;
  }
  if (!witness) {
    fail(ErrorKind::kCapability, kNotVulnerable,
         repeated_boundary ? "repeated boundary pole; polynomial sensor attacks are not synthesized"
                           : "no unstable pole");
  }

  const int n = fast.states(), ny = fast.outputs();
  const Complex z0 = witness->z;
  const CMatrix P0 = z0 * CMatrix::Identity(n, n) - fast.A.cast<Complex>();
  const CVector v0 = smallest_right_singular_vector(P0);
  int pivot = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(v0(i)) > std::abs(v0(pivot))) pivot = i;

  const int horizon = options.horizon.value_or(std::max(
      200, static_cast<int>(std::ceil(3.0 / (loop.m * std::log10(std::abs(z0)))))));
  const int digits = plan_digits(static_cast<double>(horizon) * loop.m, z0);
  const RefinedPair rp =
      refine_pencil_pair(fast.A, Matrix::Identity(n, n), z0, v0, pivot, digits);

  // Output direction w = C xi in extended precision.
  std::vector<std::string> w_re(ny), w_im(ny);
  {
    mp::PrecisionScope scope(digits + 10);
    for (int i = 0; i < ny; ++i) {
      mp::Real sr = 0, si = 0;
      for (int j = 0; j < n; ++j) {
        const mp::Real c = fast.C(i, j);
        sr += c * mp::Real(rp.v_re[j]);
        si += c * mp::Real(rp.v_im[j]);
      }
      w_re[i] = mp::to_decimal(sr, digits + 5);
      w_im[i] = mp::to_decimal(si, digits + 5);
    }
  }

  AttackPlan plan;
  plan.kind = AttackKind::kSensorPole;
  plan.shape = SignalShape::kGeometric;
  plan.digits = digits;
  plan.zeta = rp.zeta;
  plan.zeta_exact = {rp.zeta_re, rp.zeta_im};
  store_direction(plan, w_re, w_im, 0, ny);
  if (!(plan.direction.norm() > 0.5)) {
    fail(ErrorKind::kNumeric, "synth_sensor_attack: pole direction is unobservable");
  }
  plan.channels = support(plan.direction);
  stamp(plan, loop, horizon);
  calibrate(plan, loop, options.safety);
  return plan;
}

SignalPair synth_coordinated_attack(const StateSpace& sys, std::span<const Vector> d_a) {
  sys.validate();
  SignalPair out;
  out.first.assign(d_a.begin(), d_a.end());
  for (Vector y : ss_response(sys, d_a)) out.second.push_back(-y);
  return out;
}

AttackPlan coordinated_plan(const LoopConfig& loop, SignalShape shape, double epsilon,
                            Complex zeta) {
  if (!(epsilon > 0.0)) fail(ErrorKind::kArgument, "coordinated_plan: epsilon must be positive");
  const int nu = loop.plant.system.inputs();
  AttackPlan plan;
  plan.kind = AttackKind::kCoordinated;
  plan.shape = shape;
  plan.epsilon = epsilon;
  const Vector ones = Vector::Ones(nu) / std::sqrt(static_cast<double>(nu));
  plan.direction = ones.cast<Complex>();
  if (shape == SignalShape::kRamp) {
    plan.zeta = Complex(1.0, 0.0);
    plan.ramp_head = ones;
    plan.ramp_tail = Vector::Zero(nu);
    stamp(plan, loop, default_ramp_horizon());
  } else {
    plan.zeta = zeta;
    stamp(plan, loop, default_horizon(zeta));
  }
  for (int i = 0; i < nu; ++i) plan.channels.push_back(i);
  plan.note = "sensor companion d_s = -P d_a";
  return plan;
}

FatMasking synth_fat_masking(const StateSpace& sys, std::span<const double> d_a1, int free_input,
                             int masking_input) {
  sys.validate();
  const MaskingFilter f = masking_filter(sys, free_input, masking_input);
  Masker<double> masker(f);
  FatMasking out;
  out.delay = f.delay;
  for (std::size_t k = 0; k < d_a1.size(); ++k) {
    const auto [v1, v2] = masker.step(d_a1[k]);
    if (!std::isfinite(v2) || std::abs(v2) > 1e300) {
      fail(ErrorKind::kNumeric, "synth_fat_masking: inverse filter overflows",
           "step=" + std::to_string(k));
    }
    out.d1.push_back(v1);
    out.d2.push_back(v2);
  }
  return out;
}

AttackPlan fat_masking_plan(const LoopConfig& loop, Complex zeta, const AttackOptions& options,
                            int free_input, int masking_input) {
  const StateSpace base = discretize(loop.plant, loop.T).system;
  const MaskingFilter f = masking_filter(base, free_input, masking_input);
  const int nu = base.inputs();
  AttackPlan plan;
  plan.kind = AttackKind::kFatMasking;
  plan.shape = SignalShape::kGeometric;
  plan.zeta = zeta;
  plan.direction = CVector::Zero(nu);
  plan.direction(free_input) = 1.0;
  plan.channels = {free_input, masking_input};
  plan.masking_input = masking_input;
  plan.delay = f.delay;
  plan.epsilon = loop.theta;
  stamp(plan, loop, options.horizon.value_or(default_horizon(zeta)));
  plan.calibration.growth = growth_factor(plan);
  plan.note = "free input masked by -P2^{-1} P1 at the base period";
  return plan;
}

void calibrate(AttackPlan& plan, const LoopConfig& loop, double safety) {
  if (!(safety >= 1.0)) fail(ErrorKind::kArgument, "calibrate: safety factor must be at least 1");
  LoopConfig unit = loop;
  unit.horizon = plan.horizon;
  unit.record_intersample = false;
  unit.d_a.clear();
  unit.d_s.clear();
  unit.x0_plant = Vector();
  unit.x0_controller = Vector();
  AttackPlan probe = plan;
  probe.epsilon = 1.0;
  unit.attack = probe;
  const double c0 = simulate(unit).verdict.peak;
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    fail(ErrorKind::kNumeric, "calibrate: unit run has no finite nonzero peak");
  }
  // A few ulps of margin keep epsilon * c0 on the safe side of theta / safety.
  plan.epsilon = loop.theta / (safety * c0) * (1.0 - 8 * std::numeric_limits<double>::epsilon());
  plan.calibration.c0_hat = c0;
  plan.calibration.safety = safety;
  plan.calibration.expected_peak = plan.epsilon * c0;
  plan.calibration.growth = growth_factor(plan);
}

double growth_factor(const AttackPlan& plan) {
  if (plan.shape == SignalShape::kRamp) {
    const double d0 = plan.ramp_tail.norm();
    const double dh = ((plan.horizon - 1) * plan.ramp_head - plan.ramp_tail).norm();
    return d0 > 0.0 ? dh / d0 : std::numeric_limits<double>::infinity();
  }
  const double samples =
      plan.kind == AttackKind::kSensorPole ? static_cast<double>(plan.horizon) * plan.m
                                           : plan.horizon;
  return std::pow(std::abs(plan.zeta), samples - 1.0);
}

AttackPlan perturbed(const AttackPlan& plan, double rel) {
  AttackPlan p = plan;
  p.note = "perturbed copy";
  if (plan.shape == SignalShape::kRamp) {
    p.ramp_head *= 1.0 + rel;
    return p;
  }
  p.zeta = plan.zeta * (1.0 + rel);
  const int dim = static_cast<int>(plan.direction.size());
  CVector e = CVector::Zero(dim);
  if (dim > 1) {
    // Tilt toward the last unit vector made orthogonal to the direction.
    e(dim - 1) = 1.0;
    e -= plan.direction * plan.direction.dot(e);
    if (e.norm() < 1e-8) {
      e = CVector::Zero(dim);
      e(0) = 1.0;
      e -= plan.direction * plan.direction.dot(e);
    }
    e /= e.norm();
  }
  const CVector d = plan.direction + rel * e;
  p.direction = d / d.norm();
  if (plan.has_exact()) {
    mp::PrecisionScope scope(plan.digits + 10);
    const mp::Real s = 1.0 + rel;
    p.zeta_exact = {mp::to_decimal(mp::Real(plan.zeta_exact.re) * s, plan.digits),
                    mp::to_decimal(mp::Real(plan.zeta_exact.im) * s, plan.digits)};
    std::vector<mp::Real> r(dim), i(dim);
    mp::Real norm2 = 0;
    for (int k = 0; k < dim; ++k) {
      r[k] = mp::Real(plan.direction_exact[k].re) + rel * e(k).real();
      i[k] = mp::Real(plan.direction_exact[k].im) + rel * e(k).imag();
      norm2 += r[k] * r[k] + i[k] * i[k];
    }
    const mp::Real norm = boost::multiprecision::sqrt(norm2);
    for (int k = 0; k < dim; ++k) {
      p.direction_exact[k] = {mp::to_decimal(r[k] / norm, plan.digits),
                              mp::to_decimal(i[k] / norm, plan.digits)};
    }
  }
  return p;
}

}  // namespace liftguard
