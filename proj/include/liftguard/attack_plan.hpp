#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "liftguard/linalg.hpp"

namespace liftguard {

enum class AttackKind { kActuatorZero, kSensorPole, kCoordinated, kFatMasking };
enum class SignalShape { kGeometric, kRamp };

std::string to_string(AttackKind k);
std::string to_string(SignalShape s);
AttackKind attack_kind_from_string(std::string_view s);
SignalShape signal_shape_from_string(std::string_view s);

/// Decimal strings of a complex number at the plan's working precision.
struct ExactComplex {
  std::string re, im;
};

struct Calibration {
  double c0_hat = 0.0;          // peak |[y;u]| of the unit-epsilon run
  double safety = 2.0;
  double expected_peak = 0.0;   // epsilon * c0_hat
  double growth = 0.0;          // |d(H-1)| / |d(0)| of the complex envelope
};

/// Parameters of an injected signal. Geometric plans emit
/// eps * Re(direction * zeta^k); ramp plans emit eps * (k * head - tail).
/// Actuator-side plans are indexed by base step; sensor plans by sensor
/// sample (T/m in a dual-rate loop).
struct AttackPlan {
  AttackKind kind = AttackKind::kActuatorZero;
  SignalShape shape = SignalShape::kGeometric;
  Complex zeta{0.0, 0.0};
  CVector direction;       // unit 2-norm, over all inputs or all outputs
  Vector ramp_head, ramp_tail;
  double epsilon = 0.0;
  int horizon = 0;
  std::vector<int> channels;   // carrying channels, for reporting
  /// Present when zeta and direction were refined in extended precision;
  /// they take precedence over the double fields in simulation.
  int digits = 0;
  ExactComplex zeta_exact;
  std::vector<ExactComplex> direction_exact;
  /// Fat masking: input carrying the free signal, input that cancels it, and
  /// the delay applied to the free signal.
  int masking_input = 1;
  int delay = 0;
  Calibration calibration;
  double theta = 0.0;
  double period = 0.0;
  int m = 1;
  std::string note;

  bool has_exact() const { return digits > 0 && !zeta_exact.re.empty(); }
  /// Signal value in double precision at index k.
  Vector signal(int k) const;
};

}  // namespace liftguard
