#include "liftguard/attack_plan.hpp"

#include <complex>

#include "liftguard/errors.hpp"

namespace liftguard {

std::string to_string(AttackKind k) {
  switch (k) {
    case AttackKind::kActuatorZero: return "actuator_zero";
    case AttackKind::kSensorPole: return "sensor_pole";
    case AttackKind::kCoordinated: return "coordinated";
    case AttackKind::kFatMasking: return "fat_masking";
  }
  return "unknown";
}

std::string to_string(SignalShape s) { return s == SignalShape::kRamp ? "ramp" : "geometric"; }

AttackKind attack_kind_from_string(std::string_view s) {
  for (AttackKind k : {AttackKind::kActuatorZero, AttackKind::kSensorPole,
                       AttackKind::kCoordinated, AttackKind::kFatMasking}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorKind::kParse, "unknown attack kind '" + std::string(s) + "'");
}

SignalShape signal_shape_from_string(std::string_view s) {
  if (s == "geometric") return SignalShape::kGeometric;
  if (s == "ramp") return SignalShape::kRamp;
  fail(ErrorKind::kParse, "unknown signal shape '" + std::string(s) + "'");
}

Vector AttackPlan::signal(int k) const {
  if (shape == SignalShape::kRamp) return epsilon * (k * ramp_head - ramp_tail);
  return epsilon * (direction * std::pow(zeta, k)).real();
}

}  // namespace liftguard
