#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "liftguard/attack_plan.hpp"
#include "liftguard/factor.hpp"
#include "liftguard/sim.hpp"
#include "liftguard/zeros.hpp"

namespace liftguard {

struct AttackOptions {
  std::optional<int> horizon;  // default: default_horizon
  double safety = 2.0;         // epsilon = theta / (safety * c0_hat)
};

/// max(200, ceil(3 / log10 |zeta|)) for |zeta| > 1; 2000 for ramps.
int default_horizon(Complex zeta);
int default_ramp_horizon();

/// Actuator plan along the largest strictly non-minimum-phase zero of the
/// loop's discrete plant, or a ramp along a multiple zero at z = 1.
AttackPlan synth_actuator_attack(const LoopConfig& loop, const ZeroReport& report,
                                 const AttackOptions& options = {});
AttackPlan synth_actuator_attack(const LoopConfig& loop, std::mt19937_64& rng,
                                 const AttackOptions& options = {});

/// Sensor plan along the largest unstable pole of the sensor-rate plant;
/// the signal is indexed by sensor sample.
AttackPlan synth_sensor_attack(const LoopConfig& loop, const AttackOptions& options = {});

struct SignalPair {
  std::vector<Vector> first, second;
};

/// (d_a, d_s) with d_s = -P d_a from zero state.
SignalPair synth_coordinated_attack(const StateSpace& sys, std::span<const Vector> d_a);

/// Coordinated plan: d_a is a ramp (or geometric with the given ratio) on all
/// inputs; the simulator feeds d_s = -P d_a at the sensor rate.
AttackPlan coordinated_plan(const LoopConfig& loop, SignalShape shape = SignalShape::kRamp,
                            double epsilon = 1.0, Complex zeta = Complex(1.05, 0.0));

struct FatMasking {
  std::vector<double> d1;  // applied free signal (delayed)
  std::vector<double> d2;  // masking signal
  int delay = 0;
};

/// d2 = -P2^{-1} P1 d1 on a single-output plant, as a causal filter.
FatMasking synth_fat_masking(const StateSpace& sys, std::span<const double> d_a1,
                             int free_input = 0, int masking_input = 1);

/// Fat-plant plan: geometric free signal on one input, masked on another,
/// against the base-period plant.
AttackPlan fat_masking_plan(const LoopConfig& loop, Complex zeta = Complex(1.1, 0.0),
                            const AttackOptions& options = {}, int free_input = 0,
                            int masking_input = 1);

/// Sets epsilon from the peak monitor value of a unit-epsilon run.
void calibrate(AttackPlan& plan, const LoopConfig& loop, double safety = 2.0);

/// |d(H-1)| / |d(0)| over the plan horizon (complex envelope for geometric
/// plans; sensor plans count sensor samples).
double growth_factor(const AttackPlan& plan);

/// Copy with zeta scaled by (1 + rel) and, for vector directions, the
/// direction tilted by rel toward a fixed orthogonal vector.
AttackPlan perturbed(const AttackPlan& plan, double rel);

}  // namespace liftguard
