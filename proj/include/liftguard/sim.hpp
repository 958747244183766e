#pragma once

#include <optional>
#include <span>
#include <vector>

#include "liftguard/attack_plan.hpp"
#include "liftguard/factor.hpp"
#include "liftguard/linalg.hpp"
#include "liftguard/model.hpp"

namespace liftguard {

struct LoopConfig {
  ContinuousPlant plant;
  double T = 0.0;
  int m = 1;  // 1: single rate; >= 2: output sampled at T/m
  Controller controller;
  double theta = 0.01;
  int horizon = 200;   // base steps
  int oversample = 8;  // intersample grid T / (m r)
  std::optional<AttackPlan> attack;
  /// Extra explicit injections: d_a per base step, d_s per sensor sample.
  std::vector<Vector> d_a, d_s;
  Vector x0_plant, x0_controller;  // empty means zero
  bool record_intersample = true;
};

/// Loop with the observer-based controller of P_d(T) (m == 1) or of the
/// lifted plant (m >= 2).
LoopConfig make_loop(const ContinuousPlant& plant, double T, int m, double theta, int horizon,
                     const FactorOptions& options = {});

/// Discrete plant the controller is designed against: P_d(T) or the lifted system.
StateSpace loop_plant(const LoopConfig& cfg);

struct Verdict {
  bool detected = false;
  int index = -1;  // first sample with monitor > theta
  int step = -1;
  int substep = -1;
  double peak = 0.0;
};

struct SimTrace {
  int m = 1;
  double T = 0.0;
  std::vector<double> times;           // per sample, T/m grid
  std::vector<Vector> u;               // per base step, controller output
  std::vector<Vector> y;               // per sample, measured (after d_s)
  std::vector<Vector> y_plant;         // per sample, true plant output
  std::vector<Vector> d_a;             // per base step
  std::vector<Vector> d_s;             // per sample
  std::vector<double> monitor;         // per sample, max(|y|, |u|)
  std::vector<double> step_monitor;    // per base step, max over its samples
  std::vector<double> fine_times;
  std::vector<Vector> y_intersample;   // true output on the T/(m r) grid
  Verdict verdict;
  int digits = 0;                      // 0: double arithmetic
};

SimTrace run_single_rate(const LoopConfig& cfg);
SimTrace run_dual_rate(const LoopConfig& cfg);
SimTrace simulate(const LoopConfig& cfg);

/// Strict threshold test on aligned streams; u is read at index / m.
Verdict monitor_eval(std::span<const Vector> y, std::span<const Vector> u, double theta,
                     int m = 1);

/// Stacked-domain run of the lifted plant against the lifted controller,
/// x+ = Atilde x + Btilde (u + d_a), ytilde = Ctilde x + Dtilde (u + d_a) + d_s.
struct LiftedRun {
  std::vector<Vector> u, y;
};
LiftedRun run_lifted_lti(const StateSpace& lifted, const StateSpace& controller,
                         std::span<const Vector> d_a, std::span<const Vector> d_s_stacked,
                         const Vector& x0_plant, const Vector& x0_controller);

/// Working precision in decimal digits a plan needs over a horizon; 0 means
/// double arithmetic is enough.
int required_digits(const LoopConfig& cfg);

}  // namespace liftguard
