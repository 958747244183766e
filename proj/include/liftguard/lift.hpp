#pragma once

#include <random>
#include <string>

#include "liftguard/factor.hpp"
#include "liftguard/linalg.hpp"
#include "liftguard/model.hpp"

namespace liftguard {

/// Dual-rate lifted plant: input held over T, output sampled at T/m and
/// stacked into one (m * ny)-vector per base step.
struct LiftedSystem {
  StateSpace system;  // (Atilde, Btilde, Ctilde, Dtilde)
  int m = 2;
  double base_period = 0.0;
  DiscretePlant fast_plant;  // P_m at period T/m
};

/// Blocks from a fast plant: A^m, sum A^k B, [C A^i], [C sum_{k<i} A^k B + D].
StateSpace lift_blocks(const StateSpace& fast, int m);

/// Lifted system of the ZOH plant with hold period T and sampling T/m.
LiftedSystem build_lifted(const ContinuousPlant& plant, double T, int m);
LiftedSystem lift_discrete(const DiscretePlant& fast, int m);

struct AssumptionReport {
  bool b_full_rank = false;
  RankResult b_rank;
  bool obs_full_rank = false;
  RankResult obs_rank;  // of [C; C A; ...; C A^{m-2}]
  int m_used = 0;
  bool satisfied() const { return b_full_rank && obs_full_rank; }
};

AssumptionReport check_assumptions(const LiftedSystem& lifted);

struct ChooseMResult {
  int m = 0;
  AssumptionReport report;
  std::string note;
};

/// Smallest m in [2, m_max] meeting both assumptions; m_max <= 0 means n + 1.
ChooseMResult choose_m(const ContinuousPlant& plant, double T, int m_max = 0);

/// [C; C A; ...; C A^{m-2}] of the fast plant.
Matrix observability_stack(const StateSpace& fast, int m);

/// (m-1) ny x m ny block differencing matrix with row blocks [.. I -I ..].
Matrix differencing_matrix(int m, int ny);

struct ShiftCheck {
  bool consistent = true;
  double worst_error = 0.0;
  int trials = 0;
};

/// Compares the lifted response to inputs delayed by one base step against
/// the fast-plant response delayed by m sub-steps.
ShiftCheck shift_consistency_check(const LiftedSystem& lifted, int trials, std::mt19937_64& rng,
                                   int steps = 50);

/// Lifting of a single-rate controller running at T: it reads only the first
/// sub-sample of each stacked measurement.
Controller lift_single_rate_controller(const Controller& k, int m);

}  // namespace liftguard
