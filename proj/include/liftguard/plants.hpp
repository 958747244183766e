#pragma once

#include <random>

#include "liftguard/model.hpp"

namespace liftguard {

/// 1/s^order in companion form: Ac shifts, Bc = e_order, Cc = e_1'.
ContinuousPlant integrator_chain(int order);

/// (s - zero_s) / ((s + 1)(s + 2)), minimal, controllable canonical form.
ContinuousPlant second_order_with_zero(double zero_s);

struct RandomPlantSpec {
  int states = 3;
  int inputs = 1;
  int outputs = 1;
  double min_real = -2.0;  // continuous eigenvalue real parts
  double max_real = 0.5;
  double max_imag = 2.5;
  bool feedthrough = false;
  /// When positive, reject plants whose sampling at T or T/m is pathological.
  double period = 0.0;
  int rate = 1;
  /// Reject nearly uncontrollable or unobservable draws (PBH distance).
  double min_pbh_margin = 0.02;
};

/// Random minimal continuous plant; eigenvalues are placed directly and
/// mixed by a well-conditioned similarity. Draws are also rejected when a
/// mode is close to uncontrollable or unobservable.
ContinuousPlant random_plant(std::mt19937_64& rng, const RandomPlantSpec& spec);

}  // namespace liftguard
