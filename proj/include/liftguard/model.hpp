#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liftguard/linalg.hpp"

namespace liftguard {

/// A state-space quadruple (A, B, C, D) without sampling metadata.
struct StateSpace {
  Matrix A, B, C, D;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }

  /// Throws a dimension error unless the blocks are conformal and finite.
  void validate() const;

  /// C (zI - A)^{-1} B + D.
  CMatrix evaluate(Complex z) const;
};

struct ContinuousPlant {
  StateSpace system;
  std::string name;
};

struct SamplingOrigin {
  enum class Kind { kSingleRate, kFastRate };
  Kind kind = Kind::kSingleRate;
  double base_period = 0.0;  // T
  int m = 1;                 // fast plants run at T/m
};

struct DiscretePlant {
  StateSpace system;
  double period = 0.0;
  SamplingOrigin origin;
  /// Set when check_pathological flagged the sampling period.
  bool pathological_sampling = false;
};

/// Validates dimensions only; minimality is checked by validate_minimal.
ContinuousPlant make_continuous_plant(Matrix Ac, Matrix Bc, Matrix Cc, Matrix Dc,
                                      std::string name = {});

/// Zero-order-hold discretization at period T.
DiscretePlant discretize(const ContinuousPlant& plant, double T);
/// ZOH discretization at T/m, tagged as the fast plant of a dual-rate loop.
DiscretePlant discretize_fast(const ContinuousPlant& plant, double T, int m);

struct PathologicalReport {
  bool pathological = false;
  std::vector<std::pair<Complex, Complex>> offending;
};

/// Flags eigenvalue pairs of Ac with equal real parts whose imaginary parts
/// differ by a nonzero multiple of 2*pi/T.
PathologicalReport check_pathological(const ContinuousPlant& plant, double T);

struct MinimalityReport {
  bool controllable = false;
  bool observable = false;
  RankResult controllability;
  RankResult observability;
  bool minimal() const { return controllable && observable; }
};

MinimalityReport check_minimal(const StateSpace& sys);
inline MinimalityReport check_minimal(const ContinuousPlant& p) { return check_minimal(p.system); }
inline MinimalityReport check_minimal(const DiscretePlant& p) { return check_minimal(p.system); }

/// Throws a model error if the plant realization is not minimal.
void validate_minimal(const ContinuousPlant& plant);

/// x+ = A x + B u, y = C x + D u from x0; one output per input sample.
std::vector<Vector> ss_response(const StateSpace& sys, std::span<const Vector> input,
                                const Vector& x0);
std::vector<Vector> ss_response(const StateSpace& sys, std::span<const Vector> input);

/// Diagonal similarity that equalizes row and column norms of the system
/// matrix [A B; C 0]; returns the balanced system and the scaling s with
/// x = diag(s) * x_balanced.
std::pair<StateSpace, Vector> balance(const StateSpace& sys);

}  // namespace liftguard
