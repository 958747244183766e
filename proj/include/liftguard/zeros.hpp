#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "liftguard/linalg.hpp"
#include "liftguard/model.hpp"

namespace liftguard {

// z is the computational domain; lambda = 1/z is used for classification.
// |z| > 1 (0 < |lambda| < 1) is non-minimum phase.

enum class ZeroClass { kNmpStrict, kBoundarySimple, kBoundaryMultiple, kMinimumPhase };
enum class PoleClass { kUnstable, kBoundary, kStable };
enum class SystemShape { kTall, kSquare, kFat };

std::string to_string(ZeroClass c);
std::string to_string(PoleClass c);
std::string to_string(SystemShape s);

struct ZeroRecord {
  Complex z;
  std::optional<Complex> lambda;  // empty for z == 0 (lambda at infinity)
  CVector input_direction;        // nu, normalized so max |nu_i| == 1
  CVector state_direction;        // xi, scaled with nu
  ZeroClass classification = ZeroClass::kMinimumPhase;
  int multiplicity = 1;           // size of the numerical cluster at this point
  double residual = 0.0;          // sigma at the normal rank of the scaled pencil
  double pencil_norm = 0.0;
  bool marginal = false;          // |z| within 10x of the boundary tolerance edge
};

struct PoleRecord {
  Complex z;
  std::optional<Complex> lambda;
  PoleClass classification = PoleClass::kStable;
  int multiplicity = 1;
  bool marginal = false;
};

struct ZeroReport {
  std::vector<ZeroRecord> zeros;
  std::vector<PoleRecord> poles;
  int normal_rank = 0;
  SystemShape shape = SystemShape::kSquare;
  int states = 0, inputs = 0, outputs = 0;
  /// Relative-degree zeros (z at infinity, lambda = 0); square systems only.
  std::optional<int> infinite_zero_count;
  int squaring_attempts = 0;
};

struct ZeroOptions {
  double boundary_tol = 1e-7;
  double match_tol = 1e-6;
  double residual_tol = 1e-6;
  /// A zero seen by only one random squaring counts as missed by the other
  /// only below this relative residual.
  double missed_tol = 1e-10;
  double cluster_tol = 1e-5;
  int max_retries = 5;
  bool require_minimal = true;
};

/// Finite transmission zeros: rank-drop points of [zI - A, -B; C, D].
ZeroReport transmission_zeros(const StateSpace& sys, std::mt19937_64& rng,
                              const ZeroOptions& options = {});
inline ZeroReport transmission_zeros(const DiscretePlant& p, std::mt19937_64& rng,
                                     const ZeroOptions& options = {}) {
  return transmission_zeros(p.system, rng, options);
}

std::vector<PoleRecord> poles(const StateSpace& sys, double boundary_tol = 1e-7);

SystemShape shape_of(const StateSpace& sys);

/// Normal rank of the Rosenbrock pencil (rank at generic complex points).
int pencil_normal_rank(const StateSpace& sys, std::mt19937_64& rng);

/// Singular values of the balanced, scaled pencil at z, nonincreasing.
Vector pencil_singular_values(const StateSpace& sys, Complex z);

/// True iff the pencil rank at z drops below its normal rank.
bool has_zero_at(const StateSpace& sys, Complex z, std::mt19937_64& rng,
                 double rel_tol = 1e-6);

enum class AtOne { kNotAZero, kSimple, kMultiple };
std::string to_string(AtOne a);

struct MultiplicityAtOne {
  AtOne verdict = AtOne::kNotAZero;
  RankResult value_rank;   // of N(1)
  RankResult chain_rank;   // of [N(1) 0; N'(1) N(1)]
  int columns = 0;
  /// Null chain (nu1, nu2) with nu1 != 0 when verdict is kMultiple.
  Vector chain_head, chain_tail;
};

/// Multiplicity test at lambda = 1 for a left coprime factor realization
/// [Abar | Bbar; C | D] with Abar Schur stable.
MultiplicityAtOne multiplicity_at_one(const StateSpace& ntilde);

enum class Exposure { kYes, kNo, kUndecided };
std::string to_string(Exposure e);

struct ChannelVerdict {
  Exposure status = Exposure::kNo;
  std::string reason;
  std::optional<ZeroRecord> witness_zero;
  std::optional<PoleRecord> witness_pole;
  bool marginal = false;
};

struct VulnerabilityVerdict {
  ChannelVerdict actuator;
  ChannelVerdict sensor;
};

VulnerabilityVerdict classify_vulnerability(
    const ZeroReport& report, const std::optional<MultiplicityAtOne>& at_one = std::nullopt);

}  // namespace liftguard
