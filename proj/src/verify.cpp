#include "liftguard/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "liftguard/errors.hpp"
#include "liftguard/factor.hpp"
#include "liftguard/lift.hpp"
#include "liftguard/plants.hpp"
#include "liftguard/zeros.hpp"

namespace liftguard {

namespace {

constexpr double kT = 0.5;

struct Trial {
  ContinuousPlant plant;
  std::mt19937_64 rng;
};

/// Returns an empty string when the property holds, otherwise a description.
using Check = std::function<std::string(Trial&, int)>;

std::string fmt(const char* what, double value, double bound) {
  std::ostringstream os;
  os << what << '=' << value << " > " << bound;
  return os.str();
}

bool near_one(Complex z) { return std::abs(z - 1.0) <= 1e-6; }

bool has_unit_zero(const ZeroReport& r) {
  return std::any_of(r.zeros.begin(), r.zeros.end(), [](const ZeroRecord& z) { return near_one(z.z); });
}

RandomPlantSpec any_spec(int trial) {
  RandomPlantSpec spec;
  spec.states = 1 + trial % 6;
  spec.inputs = 1 + trial % 2;
  spec.outputs = 1 + (trial / 2) % 2;
  spec.feedthrough = trial % 3 == 0;
  spec.period = kT;
  return spec;
}

RandomPlantSpec tall_spec(int trial) {
  RandomPlantSpec spec;
  spec.inputs = 1 + trial % 2;
  spec.states = spec.inputs + trial % 4;
  spec.outputs = spec.inputs + (trial / 2) % 2;
  spec.max_real = 0.8;
  spec.period = kT;
  return spec;
}

std::string check_semigroup(Trial& t, int) {
  const StateSpace full = discretize(t.plant, kT).system;
  const StateSpace half = discretize(t.plant, kT / 2).system;
  const Matrix A2 = half.A * half.A;
  const Matrix B2 = half.A * half.B + half.B;
  const double ea = (full.A - A2).norm() / std::max(1.0, full.A.norm());
  const double eb = (full.B - B2).norm() / std::max(1.0, full.B.norm());
  if (ea > 1e-9) return fmt("A error", ea, 1e-9);
  if (eb > 1e-9) return fmt("B error", eb, 1e-9);
  return {};
}

std::string check_bezout(Trial& t, int) {
  const StateSpace d = discretize(t.plant, kT).system;
  const CoprimeFactors f = coprime_factorize(d);
  const double res = bezout_residual(f, 16);
  if (!(res <= 1e-8)) return fmt("bezout residual", res, 1e-8);
  return {};
}

std::string check_lifted_zeros(Trial& t, int) {
  const ChooseMResult cm = choose_m(t.plant, kT);
  const LiftedSystem L = build_lifted(t.plant, kT, cm.m);
  const ZeroReport r = transmission_zeros(L.system, t.rng);
  for (const ZeroRecord& z : r.zeros) {
    if (!near_one(z.z) && std::abs(z.z) > 1.0 + 1e-7) {
      std::ostringstream os;
      os << "lifted zero " << z.z << " outside the unit circle (m=" << cm.m << ")";
      return os.str();
    }
  }
  if (has_unit_zero(r) &&
      multiplicity_at_one(coprime_factorize(L.system).Ntilde).verdict == AtOne::kMultiple) {
    return "multiple lifted zero at z = 1";
  }
  return {};
}

std::string check_identities(Trial& t, int trial) {
  const LiftedSystem L = build_lifted(t.plant, kT, 2 + trial % 4);
  const StateSpace& f = L.fast_plant.system;
  const Matrix X = differencing_matrix(L.m, f.outputs());
  const Matrix O = observability_stack(f, L.m);
  const Matrix I = Matrix::Identity(f.states(), f.states());
  const double e1 = (X * L.system.C - O * (I - f.A)).cwiseAbs().maxCoeff();
  const double e2 = (X * L.system.D + O * f.B).cwiseAbs().maxCoeff();
  const double e3 = ((I - f.A) * L.system.B - (I - L.system.A) * f.B).cwiseAbs().maxCoeff();
  if (e1 > 1e-12) return fmt("X Ctilde - O (I - A)", e1, 1e-12);
  if (e2 > 1e-12) return fmt("X Dtilde + O B", e2, 1e-12);
  if (e3 > 1e-12) return fmt("(I - A) Btilde - (I - Atilde) B", e3, 1e-12);
  return {};
}

std::string check_shift(Trial& t, int trial, bool inject) {
  LiftedSystem L = build_lifted(t.plant, kT, 2 + trial % 4);
  if (inject) L.system.D(L.system.D.rows() - 1, 0) += 1e-3;
  const ShiftCheck s = shift_consistency_check(L, 1, t.rng, 30);
  if (!s.consistent) return fmt("shift mismatch", s.worst_error, 1e-10);
  return {};
}

std::string check_unit_zero_preserved(Trial& t, int trial) {
  const int m = 2 + trial % 3;
  const LiftedSystem L = build_lifted(t.plant, kT, m);
  const bool fast = has_unit_zero(transmission_zeros(L.fast_plant, t.rng));
  const bool lifted = has_unit_zero(transmission_zeros(L.system, t.rng));
  if (fast != lifted) {
    return std::string("z = 1 in fast plant: ") + (fast ? "yes" : "no") +
           ", in lifted plant: " + (lifted ? "yes" : "no");
  }
  return {};
}

RandomPlantSpec fat_spec(int trial) {
  RandomPlantSpec spec;
  spec.inputs = 2 + trial % 2;
  spec.states = spec.inputs + trial % 3;
  spec.outputs = 1;
  spec.feedthrough = trial % 2 == 0;
  spec.period = kT;
  return spec;
}

std::string check_fat_unit_zero(Trial& t, int trial) {
  const LiftedSystem L = build_lifted(t.plant, kT, 2 + trial % 3);
  if (!has_unit_zero(transmission_zeros(L.system, t.rng))) return "lifted fat plant lacks z = 1";
  return {};
}

/// Gives every third plant a transmission zero at s = 0 by making the DC
/// gain vanish.
ContinuousPlant maybe_zero_at_origin(ContinuousPlant p, int trial) {
  if (trial % 3 != 0) return p;
  const StateSpace& s = p.system;
  const Eigen::FullPivLU<Matrix> lu(s.A);
  if (!lu.isInvertible()) return p;
  p.system.D = s.C * lu.solve(s.B);
  return p;
}

PropertyResult run_property(const std::string& name, const VerifyOptions& o, int salt,
                            const std::function<RandomPlantSpec(int)>& spec,
                            const std::function<ContinuousPlant(ContinuousPlant, int)>& shape,
                            const Check& check) {
  PropertyResult r;
  r.name = name;
  for (int trial = 0; trial < o.trials; ++trial) {
    const std::uint64_t seed = trial_seed(o.seed + static_cast<std::uint64_t>(salt) * 1000003ULL, trial);
    Trial t{{}, std::mt19937_64(seed)};
    std::string detail;
    try {
      t.plant = shape(random_plant(t.rng, spec(trial)), trial);
      detail = check(t, trial);
    } catch (const Error& e) {
      detail = std::string(to_string(e.kind())) + " error: " + e.what();
    }
    ++r.trials;
    if (detail.empty()) {
      ++r.passed;
    } else if (static_cast<int>(r.failures.size()) < o.max_dumps) {
      r.failures.push_back({trial, seed, plant_spec_json(t.plant, kT), detail});
    }
  }
  return r;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names{
      "discretize_semigroup", "bezout_identity", "lifted_zeros_not_unstable", "structural_identities",
      "shift_consistency",    "unit_zero_preserved", "fat_unit_zero"};
  return names;
}

PropertyResult run_property_suite(const std::string& name, const VerifyOptions& o) {
  if (o.trials < 1) fail(ErrorKind::kArgument, "verify: trials must be at least 1");
  const auto same = [](ContinuousPlant p, int) { return p; };
  const bool inject = o.inject_lifted_fault;
  if (name == "discretize_semigroup") return run_property(name, o, 1, any_spec, same, check_semigroup);
  if (name == "bezout_identity") return run_property(name, o, 2, any_spec, same, check_bezout);
  if (name == "lifted_zeros_not_unstable") return run_property(name, o, 3, tall_spec, same, check_lifted_zeros);
  if (name == "structural_identities") return run_property(name, o, 4, any_spec, same, check_identities);
  if (name == "shift_consistency") {
    return run_property(name, o, 5, any_spec, same,
                        [inject](Trial& t, int trial) { return check_shift(t, trial, inject); });
  }
  if (name == "unit_zero_preserved") {
    return run_property(name, o, 6, tall_spec, maybe_zero_at_origin, check_unit_zero_preserved);
  }
  if (name == "fat_unit_zero") return run_property(name, o, 7, fat_spec, same, check_fat_unit_zero);
  fail(ErrorKind::kArgument, "unknown property suite '" + name + "'");
}

std::vector<PropertyResult> run_property_suites(const VerifyOptions& o) {
  std::vector<PropertyResult> out;
  for (const std::string& name : property_names()) out.push_back(run_property_suite(name, o));
  return out;
}

Json to_json(const PropertyResult& r) {
  Json j;
  j["name"] = r.name;
  j["status"] = r.ok() ? "pass" : "fail";
  j["trials"] = r.trials;
  j["passed"] = r.passed;
  j["counterexamples"] = Json::array();
  for (const PropertyFailure& f : r.failures) {
    j["counterexamples"].push_back(
        Json{{"trial", f.trial}, {"seed", f.seed}, {"detail", f.detail}, {"plant", f.plant}});
  }
  return j;
}

}  // namespace liftguard
