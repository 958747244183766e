#include "liftguard/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include "liftguard/attack.hpp"
#include "liftguard/errors.hpp"
#include "liftguard/verify.hpp"

#ifndef LIFTGUARD_VERSION
#define LIFTGUARD_VERSION "0.0.0"
#endif

namespace liftguard {

namespace {

struct Loaded {
  PlantSpec spec;
  std::string text;
  double T = 0.0;
};

Loaded load_plant(const JobSpec& job) {
  Loaded l;
  if (job.plant_text) {
    l.text = *job.plant_text;
  } else {
    if (job.plant_path.empty()) fail(ErrorKind::kArgument, "--plant is required");
    l.text = read_file(job.plant_path);
  }
  l.spec = parse_plant_spec_text(l.text);
  l.T = job.T.value_or(l.spec.T);
  if (!(l.T > 0.0) || !std::isfinite(l.T)) fail(ErrorKind::kArgument, "T must be positive");
  return l;
}

std::optional<std::string> load_plan_text(const JobSpec& job) {
  if (job.plan_text) return job.plan_text;
  if (job.plan_path.empty()) return std::nullopt;
  return read_file(job.plan_path);
}

Json meta(const JobSpec& job, std::string_view command, const Loaded* plant,
          const std::optional<std::string>& plan) {
  Json j;
  j["tool"] = "liftguard";
  j["version"] = tool_version();
  j["command"] = command;
  j["seed"] = job.seed;
  Json hash = Json::object();
  if (plant) hash["plant"] = "fnv1a64:" + fnv1a64_hex(plant->text);
  if (plan) hash["plan"] = "fnv1a64:" + fnv1a64_hex(*plan);
  j["input_hash"] = std::move(hash);
  return j;
}

Json plant_summary(const Loaded& l) {
  const StateSpace& s = l.spec.plant.system;
  Json j;
  j["name"] = l.spec.plant.name;
  j["states"] = s.states();
  j["inputs"] = s.inputs();
  j["outputs"] = s.outputs();
  j["T"] = l.T;
  return j;
}

FactorOptions factor_options(const JobSpec& job) {
  FactorOptions o;
  o.q = job.q;
  o.r = job.r;
  return o;
}

struct MChoice {
  int m = 1;
  std::string source = "single_rate";
  AssumptionReport report;
  std::string note;
};

std::optional<int> explicit_m(const JobSpec& job, const Loaded& l) {
  if (job.m == "auto") {
    if (l.spec.m) return l.spec.m;
    return std::nullopt;
  }
  int m = 0;
  const char* end = job.m.data() + job.m.size();
  const auto [ptr, ec] = std::from_chars(job.m.data(), end, m);
  if (ec != std::errc() || ptr != end) fail(ErrorKind::kArgument, "--m must be an integer or 'auto'");
  if (m < 1) fail(ErrorKind::kArgument, "--m must be at least 1");
  return m;
}

/// m for a dual-rate loop: explicit values are checked against the lifting
/// assumptions, "auto" uses choose_m.
MChoice dual_m(const JobSpec& job, const Loaded& l) {
  MChoice c;
  if (const auto m = explicit_m(job, l)) {
    if (*m < 2) fail(ErrorKind::kArgument, "dual-rate mode needs m >= 2");
    c.m = *m;
    c.source = "explicit";
    c.report = check_assumptions(build_lifted(l.spec.plant, l.T, c.m));
    if (!c.report.satisfied()) {
      fail(ErrorKind::kConfiguration, "m=" + std::to_string(c.m) + " violates the lifting assumptions",
           to_json(c.report).dump());
    }
    return c;
  }
  try {
    const ChooseMResult r = choose_m(l.spec.plant, l.T);
    c.m = r.m;
    c.source = "auto";
    c.report = r.report;
    c.note = r.note;
  } catch (const Error& e) {
    fail(ErrorKind::kConfiguration, e.what(), e.detail());
  }
  return c;
}

MChoice loop_m(const JobSpec& job, const Loaded& l) {
  if (job.mode == "single") return MChoice{};
  if (job.mode == "dual") return dual_m(job, l);
  fail(ErrorKind::kArgument, "--mode must be 'single' or 'dual'");
}

Json loop_summary(const LoopConfig& loop, const MChoice& mc) {
  Json j;
  j["mode"] = loop.m == 1 ? "single_rate" : "dual_rate";
  j["T"] = loop.T;
  j["m"] = loop.m;
  j["m_source"] = mc.source;
  j["sample_period"] = loop.T / loop.m;
  j["theta"] = loop.theta;
  j["horizon"] = loop.horizon;
  if (loop.m > 1) j["assumptions"] = to_json(mc.report);
  return j;
}

Json analyze_system(const StateSpace& sys, std::mt19937_64& rng, const FactorOptions& fo) {
  const ZeroReport zr = transmission_zeros(sys, rng);
  std::optional<MultiplicityAtOne> at_one;
  const bool unit_zero = std::any_of(zr.zeros.begin(), zr.zeros.end(),
                                     [](const ZeroRecord& z) { return std::abs(z.z - 1.0) <= 1e-6; });
  if (unit_zero && zr.shape != SystemShape::kFat) {
    at_one = multiplicity_at_one(coprime_factorize(sys, fo).Ntilde);
  }
  const VulnerabilityVerdict v = classify_vulnerability(zr, at_one);
  Json j;
  j["verdict"] = Json{{"actuator", to_json(v.actuator)}, {"sensor", to_json(v.sensor)}};
  j["at_one"] = at_one ? to_json(*at_one) : Json(nullptr);
  j["zeros"] = to_json(zr);
  return j;
}

Json pathological_json(const ContinuousPlant& p, double T) {
  const PathologicalReport r = check_pathological(p, T);
  Json pairs = Json::array();
  for (const auto& [a, b] : r.offending) pairs.push_back(Json::array({to_json(a), to_json(b)}));
  return Json{{"period", T}, {"pathological", r.pathological}, {"offending", pairs}};
}

double growth_ratio(const std::vector<Vector>& d) {
  if (d.empty() || d.front().size() == 0) return 0.0;
  const double first = d.front().cwiseAbs().maxCoeff();
  const double last = d.back().cwiseAbs().maxCoeff();
  return first > 0.0 ? last / first : (last > 0.0 ? INFINITY : 0.0);
}

Json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

}  // namespace

std::string_view tool_version() { return LIFTGUARD_VERSION; }

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("LIFTGUARD_SEED"); env && *env) {
    std::uint64_t s = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, s);
    if (ec != std::errc() || ptr != end) fail(ErrorKind::kArgument, "LIFTGUARD_SEED must be an integer");
    return s;
  }
  return 0;
}

Json cmd_analyze(const JobSpec& job) {
  const Loaded l = load_plant(job);
  const ContinuousPlant& plant = l.spec.plant;
  const FactorOptions fo = factor_options(job);
  std::mt19937_64 rng(job.seed);

  const DiscretePlant d = discretize(plant, l.T);
  const MinimalityReport mr = check_minimal(plant);
  Json single = analyze_system(d.system, rng, fo);

  Json dual = nullptr;
  const std::optional<int> m = explicit_m(job, l);
  if (!m || *m >= 2) {
    try {
      const MChoice mc = dual_m(job, l);
      const LiftedSystem L = build_lifted(plant, l.T, mc.m);
      dual = Json::object();
      dual["m"] = mc.m;
      dual["m_source"] = mc.source;
      if (!mc.note.empty()) dual["note"] = mc.note;
      dual["sample_period"] = l.T / mc.m;
      dual["assumptions"] = to_json(mc.report);
      dual["pathological_sampling"] = pathological_json(plant, l.T / mc.m);
      dual.update(analyze_system(L.system, rng, fo));
      dual["lifted"] = to_json(L.system);
    } catch (const Error& e) {
      if (m) throw;  // explicit m: the assumption failure is the answer
      dual = Json{{"available", false}, {"reason", e.what()}};
    }
  }

  const auto status = [](const Json& section, const char* channel) -> Json {
    if (section.is_null() || !section.contains("verdict")) return nullptr;
    return section["verdict"][channel]["status"];
  };
  Json out;
  out["meta"] = meta(job, "analyze", &l, std::nullopt);
  out["plant"] = plant_summary(l);
  out["actuator_stealthy"] =
      Json{{"single_rate", status(single, "actuator")}, {"dual_rate", status(dual, "actuator")}};
  out["sensor_stealthy"] =
      Json{{"single_rate", status(single, "sensor")}, {"dual_rate", status(dual, "sensor")}};
  out["minimality"] = Json{{"controllable", mr.controllable}, {"observable", mr.observable}};
  out["pathological_sampling"] = pathological_json(plant, l.T);
  out["discretization"] = Json{{"period", l.T}, {"system", to_json(d.system)}};
  out["single_rate"] = std::move(single);
  out["dual_rate"] = std::move(dual);
  return out;
}

Json cmd_attack(const JobSpec& job) {
  const Loaded l = load_plant(job);
  const MChoice mc = loop_m(job, l);
  const LoopConfig loop = make_loop(l.spec.plant, l.T, mc.m, job.theta, job.horizon.value_or(200),
                                    factor_options(job));
  AttackOptions opts;
  opts.horizon = job.horizon;
  AttackPlan plan;
  if (job.channel == "actuator") {
    std::mt19937_64 rng(job.seed);
    plan = synth_actuator_attack(loop, rng, opts);
  } else if (job.channel == "sensor") {
    plan = synth_sensor_attack(loop, opts);
  } else if (job.channel == "coordinated") {
    plan = coordinated_plan(loop);
    if (job.horizon) plan.horizon = *job.horizon;
  } else {
    fail(ErrorKind::kArgument, "--channel must be actuator, sensor or coordinated");
  }
  Json out;
  out["meta"] = meta(job, "attack", &l, std::nullopt);
  out["plant"] = plant_summary(l);
  out["loop"] = loop_summary(loop, mc);
  out["plan"] = to_json(plan);
  return out;
}

SimulateOutput cmd_simulate(const JobSpec& job) {
  const Loaded l = load_plant(job);
  const MChoice mc = loop_m(job, l);
  const std::optional<std::string> plan_text = load_plan_text(job);
  std::optional<AttackPlan> plan;
  if (plan_text) {
    Json pj;
    try {
      pj = Json::parse(*plan_text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kParse, std::string("invalid plan JSON: ") + e.what());
    }
    plan = plan_from_json(pj);
  }
  const int horizon = job.horizon.value_or(plan ? plan->horizon : 200);
  LoopConfig loop = make_loop(l.spec.plant, l.T, mc.m, job.theta, horizon, factor_options(job));
  loop.oversample = job.oversample;
  loop.attack = plan;
  const SimTrace tr = simulate(loop);

  SimulateOutput out;
  Json& r = out.report;
  r["meta"] = meta(job, "simulate", &l, plan_text);
  r["plant"] = plant_summary(l);
  r["loop"] = loop_summary(loop, mc);
  r["attack"] = plan ? Json{{"kind", to_string(plan->kind)},
                            {"shape", to_string(plan->shape)},
                            {"epsilon", plan->epsilon},
                            {"synthesized_for_m", plan->m}}
                     : Json(nullptr);
  r["verdict"] = to_json(tr.verdict, loop.theta);
  r["growth"] = Json{{"d_a", number_or_string(growth_ratio(tr.d_a))},
                     {"d_s", number_or_string(growth_ratio(tr.d_s))}};
  r["samples"] = tr.y.size();
  r["working_digits"] = tr.digits;
  std::ostringstream csv, fine;
  write_trace_csv(csv, tr, loop.theta);
  write_intersample_csv(fine, tr);
  out.trace_csv = csv.str();
  out.intersample_csv = fine.str();
  return out;
}

Json cmd_lift(const JobSpec& job) {
  const Loaded l = load_plant(job);
  const MChoice mc = dual_m(job, l);
  const LiftedSystem L = build_lifted(l.spec.plant, l.T, mc.m);
  const StateSpace& f = L.fast_plant.system;
  const Matrix X = differencing_matrix(mc.m, f.outputs());
  const Matrix O = observability_stack(f, mc.m);
  const Matrix I = Matrix::Identity(f.states(), f.states());
  std::mt19937_64 rng(job.seed);
  const ShiftCheck sc = shift_consistency_check(L, 5, rng);

  Json out;
  out["meta"] = meta(job, "lift", &l, std::nullopt);
  out["plant"] = plant_summary(l);
  out["m"] = mc.m;
  out["m_source"] = mc.source;
  if (!mc.note.empty()) out["note"] = mc.note;
  out["sample_period"] = l.T / mc.m;
  out["assumptions"] = to_json(mc.report);
  out["identities"] = Json{
      {"X_Ctilde", (X * L.system.C - O * (I - f.A)).cwiseAbs().maxCoeff()},
      {"X_Dtilde", (X * L.system.D + O * f.B).cwiseAbs().maxCoeff()},
      {"Btilde", ((I - f.A) * L.system.B - (I - L.system.A) * f.B).cwiseAbs().maxCoeff()}};
  out["shift_check"] =
      Json{{"consistent", sc.consistent}, {"worst_error", sc.worst_error}, {"trials", sc.trials}};
  out["fast_plant"] = to_json(f);
  out["lifted"] = to_json(L.system);
  return out;
}

Json cmd_verify(const JobSpec& job) {
  VerifyOptions o;
  o.trials = job.trials;
  o.seed = job.seed;
  o.inject_lifted_fault = job.inject_fault;
  const std::vector<PropertyResult> results = run_property_suites(o);
  bool all = true;
  Json props = Json::array();
  for (const PropertyResult& r : results) {
    all = all && r.ok();
    props.push_back(to_json(r));
  }
  Json out;
  out["meta"] = meta(job, "verify", nullptr, std::nullopt);
  out["trials"] = job.trials;
  out["fault_injected"] = job.inject_fault;
  out["status"] = all ? "pass" : "fail";
  out["properties"] = std::move(props);
  return out;
}

}  // namespace liftguard
