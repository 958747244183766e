#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "liftguard/commands.hpp"
#include "liftguard/errors.hpp"

namespace {

using liftguard::Json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int report_error(liftguard::ErrorKind kind, const std::string& message, const std::string& detail) {
  Json err{{"kind", liftguard::to_string(kind)}, {"message", message}};
  if (!detail.empty()) {
    const Json parsed = Json::parse(detail, nullptr, false);
    err["detail"] = parsed.is_discarded() ? Json(detail) : parsed;
  }
  std::cerr << Json{{"error", err}}.dump() << '\n';
  return liftguard::exit_code(kind);
}

/// Prints the report, stamping the one time-dependent field.
void emit(Json report, const std::string& out_dir, const std::string& file) {
  report["meta"]["generated_at"] = utc_timestamp();
  const std::string text = liftguard::format_json(report);
  std::cout << text;
  if (!out_dir.empty()) liftguard::write_file(out_dir + "/" + file, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liftguard: stealthy-attack analysis of sampled-data loops"};
  app.set_version_flag("--version", std::string(liftguard::tool_version()));
  app.require_subcommand(1);

  liftguard::JobSpec job;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  const auto common = [&](CLI::App* sub, bool needs_plant) {
    if (needs_plant) sub->add_option("--plant", job.plant_path, "plant JSON file")->required();
    sub->add_option("--T", job.T, "base sampling period (overrides the plant file)");
    sub->add_option("--m", job.m, "output rate multiple: integer or 'auto'");
    sub->add_option("--theta", job.theta, "detection threshold");
    sub->add_option("--horizon", job.horizon, "horizon in base steps");
    sub->add_option("--seed", seed, "random seed (falls back to LIFTGUARD_SEED)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--q", job.q, "state weight of the DARE gains");
    sub->add_option("--r", job.r, "input weight of the DARE gains");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "zeros, poles and vulnerability verdicts");
  common(analyze, true);
  CLI::App* attack = app.add_subcommand("attack", "synthesize a stealthy attack plan");
  common(attack, true);
  attack->add_option("--mode", job.mode, "single or dual");
  attack->add_option("--channel", job.channel, "actuator, sensor or coordinated");
  CLI::App* simulate = app.add_subcommand("simulate", "closed-loop simulation with monitor");
  common(simulate, true);
  simulate->add_option("--mode", job.mode, "single or dual");
  simulate->add_option("--plan", job.plan_path, "attack plan JSON");
  simulate->add_option("--oversample", job.oversample, "intersample points per sample");
  CLI::App* lift = app.add_subcommand("lift", "dual-rate lifted system and checks");
  common(lift, true);
  CLI::App* verify = app.add_subcommand("verify", "randomized property suites");
  common(verify, false);
  verify->add_option("--trials", job.trials, "trials per property");
  verify->add_flag("--inject-fault", job.inject_fault, "corrupt a lifted block (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return liftguard::exit_code(liftguard::ErrorKind::kParse);
  }

  try {
    job.seed = liftguard::resolve_seed(seed);
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    if (analyze->parsed()) {
      emit(liftguard::cmd_analyze(job), out_dir, "analyze.json");
    } else if (attack->parsed()) {
      emit(liftguard::cmd_attack(job), out_dir, "plan.json");
    } else if (simulate->parsed()) {
      liftguard::SimulateOutput r = liftguard::cmd_simulate(job);
      if (!out_dir.empty()) {
        liftguard::write_file(out_dir + "/trace.csv", r.trace_csv);
        liftguard::write_file(out_dir + "/trace_intersample.csv", r.intersample_csv);
        r.report["files"] = Json{{"trace", "trace.csv"}, {"intersample", "trace_intersample.csv"}};
      }
      emit(std::move(r.report), out_dir, "verdict.json");
    } else if (lift->parsed()) {
      emit(liftguard::cmd_lift(job), out_dir, "lift.json");
    } else if (verify->parsed()) {
      emit(liftguard::cmd_verify(job), out_dir, "verify.json");
    }
  } catch (const liftguard::Error& e) {
    return report_error(e.kind(), e.what(), e.detail());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(liftguard::ErrorKind::kConfiguration, e.what(), {});
  } catch (const std::exception& e) {
    return report_error(liftguard::ErrorKind::kNumeric, e.what(), {});
  }
  return 0;
}
