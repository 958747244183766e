#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "liftguard/io.hpp"

namespace liftguard {

std::string_view tool_version();

struct JobSpec {
  std::string plant_path;
  std::optional<std::string> plant_text;  // inline plant JSON, overrides plant_path
  std::optional<double> T;                // overrides the plant file
  std::string m = "auto";                 // "auto" or an integer
  double theta = 0.01;
  std::optional<int> horizon;
  std::uint64_t seed = 0;
  std::string plan_path;
  std::optional<std::string> plan_text;
  int trials = 100;
  std::string mode = "single";       // single | dual
  std::string channel = "actuator";  // actuator | sensor | coordinated
  double q = 1.0, r = 1.0;           // DARE weights
  int oversample = 8;
  bool inject_fault = false;         // verify negative control
};

/// Seed from the flag, else LIFTGUARD_SEED, else 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag);

Json cmd_analyze(const JobSpec& job);
Json cmd_attack(const JobSpec& job);

struct SimulateOutput {
  Json report;
  std::string trace_csv;
  std::string intersample_csv;
};
SimulateOutput cmd_simulate(const JobSpec& job);

Json cmd_lift(const JobSpec& job);
Json cmd_verify(const JobSpec& job);

}  // namespace liftguard
