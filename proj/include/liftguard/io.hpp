#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "liftguard/attack_plan.hpp"
#include "liftguard/lift.hpp"
#include "liftguard/model.hpp"
#include "liftguard/sim.hpp"
#include "liftguard/zeros.hpp"

namespace liftguard {

using Json = nlohmann::ordered_json;

/// Plant file: {"Ac", "Bc", "Cc", "Dc": arrays of rows, "T", "m"?, "name"?}.
struct PlantSpec {
  ContinuousPlant plant;
  double T = 0.0;
  std::optional<int> m;
};

PlantSpec parse_plant_spec(const Json& j);
PlantSpec parse_plant_spec_text(std::string_view text);
Json plant_spec_json(const ContinuousPlant& plant, double T, std::optional<int> m = std::nullopt);

Matrix matrix_from_json(const Json& j, std::string_view what);
Json to_json(const Matrix& M);
Json to_json(const Vector& v);
Json to_json(Complex z);
Json to_json(const CVector& v);
Json to_json(const StateSpace& s);
Json to_json(const RankResult& r);
Json to_json(const ZeroRecord& z);
Json to_json(const PoleRecord& p);
Json to_json(const ZeroReport& r);
Json to_json(const MultiplicityAtOne& m);
Json to_json(const ChannelVerdict& v);
Json to_json(const AssumptionReport& r);
Json to_json(const AttackPlan& p);
Json to_json(const Verdict& v, double theta);

AttackPlan plan_from_json(const Json& j);

/// One row per sample:
/// step,substep,time,u_*,y_*,da_*,ds_*,monitor,crossed.
void write_trace_csv(std::ostream& os, const SimTrace& tr, double theta);
/// time,y_* on the intersample grid.
void write_intersample_csv(std::ostream& os, const SimTrace& tr);

/// 64-bit FNV-1a hash as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Two-space indented JSON with a trailing newline.
std::string format_json(const Json& j);

}  // namespace liftguard
