#include "liftguard/io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "liftguard/errors.hpp"

namespace liftguard {

namespace {

Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double number_from(const Json& j, std::string_view what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
  }
  fail(ErrorKind::kParse, std::string(what) + " must be a number");
}

const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorKind::kParse, std::string("missing field '") + key + "'");
  return j.at(key);
}

Complex complex_from(const Json& j, std::string_view what) {
  if (!j.is_object()) fail(ErrorKind::kParse, std::string(what) + " must be {re, im}");
  return {number_from(field(j, "re"), what), number_from(field(j, "im"), what)};
}

Vector vector_from(const Json& j, std::string_view what) {
  if (!j.is_array()) fail(ErrorKind::kParse, std::string(what) + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number_from(j[i], what);
  return v;
}

void csv_number(std::ostream& os, double x) {
  os << ',' << std::setprecision(17) << x;
}

}  // namespace

Matrix matrix_from_json(const Json& j, std::string_view what) {
  if (!j.is_array()) fail(ErrorKind::kParse, std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array()) fail(ErrorKind::kParse, std::string(what) + " rows must be arrays");
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) {
      fail(ErrorKind::kDimension, std::string(what) + " has ragged rows");
    }
  }
  Matrix M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) fail(ErrorKind::kParse, std::string(what) + " entries must be numbers");
      M(i, k) = j[i][k].get<double>();
    }
  return M;
}

PlantSpec parse_plant_spec(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::kParse, "plant spec must be a JSON object");
  Matrix Ac = matrix_from_json(field(j, "Ac"), "Ac");
  Matrix Bc = matrix_from_json(field(j, "Bc"), "Bc");
  Matrix Cc = matrix_from_json(field(j, "Cc"), "Cc");
  Matrix Dc = matrix_from_json(field(j, "Dc"), "Dc");
  // An empty Dc means no feedthrough.
  if (Dc.size() == 0) Dc = Matrix::Zero(Cc.rows(), Bc.cols());
  PlantSpec spec;
  spec.plant = make_continuous_plant(std::move(Ac), std::move(Bc), std::move(Cc), std::move(Dc),
                                     j.value("name", std::string()));
  const Json& T = field(j, "T");
  if (!T.is_number()) fail(ErrorKind::kParse, "T must be a number");
  spec.T = T.get<double>();
  if (!(spec.T > 0.0) || !std::isfinite(spec.T)) fail(ErrorKind::kArgument, "T must be positive");
  if (j.contains("m") && !j.at("m").is_null()) {
    if (!j.at("m").is_number_integer()) fail(ErrorKind::kParse, "m must be an integer");
    spec.m = j.at("m").get<int>();
    if (*spec.m < 1) fail(ErrorKind::kArgument, "m must be at least 1");
  }
  return spec;
}

PlantSpec parse_plant_spec_text(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("invalid JSON: ") + e.what());
  }
  return parse_plant_spec(j);
}

Json plant_spec_json(const ContinuousPlant& plant, double T, std::optional<int> m) {
  Json j;
  if (!plant.name.empty()) j["name"] = plant.name;
  j["Ac"] = to_json(plant.system.A);
  j["Bc"] = to_json(plant.system.B);
  j["Cc"] = to_json(plant.system.C);
  j["Dc"] = to_json(plant.system.D);
  j["T"] = T;
  if (m) j["m"] = *m;
  return j;
}

Json to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(number(M(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Json to_json(Complex z) { return Json{{"re", number(z.real())}, {"im", number(z.imag())}}; }

Json to_json(const CVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

Json to_json(const StateSpace& s) {
  return Json{{"A", to_json(s.A)}, {"B", to_json(s.B)}, {"C", to_json(s.C)}, {"D", to_json(s.D)}};
}

Json to_json(const RankResult& r) {
  return Json{{"rank", r.rank},
              {"singular_values", to_json(r.singular_values)},
              {"tolerance_used", number(r.tolerance_used)}};
}

Json to_json(const ZeroRecord& z) {
  Json j;
  j["z"] = to_json(z.z);
  j["lambda"] = z.lambda ? to_json(*z.lambda) : Json(nullptr);
  j["classification"] = to_string(z.classification);
  j["multiplicity"] = z.multiplicity;
  j["residual"] = number(z.residual);
  j["marginal"] = z.marginal;
  j["input_direction"] = to_json(z.input_direction);
  return j;
}

Json to_json(const PoleRecord& p) {
  Json j;
  j["z"] = to_json(p.z);
  j["lambda"] = p.lambda ? to_json(*p.lambda) : Json(nullptr);
  j["classification"] = to_string(p.classification);
  j["multiplicity"] = p.multiplicity;
  j["marginal"] = p.marginal;
  return j;
}

Json to_json(const ZeroReport& r) {
  Json j;
  j["shape"] = to_string(r.shape);
  j["normal_rank"] = r.normal_rank;
  j["states"] = r.states;
  j["inputs"] = r.inputs;
  j["outputs"] = r.outputs;
  j["zeros"] = Json::array();
  for (const ZeroRecord& z : r.zeros) j["zeros"].push_back(to_json(z));
  j["poles"] = Json::array();
  for (const PoleRecord& p : r.poles) j["poles"].push_back(to_json(p));
  j["infinite_zero_count"] = r.infinite_zero_count ? Json(*r.infinite_zero_count) : Json(nullptr);
  return j;
}

Json to_json(const MultiplicityAtOne& m) {
  Json j;
  j["verdict"] = to_string(m.verdict);
  j["value_rank"] = m.value_rank.rank;
  j["chain_rank"] = m.chain_rank.rank;
  j["columns"] = m.columns;
  if (m.verdict == AtOne::kMultiple) {
    j["chain_head"] = to_json(m.chain_head);
    j["chain_tail"] = to_json(m.chain_tail);
  }
  return j;
}

Json to_json(const ChannelVerdict& v) {
  Json j;
  j["status"] = to_string(v.status);
  j["reason"] = v.reason;
  j["marginal"] = v.marginal;
  if (v.witness_zero) j["witness_zero"] = to_json(*v.witness_zero);
  if (v.witness_pole) j["witness_pole"] = to_json(*v.witness_pole);
  return j;
}

Json to_json(const AssumptionReport& r) {
  Json j;
  j["m"] = r.m_used;
  j["b_full_column_rank"] = r.b_full_rank;
  j["b_rank"] = to_json(r.b_rank);
  j["observability_full_column_rank"] = r.obs_full_rank;
  j["observability_rank"] = to_json(r.obs_rank);
  j["satisfied"] = r.satisfied();
  return j;
}

Json to_json(const AttackPlan& p) {
  Json j;
  j["kind"] = to_string(p.kind);
  j["shape"] = to_string(p.shape);
  j["zeta"] = to_json(p.zeta);
  j["direction"] = to_json(p.direction);
  if (p.shape == SignalShape::kRamp) {
    j["ramp_head"] = to_json(p.ramp_head);
    j["ramp_tail"] = to_json(p.ramp_tail);
  }
  j["epsilon"] = number(p.epsilon);
  j["horizon"] = p.horizon;
  j["channels"] = p.channels;
  if (p.kind == AttackKind::kFatMasking) {
    j["masking_input"] = p.masking_input;
    j["delay"] = p.delay;
  }
  if (p.has_exact()) {
    Json exact;
    exact["digits"] = p.digits;
    exact["zeta"] = Json{{"re", p.zeta_exact.re}, {"im", p.zeta_exact.im}};
    exact["direction"] = Json::array();
    for (const ExactComplex& d : p.direction_exact)
      exact["direction"].push_back(Json{{"re", d.re}, {"im", d.im}});
    j["exact"] = std::move(exact);
  }
  j["calibration"] = Json{{"c0_hat", number(p.calibration.c0_hat)},
                          {"safety", number(p.calibration.safety)},
                          {"expected_peak", number(p.calibration.expected_peak)},
                          {"growth", number(p.calibration.growth)}};
  j["theta"] = number(p.theta);
  j["period"] = number(p.period);
  j["m"] = p.m;
  if (!p.note.empty()) j["note"] = p.note;
  return j;
}

AttackPlan plan_from_json(const Json& j_in) {
  // Accept either a bare plan or an attack report with a "plan" member.
  const Json& j = j_in.contains("plan") ? j_in.at("plan") : j_in;
  if (!j.is_object()) fail(ErrorKind::kParse, "attack plan must be a JSON object");
  try {
    AttackPlan p;
    p.kind = attack_kind_from_string(field(j, "kind").get<std::string>());
    p.shape = signal_shape_from_string(j.value("shape", std::string("geometric")));
    p.zeta = complex_from(field(j, "zeta"), "zeta");
    const Json& dir = field(j, "direction");
    if (!dir.is_array()) fail(ErrorKind::kParse, "direction must be an array");
    p.direction.resize(static_cast<Eigen::Index>(dir.size()));
    for (std::size_t i = 0; i < dir.size(); ++i) p.direction(i) = complex_from(dir[i], "direction");
    if (p.shape == SignalShape::kRamp) {
      p.ramp_head = vector_from(field(j, "ramp_head"), "ramp_head");
      p.ramp_tail = vector_from(field(j, "ramp_tail"), "ramp_tail");
    }
    p.epsilon = number_from(field(j, "epsilon"), "epsilon");
    if (!(p.epsilon > 0.0)) fail(ErrorKind::kArgument, "plan epsilon must be positive");
    p.horizon = field(j, "horizon").get<int>();
    if (p.horizon < 1) fail(ErrorKind::kArgument, "plan horizon must be at least 1");
    p.channels = j.value("channels", std::vector<int>{});
    p.masking_input = j.value("masking_input", 1);
    p.delay = j.value("delay", 0);
    if (j.contains("exact")) {
      const Json& e = j.at("exact");
      p.digits = field(e, "digits").get<int>();
      p.zeta_exact = {field(field(e, "zeta"), "re").get<std::string>(),
                      field(field(e, "zeta"), "im").get<std::string>()};
      for (const Json& d : field(e, "direction")) {
        p.direction_exact.push_back(
            {field(d, "re").get<std::string>(), field(d, "im").get<std::string>()});
      }
      if (p.direction_exact.size() != dir.size()) {
        fail(ErrorKind::kDimension, "exact direction does not match direction");
      }
    }
    if (j.contains("calibration")) {
      const Json& c = j.at("calibration");
      p.calibration.c0_hat = number_from(c.value("c0_hat", Json(0.0)), "c0_hat");
      p.calibration.safety = number_from(c.value("safety", Json(2.0)), "safety");
      p.calibration.expected_peak = number_from(c.value("expected_peak", Json(0.0)), "expected_peak");
      p.calibration.growth = number_from(c.value("growth", Json(0.0)), "growth");
    }
    p.theta = number_from(j.value("theta", Json(0.0)), "theta");
    p.period = number_from(j.value("period", Json(0.0)), "period");
    p.m = j.value("m", 1);
    p.note = j.value("note", std::string());
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed attack plan: ") + e.what());
  }
}

Json to_json(const Verdict& v, double theta) {
  Json j;
  j["status"] = v.detected ? "detected" : "stealthy";
  j["theta"] = number(theta);
  j["peak"] = number(v.peak);
  j["index"] = v.detected ? Json(v.index) : Json(nullptr);
  j["step"] = v.detected ? Json(v.step) : Json(nullptr);
  j["substep"] = v.detected ? Json(v.substep) : Json(nullptr);
  return j;
}

void write_trace_csv(std::ostream& os, const SimTrace& tr, double theta) {
  const int nu = tr.u.empty() ? 0 : static_cast<int>(tr.u.front().size());
  const int ny = tr.y.empty() ? 0 : static_cast<int>(tr.y.front().size());
  os << "step,substep,time";
  for (int i = 1; i <= nu; ++i) os << ",u_" << i;
  for (int i = 1; i <= ny; ++i) os << ",y_" << i;
  for (int i = 1; i <= nu; ++i) os << ",da_" << i;
  for (int i = 1; i <= ny; ++i) os << ",ds_" << i;
  os << ",monitor,crossed\n";
  for (std::size_t j = 0; j < tr.y.size(); ++j) {
    const std::size_t k = j / tr.m;
    os << k << ',' << j % tr.m;
    csv_number(os, tr.times[j]);
    for (int i = 0; i < nu; ++i) csv_number(os, tr.u[k](i));
    for (int i = 0; i < ny; ++i) csv_number(os, tr.y[j](i));
    for (int i = 0; i < nu; ++i) csv_number(os, tr.d_a[k](i));
    for (int i = 0; i < ny; ++i) csv_number(os, tr.d_s[j](i));
    csv_number(os, tr.monitor[j]);
    os << ',' << (tr.monitor[j] > theta ? 1 : 0) << '\n';
  }
}

void write_intersample_csv(std::ostream& os, const SimTrace& tr) {
  const int ny = tr.y_intersample.empty() ? 0 : static_cast<int>(tr.y_intersample.front().size());
  os << "time";
  for (int i = 1; i <= ny; ++i) os << ",y_" << i;
  os << '\n';
  for (std::size_t j = 0; j < tr.y_intersample.size(); ++j) {
    os << std::setprecision(17) << tr.fine_times[j];
    for (int i = 0; i < ny; ++i) csv_number(os, tr.y_intersample[j](i));
    os << '\n';
  }
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kParse, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kConfiguration, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorKind::kConfiguration, "failed writing '" + path + "'");
}

std::string format_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace liftguard
