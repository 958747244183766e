#include "liftguard/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liftguard/errors.hpp"
#include "liftguard/lift.hpp"
#include "masking.hpp"
#include "mp.hpp"

namespace liftguard {

namespace {

constexpr double kDivergence = 1e12;

template <typename S>
using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
double inf_norm(const VecS<S>& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(mp::to_double(v(i)));
    if (std::isnan(a)) return a;
    m = std::max(m, a);
  }
  return m;
}

template <typename S>
Vector to_vector(const VecS<S>& v) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = mp::to_double(v(i));
  return out;
}

/// Geometric or ramp signal of a plan, advanced one index per call.
template <typename S>
class PlanSignal {
 public:
  explicit PlanSignal(const AttackPlan& p) : plan_(p), eps_(p.epsilon) {
    if (p.shape == SignalShape::kRamp) {
      head_ = p.ramp_head.cast<S>();
      tail_ = p.ramp_tail.cast<S>();
      return;
    }
    const int dim = static_cast<int>(p.direction.size());
    if (p.has_exact() && static_cast<int>(p.direction_exact.size()) == dim) {
      zr_ = mp::from_decimal<S>(p.zeta_exact.re);
      zi_ = mp::from_decimal<S>(p.zeta_exact.im);
      pr_.resize(dim);
      pi_.resize(dim);
      for (int i = 0; i < dim; ++i) {
        pr_(i) = mp::from_decimal<S>(p.direction_exact[i].re);
        pi_(i) = mp::from_decimal<S>(p.direction_exact[i].im);
      }
    } else {
      zr_ = S(p.zeta.real());
      zi_ = S(p.zeta.imag());
      pr_ = p.direction.real().cast<S>();
      pi_ = p.direction.imag().cast<S>();
    }
  }

  int dim() const {
    return static_cast<int>(plan_.shape == SignalShape::kRamp ? plan_.ramp_head.size()
                                                              : plan_.direction.size());
  }

  VecS<S> next() {
    VecS<S> out;
    if (plan_.shape == SignalShape::kRamp) {
      out = eps_ * (S(k_) * head_ - tail_);
    } else {
      out = eps_ * pr_;
      VecS<S> nr = pr_ * zr_ - pi_ * zi_;
      pi_ = pr_ * zi_ + pi_ * zr_;
      pr_ = std::move(nr);
    }
    ++k_;
    return out;
  }

 private:
  const AttackPlan& plan_;
  S eps_;
  S zr_, zi_;
  VecS<S> pr_, pi_, head_, tail_;
  long k_ = 0;
};

struct Prepared {
  StateSpace fast;  // period T / m
  Matrix fine_A, fine_B;
  StateSpace base;  // period T
};

void check_config(const LoopConfig& cfg) {
  cfg.plant.system.validate();
  const int n = cfg.plant.system.states();
  const int nu = cfg.plant.system.inputs(), ny = cfg.plant.system.outputs();
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) fail(ErrorKind::kArgument, "sim: T must be positive");
  if (cfg.m < 1) fail(ErrorKind::kArgument, "sim: m must be at least 1");
  if (!(cfg.theta > 0.0)) fail(ErrorKind::kArgument, "sim: theta must be positive");
  if (cfg.horizon < 1) fail(ErrorKind::kArgument, "sim: horizon must be at least 1");
  if (cfg.oversample < 1) fail(ErrorKind::kArgument, "sim: oversample must be at least 1");
  const Controller& k = cfg.controller;
  k.system.validate();
  if (cfg.m == 1 && k.kind != ControllerKind::kSingleRate) {
    fail(ErrorKind::kConfiguration, "single-rate loop needs a single-rate controller");
  }
  if (cfg.m >= 2 && k.kind != ControllerKind::kLifted) {
    fail(ErrorKind::kConfiguration, "dual-rate loop needs a lifted controller");
  }
  if (k.system.D.size() > 0 && k.system.D.cwiseAbs().maxCoeff() != 0.0) {
    fail(ErrorKind::kConfiguration, "controller must be strictly proper");
  }
  if (k.system.inputs() != cfg.m * ny || k.system.outputs() != nu) {
    fail(ErrorKind::kDimension, "sim: controller does not fit the plant",
         "controller " + std::to_string(k.system.inputs()) + "->" +
             std::to_string(k.system.outputs()));
  }
  if (cfg.x0_plant.size() != 0 && cfg.x0_plant.size() != n) {
    fail(ErrorKind::kDimension, "sim: x0_plant has the wrong size");
  }
  if (cfg.x0_controller.size() != 0 && cfg.x0_controller.size() != k.system.states()) {
    fail(ErrorKind::kDimension, "sim: x0_controller has the wrong size");
  }
  for (const Vector& d : cfg.d_a)
    if (d.size() != nu) fail(ErrorKind::kDimension, "sim: d_a entry has the wrong size");
  for (const Vector& d : cfg.d_s)
    if (d.size() != ny) fail(ErrorKind::kDimension, "sim: d_s entry has the wrong size");
  if (cfg.attack) {
    const AttackPlan& p = *cfg.attack;
    const int dim = static_cast<int>(p.shape == SignalShape::kRamp ? p.ramp_head.size()
                                                                   : p.direction.size());
    const int want = p.kind == AttackKind::kSensorPole ? ny : nu;
    if (dim != want) fail(ErrorKind::kDimension, "sim: attack plan does not fit the plant");
    if (p.shape == SignalShape::kRamp && p.ramp_tail.size() != dim) {
      fail(ErrorKind::kDimension, "sim: ramp tail has the wrong size");
    }
  }
}

template <typename S>
SimTrace run_core(const LoopConfig& cfg, const Prepared& P, int digits) {
  const int n = cfg.plant.system.states();
  const int nu = cfg.plant.system.inputs(), ny = cfg.plant.system.outputs();
  const int m = cfg.m, R = cfg.oversample, H = cfg.horizon;
  const StateSpace& K = cfg.controller.system;

  const MatS<S> Af = P.fast.A.cast<S>(), Bf = P.fast.B.cast<S>();
  const MatS<S> C = P.fast.C.cast<S>(), D = P.fast.D.cast<S>();
  const MatS<S> Ar = P.fine_A.cast<S>(), Br = P.fine_B.cast<S>();
  const MatS<S> Ak = K.A.cast<S>(), Bk = K.B.cast<S>(), Ck = K.C.cast<S>();

  VecS<S> x = cfg.x0_plant.size() ? VecS<S>(cfg.x0_plant.cast<S>()) : VecS<S>(VecS<S>::Zero(n));
  VecS<S> xk = cfg.x0_controller.size() ? VecS<S>(cfg.x0_controller.cast<S>())
                                        : VecS<S>(VecS<S>::Zero(K.states()));

  const AttackPlan* plan = cfg.attack ? &*cfg.attack : nullptr;
  std::optional<PlanSignal<S>> signal;
  if (plan) signal.emplace(*plan);
  const bool sensor_plan = plan && plan->kind == AttackKind::kSensorPole;
  const bool coordinated = plan && plan->kind == AttackKind::kCoordinated;
  std::optional<MaskingFilter> filter;
  std::optional<Masker<S>> masker;
  if (plan && plan->kind == AttackKind::kFatMasking) {
    const int free_input = plan->channels.empty() ? 0 : plan->channels.front();
    filter = masking_filter(P.base, free_input, plan->masking_input);
    masker.emplace(*filter);
  }
  VecS<S> xs = VecS<S>::Zero(n);  // coordinated shadow plant

  const bool attack_free = !plan && cfg.d_a.empty() && cfg.d_s.empty();

  SimTrace tr;
  tr.m = m;
  tr.T = cfg.T;
  tr.digits = digits;
  const double h = cfg.T / m;
  tr.times.reserve(static_cast<std::size_t>(H) * m);
  double peak = 0.0;

  for (int k = 0; k < H; ++k) {
    const VecS<S> u = Ck * xk;
    VecS<S> da = VecS<S>::Zero(nu);
    if (plan && !sensor_plan) {
      if (masker) {
        const VecS<S> s = signal->next();
        const int fi = filter->free_input;
        const auto [v1, v2] = masker->step(s(fi));
        da(fi) = v1;
        da(filter->masking_input) = v2;
      } else {
        da = signal->next();
      }
    }
    if (k < static_cast<int>(cfg.d_a.size())) da += cfg.d_a[k].cast<S>();
    const VecS<S> v = u + da;
    tr.u.push_back(to_vector<S>(u));
    tr.d_a.push_back(to_vector<S>(da));
    const double u_norm = inf_norm<S>(u);

    VecS<S> ytilde(m * ny);
    double step_peak = 0.0;
    for (int i = 0; i < m; ++i) {
      const int j = k * m + i;
      const VecS<S> y_true = C * x + D * v;
      VecS<S> ds = VecS<S>::Zero(ny);
      if (sensor_plan) ds = signal->next();
      if (coordinated) {
        ds = -(C * xs + D * da);
        xs = Af * xs + Bf * da;
      }
      if (j < static_cast<int>(cfg.d_s.size())) ds += cfg.d_s[j].cast<S>();
      const VecS<S> y_meas = y_true + ds;
      ytilde.segment(i * ny, ny) = y_meas;

      const double mon = std::max(inf_norm<S>(y_meas), u_norm);
      if (attack_free && !(mon <= kDivergence)) {
        fail(ErrorKind::kConfiguration, "sim: attack-free loop diverges",
             "step=" + std::to_string(k));
      }
      if (!tr.verdict.detected && !(mon <= cfg.theta)) {
        tr.verdict.detected = true;
        tr.verdict.index = j;
        tr.verdict.step = k;
        tr.verdict.substep = i;
      }
      peak = std::isnan(mon) ? mon : std::max(peak, mon);
      step_peak = std::isnan(mon) ? mon : std::max(step_peak, mon);
      tr.times.push_back(j * h);
      tr.y.push_back(to_vector<S>(y_meas));
      tr.y_plant.push_back(to_vector<S>(y_true));
      tr.d_s.push_back(to_vector<S>(ds));
      tr.monitor.push_back(mon);

      if (cfg.record_intersample) {
        tr.y_intersample.push_back(tr.y_plant.back());
        tr.fine_times.push_back(j * h);
        VecS<S> xr = Ar * x + Br * v;
        for (int q = 1; q < R; ++q) {
          tr.y_intersample.push_back(to_vector<S>(VecS<S>(C * xr + D * v)));
          tr.fine_times.push_back((static_cast<double>(j) * R + q) * h / R);
          xr = Ar * xr + Br * v;
        }
      }
      x = Af * x + Bf * v;
    }
    tr.step_monitor.push_back(step_peak);
    xk = Ak * xk + Bk * ytilde;
  }
  tr.verdict.peak = peak;
  return tr;
}

Prepared prepare(const LoopConfig& cfg) {
  Prepared P;
  const DiscretePlant base = discretize(cfg.plant, cfg.T);
  P.base = base.system;
  P.fast = cfg.m == 1 ? base.system : discretize_fast(cfg.plant, cfg.T, cfg.m).system;
  const DiscretePlant fine = discretize(cfg.plant, cfg.T / (cfg.m * cfg.oversample));
  P.fine_A = fine.system.A;
  P.fine_B = fine.system.B;

  const StateSpace plant = cfg.m == 1 ? base.system : lift_blocks(P.fast, cfg.m);
  const double rho = spectral_radius(closed_loop_matrix(plant, cfg.controller.system));
  if (!(rho < 1.0)) {
    fail(ErrorKind::kConfiguration, "sim: controller does not stabilize the loop",
         "rho=" + std::to_string(rho));
  }
  return P;
}

SimTrace run(const LoopConfig& cfg) {
  check_config(cfg);
  const Prepared P = prepare(cfg);
  const int digits = required_digits(cfg);
  if (digits == 0) return run_core<double>(cfg, P, 0);
  mp::PrecisionScope scope(digits);
  return run_core<mp::Real>(cfg, P, digits);
}

}  // namespace

LoopConfig make_loop(const ContinuousPlant& plant, double T, int m, double theta, int horizon,
                     const FactorOptions& options) {
  LoopConfig cfg;
  cfg.plant = plant;
  cfg.T = T;
  cfg.m = m;
  cfg.theta = theta;
  cfg.horizon = horizon;
  if (m < 1) fail(ErrorKind::kArgument, "make_loop: m must be at least 1");
  if (m == 1) {
    const CoprimeFactors f = coprime_factorize(discretize(plant, T).system, options);
    cfg.controller = observer_controller(f);
  } else {
    const CoprimeFactors f = coprime_factorize(build_lifted(plant, T, m).system, options);
    cfg.controller = observer_controller(f, ControllerKind::kLifted);
  }
  return cfg;
}

StateSpace loop_plant(const LoopConfig& cfg) {
  if (cfg.m == 1) return discretize(cfg.plant, cfg.T).system;
  return build_lifted(cfg.plant, cfg.T, cfg.m).system;
}

int required_digits(const LoopConfig& cfg) {
  if (!cfg.attack) return 0;
  const AttackPlan& p = *cfg.attack;
  const double H = cfg.horizon;
  double growth = 2.0 * std::log10(H + 1.0);
  if (p.shape == SignalShape::kGeometric) {
    const double samples = p.kind == AttackKind::kSensorPole ? H * cfg.m : H;
    growth += samples * std::log10(std::max(1.0, std::abs(p.zeta)));
  }
  if (p.kind == AttackKind::kCoordinated) {
    // The shadow plant runs open loop at the sensor rate.
    const double rho = spectral_radius(discretize(cfg.plant, cfg.T / cfg.m).system.A);
    growth += H * cfg.m * std::log10(std::max(1.0, rho));
  }
  if (p.kind == AttackKind::kFatMasking) {
    const StateSpace base = discretize(cfg.plant, cfg.T).system;
    const int free_input = p.channels.empty() ? 0 : p.channels.front();
    const MaskingFilter f = masking_filter(base, free_input, p.masking_input);
    growth += H * std::log10(std::max(1.0, spectral_radius(f.closed)));
  }
  return 30 + static_cast<int>(std::ceil(growth));
}

SimTrace run_single_rate(const LoopConfig& cfg) {
  if (cfg.m != 1) fail(ErrorKind::kConfiguration, "run_single_rate: m must be 1");
  return run(cfg);
}

SimTrace run_dual_rate(const LoopConfig& cfg) {
  if (cfg.m < 2) fail(ErrorKind::kConfiguration, "run_dual_rate: m must be at least 2");
  return run(cfg);
}

SimTrace simulate(const LoopConfig& cfg) { return cfg.m == 1 ? run_single_rate(cfg) : run_dual_rate(cfg); }

Verdict monitor_eval(std::span<const Vector> y, std::span<const Vector> u, double theta, int m) {
  if (m < 1) fail(ErrorKind::kArgument, "monitor_eval: m must be at least 1");
  if (y.size() != u.size() * static_cast<std::size_t>(m)) {
    fail(ErrorKind::kDimension, "monitor_eval: streams are not aligned");
  }
  Verdict v;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const Vector& uj = u[j / m];
    const double mon = std::max(y[j].size() ? y[j].cwiseAbs().maxCoeff() : 0.0,
                                uj.size() ? uj.cwiseAbs().maxCoeff() : 0.0);
    v.peak = std::max(v.peak, mon);
    if (!v.detected && mon > theta) {
      v.detected = true;
      v.index = static_cast<int>(j);
      v.step = static_cast<int>(j) / m;
      v.substep = static_cast<int>(j) % m;
    }
  }
  return v;
}

LiftedRun run_lifted_lti(const StateSpace& G, const StateSpace& K, std::span<const Vector> d_a,
                         std::span<const Vector> d_s, const Vector& x0_plant,
                         const Vector& x0_controller) {
  if (d_s.size() != d_a.size()) fail(ErrorKind::kDimension, "run_lifted_lti: stream lengths differ");
  Vector x = x0_plant.size() ? x0_plant : Vector::Zero(G.states());
  Vector xk = x0_controller.size() ? x0_controller : Vector::Zero(K.states());
  LiftedRun out;
  for (std::size_t k = 0; k < d_a.size(); ++k) {
    const Vector u = K.C * xk;
    const Vector v = u + d_a[k];
    const Vector y = G.C * x + G.D * v + d_s[k];
    out.u.push_back(u);
    out.y.push_back(y);
    x = G.A * x + G.B * v;
    xk = K.A * xk + K.B * y;
  }
  return out;
}

}  // namespace liftguard
