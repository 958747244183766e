#include "liftguard/lift.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "liftguard/errors.hpp"

namespace liftguard {

StateSpace lift_blocks(const StateSpace& fast, int m) {
  fast.validate();
  if (m < 1) fail(ErrorKind::kArgument, "lift: m must be positive");
  const int n = fast.states(), nu = fast.inputs(), ny = fast.outputs();
  StateSpace L;
  L.C.resize(m * ny, n);
  L.D.resize(m * ny, nu);
  Matrix power = Matrix::Identity(n, n);  // A^i
  Matrix sum = Matrix::Zero(n, nu);       // sum_{k<i} A^k B
  for (int i = 0; i < m; ++i) {
    L.C.middleRows(i * ny, ny) = fast.C * power;
    L.D.middleRows(i * ny, ny) = fast.C * sum + fast.D;
    sum += power * fast.B;
    power = power * fast.A;
  }
  L.A = power;
  L.B = sum;
  return L;
}

LiftedSystem lift_discrete(const DiscretePlant& fast, int m) {
  if (m < 2) fail(ErrorKind::kArgument, "lift: m must be >= 2");
  LiftedSystem L;
  L.system = lift_blocks(fast.system, m);
  L.m = m;
  L.base_period = fast.period * m;
  L.fast_plant = fast;

  // One lifted step against m fast steps with a held input.
  const StateSpace& f = fast.system;
  const int n = f.states(), nu = f.inputs(), ny = f.outputs();
  const Matrix probe_x = Matrix::Identity(n, n);
  double worst = 0.0, scale = 1.0;
  for (int j = 0; j < n + nu; ++j) {
    Vector x = j < n ? Vector(probe_x.col(j)) : Vector::Zero(n);
    Vector u = Vector::Zero(nu);
    if (j >= n) u(j - n) = 1.0;
    const Vector x0 = x;
    for (int i = 0; i < m; ++i) {
      const Vector y = f.C * x + f.D * u;
      const Vector yl = L.system.C.middleRows(i * ny, ny) * x0 + L.system.D.middleRows(i * ny, ny) * u;
      worst = std::max(worst, (y - yl).cwiseAbs().maxCoeff());
      scale = std::max(scale, y.cwiseAbs().maxCoeff());
      x = f.A * x + f.B * u;
    }
    const Vector xl = L.system.A * x0 + L.system.B * u;
    worst = std::max(worst, (x - xl).cwiseAbs().maxCoeff());
    scale = std::max(scale, x.cwiseAbs().maxCoeff());
  }
  if (!(worst <= 1e-12 * scale)) {
    fail(ErrorKind::kNumeric, "lift: lifted blocks disagree with the fast plant",
         "error=" + std::to_string(worst));
  }
  return L;
}

LiftedSystem build_lifted(const ContinuousPlant& plant, double T, int m) {
  if (m < 2) fail(ErrorKind::kArgument, "build_lifted: m must be >= 2");
  return lift_discrete(discretize_fast(plant, T, m), m);
}

Matrix observability_stack(const StateSpace& fast, int m) {
  const int n = fast.states(), ny = fast.outputs();
  const int blocks = std::max(m - 1, 0);
  Matrix O(blocks * ny, n);
  Matrix row = fast.C;
  for (int i = 0; i < blocks; ++i) {
    O.middleRows(i * ny, ny) = row;
    row = row * fast.A;
  }
  return O;
}

Matrix differencing_matrix(int m, int ny) {
  if (m < 2) fail(ErrorKind::kArgument, "differencing_matrix: m must be >= 2");
  Matrix X = Matrix::Zero((m - 1) * ny, m * ny);
  for (int i = 0; i + 1 < m; ++i) {
    X.block(i * ny, i * ny, ny, ny).setIdentity();
    X.block(i * ny, (i + 1) * ny, ny, ny) = -Matrix::Identity(ny, ny);
  }
  return X;
}

AssumptionReport check_assumptions(const LiftedSystem& lifted) {
  const StateSpace& f = lifted.fast_plant.system;
  AssumptionReport r;
  r.m_used = lifted.m;
  r.b_rank = rank_svd(f.B);
  r.b_full_rank = r.b_rank.full_column_rank(f.inputs());
  const Matrix O = observability_stack(f, lifted.m);
  if (O.rows() > 0) {
    // Column scaling keeps the verdict independent of the state units.
    Matrix On = O;
    for (int j = 0; j < On.cols(); ++j) {
      const double c = On.col(j).norm();
      if (c > 0.0) On.col(j) /= c;
    }
    r.obs_rank = rank_svd(On);
  }
  r.obs_full_rank = r.obs_rank.full_column_rank(f.states());
  return r;
}

ChooseMResult choose_m(const ContinuousPlant& plant, double T, int m_max) {
  const int n = plant.system.states();
  if (m_max <= 0) m_max = n + 1;
  if (m_max < 2) fail(ErrorKind::kArgument, "choose_m: m_max must be >= 2");
  const int limit = std::max(m_max, n + 1);
  ChooseMResult out;
  for (int m = 2; m <= limit; ++m) {
    const LiftedSystem L = build_lifted(plant, T, m);
    const AssumptionReport r = check_assumptions(L);
    if (r.satisfied()) {
      out.m = m;
      out.report = r;
      if (m > m_max) {
        out.note = "no m <= " + std::to_string(m_max) + " satisfies the assumptions; using " +
                   std::to_string(m);
      }
      return out;
    }
    out.report = r;
  }
  const std::string which = out.report.b_full_rank
                                ? "observability stack is rank deficient (pair (A, C) unobservable)"
                                : "B of the fast plant is not full column rank";
  fail(ErrorKind::kModel, "choose_m: no m up to " + std::to_string(limit) +
                              " satisfies the lifting assumptions: " + which);
}

ShiftCheck shift_consistency_check(const LiftedSystem& lifted, int trials, std::mt19937_64& rng,
                                   int steps) {
  const StateSpace& f = lifted.fast_plant.system;
  const int m = lifted.m, nu = f.inputs(), ny = f.outputs();
  std::normal_distribution<double> nd;
  ShiftCheck out;
  out.trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::vector<Vector> u(steps, Vector(nu));
    for (auto& v : u)
      for (auto& e : v) e = nd(rng);

    std::vector<Vector> delayed(steps + 1, Vector::Zero(nu));
    std::copy(u.begin(), u.end(), delayed.begin() + 1);
    const auto lifted_y = ss_response(lifted.system, delayed);

    std::vector<Vector> held;
    held.reserve(steps * m);
    for (const Vector& v : u)
      for (int i = 0; i < m; ++i) held.push_back(v);
    const auto fast_y = ss_response(f, held);

    double scale = 1.0, worst = 0.0;
    for (int k = 0; k <= steps; ++k) {
      for (int i = 0; i < m; ++i) {
        const int j = k * m + i - m;  // fast index after an m sub-step delay
        const Vector ref = j >= 0 ? fast_y[j] : Vector::Zero(ny);
        const Vector got = lifted_y[k].segment(i * ny, ny);
        worst = std::max(worst, (ref - got).cwiseAbs().maxCoeff());
        scale = std::max(scale, ref.cwiseAbs().maxCoeff());
      }
    }
    const double rel = worst / scale;
    out.worst_error = std::max(out.worst_error, rel);
    if (!(rel <= 1e-10)) out.consistent = false;
  }
  return out;
}

Controller lift_single_rate_controller(const Controller& k, int m) {
  if (k.kind != ControllerKind::kSingleRate) {
    fail(ErrorKind::kArgument, "lift_single_rate_controller: controller is already lifted");
  }
  if (!k.strictly_proper) {
    fail(ErrorKind::kArgument, "lift_single_rate_controller: controller must be strictly proper");
  }
  const int ny = k.system.inputs();
  Controller out = k;
  out.kind = ControllerKind::kLifted;
  out.system.B = Matrix::Zero(k.system.states(), m * ny);
  out.system.B.leftCols(ny) = k.system.B;
  out.system.D = Matrix::Zero(k.system.outputs(), m * ny);
  return out;
}

}  // namespace liftguard
