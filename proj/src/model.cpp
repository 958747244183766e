#include "liftguard/model.hpp"

#include <cmath>
#include <numbers>

#include "liftguard/errors.hpp"

namespace liftguard {

void StateSpace::validate() const {
  const auto n = A.rows();
  if (A.cols() != n) fail(ErrorKind::kDimension, "state matrix A must be square");
  if (B.rows() != n) fail(ErrorKind::kDimension, "B must have as many rows as A");
  if (C.cols() != n) fail(ErrorKind::kDimension, "C must have as many columns as A");
  if (D.rows() != C.rows() || D.cols() != B.cols()) {
    fail(ErrorKind::kDimension, "D must be outputs x inputs");
  }
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
    fail(ErrorKind::kArgument, "state-space matrices must be finite");
  }
}

CMatrix StateSpace::evaluate(Complex z) const {
  const auto n = A.rows();
  CMatrix pencil = z * CMatrix::Identity(n, n) - A.cast<Complex>();
  CMatrix X = pencil.partialPivLu().solve(B.cast<Complex>());
  return C.cast<Complex>() * X + D.cast<Complex>();
}

ContinuousPlant make_continuous_plant(Matrix Ac, Matrix Bc, Matrix Cc, Matrix Dc,
                                      std::string name) {
  ContinuousPlant p{StateSpace{std::move(Ac), std::move(Bc), std::move(Cc), std::move(Dc)},
                    std::move(name)};
  p.system.validate();
  if (p.system.states() == 0) fail(ErrorKind::kDimension, "plant must have at least one state");
  return p;
}

namespace {

DiscretePlant zoh(const ContinuousPlant& plant, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    fail(ErrorKind::kArgument, "sampling period must be positive");
  }
  const StateSpace& c = plant.system;
  c.validate();
  const int n = c.states();
  const int nu = c.inputs();
  // expm([[Ac, Bc], [0, 0]] h) = [[Ad, Bd], [0, I]]
  Matrix aug = Matrix::Zero(n + nu, n + nu);
  aug.topLeftCorner(n, n) = c.A * h;
  aug.topRightCorner(n, nu) = c.B * h;
  const Matrix e = expm(aug);
  DiscretePlant d;
  d.system.A = e.topLeftCorner(n, n);
  d.system.B = e.topRightCorner(n, nu);
  d.system.C = c.C;
  d.system.D = c.D;
  d.period = h;
  return d;
}

}  // namespace

DiscretePlant discretize(const ContinuousPlant& plant, double T) {
  DiscretePlant d = zoh(plant, T);
  d.origin = SamplingOrigin{SamplingOrigin::Kind::kSingleRate, T, 1};
  d.pathological_sampling = check_pathological(plant, T).pathological;
  return d;
}

DiscretePlant discretize_fast(const ContinuousPlant& plant, double T, int m) {
  if (m < 1) fail(ErrorKind::kArgument, "rate multiplier m must be >= 1");
  DiscretePlant d = zoh(plant, T / m);
  d.origin = SamplingOrigin{SamplingOrigin::Kind::kFastRate, T, m};
  d.pathological_sampling = check_pathological(plant, T / m).pathological;
  return d;
}

PathologicalReport check_pathological(const ContinuousPlant& plant, double T) {
  PathologicalReport report;
  if (!(T > 0.0)) return report;
  const std::vector<Complex> ev = eig(plant.system.A);
  const double spacing = 2.0 * std::numbers::pi / T;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    for (std::size_t j = i + 1; j < ev.size(); ++j) {
      const double scale = std::max({1.0, std::abs(ev[i]), std::abs(ev[j])});
      if (std::abs(ev[i].real() - ev[j].real()) > 1e-9 * scale) continue;
      const double k = std::abs(ev[i].imag() - ev[j].imag()) / spacing;
      const double nearest = std::round(k);
      if (nearest >= 1.0 && std::abs(k - nearest) <= 1e-9 * std::max(1.0, k)) {
        report.pathological = true;
        report.offending.emplace_back(ev[i], ev[j]);
      }
    }
  }
  return report;
}

std::pair<StateSpace, Vector> balance(const StateSpace& sys) {
  StateSpace out = sys;
  const int n = sys.states();
  Vector s = Vector::Ones(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const double col = std::sqrt(out.A.col(i).squaredNorm() - out.A(i, i) * out.A(i, i) +
                                   out.C.col(i).squaredNorm());
      const double row = std::sqrt(out.A.row(i).squaredNorm() - out.A(i, i) * out.A(i, i) +
                                   out.B.row(i).squaredNorm());
      if (col == 0.0 || row == 0.0) continue;
      const double f = std::exp2(std::round(0.5 * std::log2(row / col)));
      if (f == 1.0) continue;
      if ((col * f) * (col * f) + (row / f) * (row / f) >= 0.95 * (col * col + row * row)) {
        continue;
      }
      out.A.col(i) *= f;
      out.C.col(i) *= f;
      out.A.row(i) /= f;
      out.B.row(i) /= f;
      s(i) *= f;
      changed = true;
    }
    if (!changed) break;
  }
  return {out, s};
}

namespace {

Matrix normalized_columns(Matrix M) {
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    const double nrm = M.col(j).norm();
    if (nrm > 0.0) M.col(j) /= nrm;
  }
  return M;
}

}  // namespace

MinimalityReport check_minimal(const StateSpace& sys) {
  sys.validate();
  const auto [bal, scaling] = balance(sys);
  const int n = bal.states();
  MinimalityReport report;
  if (n == 0) {
    report.controllable = report.observable = true;
    return report;
  }
  const int nu = bal.inputs();
  const int ny = bal.outputs();

  Matrix ctrb(n, n * nu);
  if (nu > 0) {
    ctrb.leftCols(nu) = bal.B;
    for (int k = 1; k < n; ++k) {
      ctrb.middleCols(k * nu, nu) = bal.A * ctrb.middleCols((k - 1) * nu, nu);
    }
  }
  Matrix obsv(n * ny, n);
  if (ny > 0) {
    obsv.topRows(ny) = bal.C;
    for (int k = 1; k < n; ++k) {
      obsv.middleRows(k * ny, ny) = obsv.middleRows((k - 1) * ny, ny) * bal.A;
    }
  }
  if (nu > 0) {
    report.controllability = rank_svd(normalized_columns(ctrb));
    report.controllable = report.controllability.rank == n;
  }
  if (ny > 0) {
    report.observability = rank_svd(normalized_columns(obsv.transpose()));
    report.observable = report.observability.rank == n;
  }
  return report;
}

void validate_minimal(const ContinuousPlant& plant) {
  const MinimalityReport r = check_minimal(plant.system);
  if (!r.minimal()) {
    std::string what = !r.controllable && !r.observable
                           ? "neither controllable nor observable"
                           : (!r.controllable ? "not controllable" : "not observable");
    fail(ErrorKind::kModel, "plant realization" +
                                (plant.name.empty() ? std::string() : " '" + plant.name + "'") +
                                " is not minimal: " + what);
  }
}

std::vector<Vector> ss_response(const StateSpace& sys, std::span<const Vector> input,
                                const Vector& x0) {
  sys.validate();
  if (x0.size() != sys.states()) fail(ErrorKind::kDimension, "ss_response: x0 has wrong size");
  std::vector<Vector> out;
  out.reserve(input.size());
  Vector x = x0;
  for (const Vector& u : input) {
    if (u.size() != sys.inputs()) {
      fail(ErrorKind::kDimension, "ss_response: input sample has wrong size");
    }
    out.push_back(sys.C * x + sys.D * u);
    x = sys.A * x + sys.B * u;
  }
  return out;
}

std::vector<Vector> ss_response(const StateSpace& sys, std::span<const Vector> input) {
  return ss_response(sys, input, Vector::Zero(sys.states()));
}

}  // namespace liftguard
