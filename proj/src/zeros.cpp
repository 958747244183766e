#include "liftguard/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "liftguard/errors.hpp"

namespace liftguard {

std::string to_string(ZeroClass c) {
  switch (c) {
    case ZeroClass::kNmpStrict: return "nmp_strict";
    case ZeroClass::kBoundarySimple: return "boundary_simple";
    case ZeroClass::kBoundaryMultiple: return "boundary_multiple";
    case ZeroClass::kMinimumPhase: return "minimum_phase";
  }
  return "unknown";
}

std::string to_string(PoleClass c) {
  switch (c) {
    case PoleClass::kUnstable: return "unstable";
    case PoleClass::kBoundary: return "boundary";
    case PoleClass::kStable: return "stable";
  }
  return "unknown";
}

std::string to_string(SystemShape s) {
  switch (s) {
    case SystemShape::kTall: return "tall";
    case SystemShape::kSquare: return "square";
    case SystemShape::kFat: return "fat";
  }
  return "unknown";
}

std::string to_string(AtOne a) {
  switch (a) {
    case AtOne::kNotAZero: return "not_a_zero";
    case AtOne::kSimple: return "simple";
    case AtOne::kMultiple: return "multiple";
  }
  return "unknown";
}

std::string to_string(Exposure e) {
  switch (e) {
    case Exposure::kYes: return "yes";
    case Exposure::kNo: return "no";
    case Exposure::kUndecided: return "undecided";
  }
  return "unknown";
}

SystemShape shape_of(const StateSpace& sys) {
  if (sys.outputs() > sys.inputs()) return SystemShape::kTall;
  if (sys.outputs() < sys.inputs()) return SystemShape::kFat;
  return SystemShape::kSquare;
}

namespace {

/// Balanced state coordinates plus unit-norm input columns and output rows.
/// x = diag(state) x_s, u = diag(input) u_s.
struct ScaledSystem {
  StateSpace sys;
  Vector state;
  Vector input;
};

ScaledSystem scale_system(const StateSpace& original) {
  auto [bal, s] = balance(original);
  Vector in_scale = Vector::Ones(bal.inputs());
  for (int j = 0; j < bal.inputs(); ++j) {
    const double nrm = std::sqrt(bal.B.col(j).squaredNorm() + bal.D.col(j).squaredNorm());
    if (nrm > 0.0) in_scale(j) = 1.0 / nrm;
  }
  Vector out_scale = Vector::Ones(bal.outputs());
  for (int i = 0; i < bal.outputs(); ++i) {
    const double nrm = std::sqrt(bal.C.row(i).squaredNorm() + bal.D.row(i).squaredNorm());
    if (nrm > 0.0) out_scale(i) = 1.0 / nrm;
  }
  ScaledSystem out;
  out.sys.A = bal.A;
  out.sys.B = bal.B * in_scale.asDiagonal();
  out.sys.C = out_scale.asDiagonal() * bal.C;
  out.sys.D = out_scale.asDiagonal() * bal.D * in_scale.asDiagonal();
  out.state = s;
  out.input = in_scale;
  return out;
}

CMatrix pencil_at(const StateSpace& s, Complex z) {
  const int n = s.states(), nu = s.inputs(), ny = s.outputs();
  CMatrix P(n + ny, n + nu);
  P.topLeftCorner(n, n) = z * CMatrix::Identity(n, n) - s.A.cast<Complex>();
  P.topRightCorner(n, nu) = -s.B.cast<Complex>();
  P.bottomLeftCorner(ny, n) = s.C.cast<Complex>();
  P.bottomRightCorner(ny, nu) = s.D.cast<Complex>();
  return P;
}

int normal_rank_scaled(const StateSpace& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> radius(0.5, 2.0);
  int best = 0;
  for (int k = 0; k < 3; ++k) {
    const Complex z = std::polar(radius(rng), angle(rng));
    best = std::max(best, rank_svd(pencil_at(s, z), kDefaultRankTol).rank);
  }
  return best;
}

struct QzResult {
  std::vector<Complex> finite;
  int infinite = 0;
};

/// Generalized eigenvalues of the square pencil z E - M, E = diag(I, 0).
QzResult square_pencil_zeros(const StateSpace& s) {
  const int n = s.states(), p = s.inputs();
  Matrix M(n + p, n + p), E = Matrix::Zero(n + p, n + p);
  M << s.A, s.B, -s.C, -s.D;
  E.topLeftCorner(n, n).setIdentity();
  Eigen::GeneralizedEigenSolver<Matrix> ges(M, E, /*computeEigenvectors=*/false);
  if (ges.info() != Eigen::Success) {
    fail(ErrorKind::kNumeric, "transmission_zeros: QZ iteration failed");
  }
  QzResult out;
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    const double b = betas(i);
    const Complex a = alphas(i);
    if (std::abs(b) > 0.0 && std::abs(a) <= 1e8 * std::abs(b)) {
      out.finite.push_back(a / b);
    } else {
      ++out.infinite;
    }
  }
  return out;
}

Matrix random_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix W(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) W(i, j) = nd(rng);
  return W;
}

StateSpace square_down(const StateSpace& s, std::mt19937_64& rng) {
  StateSpace out = s;
  if (s.outputs() > s.inputs()) {
    const Matrix W = random_normal(s.inputs(), s.outputs(), rng);
    out.C = W * s.C;
    out.D = W * s.D;
  } else if (s.outputs() < s.inputs()) {
    const Matrix V = random_normal(s.inputs(), s.outputs(), rng);
    out.B = s.B * V;
    out.D = s.D * V;
  }
  return out;
}

bool close(Complex a, Complex b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

struct Confirmation {
  double residual = 0.0;
  double norm = 0.0;
  CVector null_vector;
};

Confirmation confirm(const StateSpace& s, Complex z, int nr) {
  const CMatrix P = pencil_at(s, z);
  Eigen::JacobiSVD<CMatrix> svd(P, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  Confirmation c;
  c.norm = sv.size() ? sv(0) : 0.0;
  const int idx = std::clamp(nr - 1, 0, static_cast<int>(sv.size()) - 1);
  c.residual = sv(idx);
  c.null_vector = svd.matrixV().col(std::min<Eigen::Index>(nr - 1, P.cols() - 1));
  return c;
}

std::string describe(const std::vector<Complex>& zs) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (i) os << ",";
    os << "[" << zs[i].real() << "," << zs[i].imag() << "]";
  }
  os << "]";
  return os.str();
}

/// Greedy multiset intersection: keeps entries of a that have an unused
/// partner in b within tol.
std::vector<Complex> intersect(const std::vector<Complex>& a, const std::vector<Complex>& b,
                               double tol, std::vector<Complex>* unmatched) {
  std::vector<bool> used(b.size(), false);
  std::vector<Complex> out;
  for (const Complex& x : a) {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j] || !close(x, b[j], tol)) continue;
      const double d = std::abs(x - b[j]);
      if (best < 0 || d < best_d) {
        best = static_cast<int>(j);
        best_d = d;
      }
    }
    if (best >= 0) {
      used[best] = true;
      out.push_back(0.5 * (x + b[best]));
    } else if (unmatched) {
      unmatched->push_back(x);
    }
  }
  if (unmatched) {
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!used[j]) unmatched->push_back(b[j]);
  }
  return out;
}

std::optional<Complex> inverse_of(Complex z) {
  if (z == Complex(0.0, 0.0)) return std::nullopt;
  return Complex(1.0, 0.0) / z;
}

/// Groups points within tol; returns cluster index per point.
std::vector<int> cluster(const std::vector<Complex>& pts, double tol) {
  std::vector<int> id(pts.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (id[i] >= 0) continue;
    id[i] = next;
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (id[j] < 0 && close(pts[i], pts[j], tol)) id[j] = next;
    }
    ++next;
  }
  return id;
}

}  // namespace

int pencil_normal_rank(const StateSpace& sys, std::mt19937_64& rng) {
  return normal_rank_scaled(scale_system(sys).sys, rng);
}

Vector pencil_singular_values(const StateSpace& sys, Complex z) {
  const ScaledSystem s = scale_system(sys);
  Eigen::JacobiSVD<CMatrix> svd(pencil_at(s.sys, z));
  return svd.singularValues();
}

bool has_zero_at(const StateSpace& sys, Complex z, std::mt19937_64& rng, double rel_tol) {
  const ScaledSystem s = scale_system(sys);
  const int nr = normal_rank_scaled(s.sys, rng);
  const Confirmation c = confirm(s.sys, z, nr);
  return c.residual <= rel_tol * c.norm;
}

std::vector<PoleRecord> poles(const StateSpace& sys, double boundary_tol) {
  sys.validate();
  const std::vector<Complex> ev = eig(sys.A);
  const std::vector<int> ids = cluster(ev, 1e-5);
  std::vector<PoleRecord> out;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    PoleRecord p;
    p.z = ev[i];
    p.lambda = inverse_of(ev[i]);
    p.multiplicity = static_cast<int>(std::count(ids.begin(), ids.end(), ids[i]));
    Complex mean(0.0, 0.0);
    for (std::size_t j = 0; j < ev.size(); ++j)
      if (ids[j] == ids[i]) mean += ev[j];
    mean /= static_cast<double>(p.multiplicity);
    const double gap = std::abs(mean) - 1.0;
    if (std::abs(gap) <= boundary_tol) {
      p.classification = PoleClass::kBoundary;
    } else {
      p.classification = gap > 0.0 ? PoleClass::kUnstable : PoleClass::kStable;
    }
    p.marginal = std::abs(gap) >= 0.1 * boundary_tol && std::abs(gap) <= 10.0 * boundary_tol;
    out.push_back(p);
  }
  return out;
}

ZeroReport transmission_zeros(const StateSpace& sys, std::mt19937_64& rng,
                              const ZeroOptions& options) {
  sys.validate();
  if (options.require_minimal && !check_minimal(sys).minimal()) {
    fail(ErrorKind::kModel, "transmission_zeros: realization is not minimal");
  }
  const ScaledSystem scaled = scale_system(sys);
  const StateSpace& s = scaled.sys;
  const int n = s.states();
  const int rows = n + s.outputs();
  const int cols = n + s.inputs();

  ZeroReport report;
  report.states = n;
  report.inputs = s.inputs();
  report.outputs = s.outputs();
  report.shape = shape_of(s);
  report.normal_rank = normal_rank_scaled(s, rng);
  report.poles = poles(sys, options.boundary_tol);
  if (report.normal_rank < std::min(rows, cols)) {
    fail(ErrorKind::kNumeric,
         "transmission_zeros: transfer matrix is rank deficient (normal rank " +
             std::to_string(report.normal_rank) + "); zeros are not isolated");
  }

  std::vector<Complex> found;
  if (report.shape == SystemShape::kSquare) {
    const QzResult qz = square_pencil_zeros(s);
    found = qz.finite;
    report.infinite_zero_count = n - static_cast<int>(qz.finite.size());
    report.squaring_attempts = 0;
  } else {
    bool agreed = false;
    std::vector<Complex> first, second;
    for (int attempt = 1; attempt <= options.max_retries && !agreed; ++attempt) {
      report.squaring_attempts = attempt;
      first = square_pencil_zeros(square_down(s, rng)).finite;
      second = square_pencil_zeros(square_down(s, rng)).finite;
      std::vector<Complex> unmatched;
      const std::vector<Complex> common = intersect(first, second, options.match_tol, &unmatched);
      agreed = true;
      for (const Complex& z : unmatched) {
        const Confirmation c = confirm(s, z, report.normal_rank);
        if (c.residual <= options.missed_tol * c.norm) {
          agreed = false;  // a genuine zero was missed by one squaring
          break;
        }
      }
      if (!agreed) continue;
      found.clear();
      for (const Complex& z : common) {
        const Confirmation c = confirm(s, z, report.normal_rank);
        if (c.residual <= options.residual_tol * c.norm) found.push_back(z);
      }
    }
    if (!agreed) {
      fail(ErrorKind::kNumeric,
           "transmission_zeros: randomized squarings disagree after " +
               std::to_string(options.max_retries) + " retries",
           "{\"first\":" + describe(first) + ",\"second\":" + describe(second) + "}");
    }
  }

  const std::vector<int> ids = cluster(found, options.cluster_tol);
  for (std::size_t i = 0; i < found.size(); ++i) {
    ZeroRecord r;
    r.z = found[i];
    // Real zeros come back with round-off imaginary parts.
    if (std::abs(r.z.imag()) <= 1e-12 * std::max(1.0, std::abs(r.z))) r.z.imag(0.0);
    if (std::abs(r.z) <= 1e-12) r.z = Complex(0.0, 0.0);
    r.lambda = inverse_of(r.z);
    r.multiplicity = static_cast<int>(std::count(ids.begin(), ids.end(), ids[i]));
    Complex mean(0.0, 0.0);
    for (std::size_t j = 0; j < found.size(); ++j)
      if (ids[j] == ids[i]) mean += found[j];
    mean /= static_cast<double>(r.multiplicity);

    const double gap = std::abs(mean) - 1.0;
    if (std::abs(gap) <= options.boundary_tol) {
      r.classification =
          r.multiplicity > 1 ? ZeroClass::kBoundaryMultiple : ZeroClass::kBoundarySimple;
    } else {
      r.classification = gap > 0.0 ? ZeroClass::kNmpStrict : ZeroClass::kMinimumPhase;
    }
    r.marginal = std::abs(gap) >= 0.1 * options.boundary_tol &&
                 std::abs(gap) <= 10.0 * options.boundary_tol;

    const Confirmation c = confirm(s, r.z, report.normal_rank);
    r.residual = c.residual;
    r.pencil_norm = c.norm;
    CVector xi = scaled.state.cast<Complex>().cwiseProduct(c.null_vector.head(n));
    CVector nu = scaled.input.cast<Complex>().cwiseProduct(c.null_vector.tail(s.inputs()));
    Eigen::Index idx = 0;
    double scale = 0.0;
    if (nu.size() > 0 && max_abs(nu) > 1e-12 * std::max(1.0, max_abs(xi))) {
      scale = nu.cwiseAbs().maxCoeff(&idx);
      const Complex pivot = nu(idx);
      nu /= pivot;
      xi /= pivot;
      nu(idx) = Complex(1.0, 0.0);
    } else if (xi.size() > 0) {
      scale = xi.cwiseAbs().maxCoeff(&idx);
      const Complex pivot = xi(idx);
      if (scale > 0.0) {
        xi /= pivot;
        nu /= pivot;
      }
    }
    r.input_direction = nu;
    r.state_direction = xi;
    report.zeros.push_back(std::move(r));
  }
  std::sort(report.zeros.begin(), report.zeros.end(), [](const ZeroRecord& a, const ZeroRecord& b) {
    if (std::abs(a.z) != std::abs(b.z)) return std::abs(a.z) > std::abs(b.z);
    if (a.z.real() != b.z.real()) return a.z.real() > b.z.real();
    return a.z.imag() > b.z.imag();
  });
  return report;
}

MultiplicityAtOne multiplicity_at_one(const StateSpace& ntilde) {
  ntilde.validate();
  const int n = ntilde.states();
  const int q = ntilde.inputs();
  const int p = ntilde.outputs();
  if (!is_schur_stable(ntilde.A)) {
    fail(ErrorKind::kPrecondition,
         "multiplicity_at_one: factor state matrix is not Schur stable");
  }
  const Matrix I = Matrix::Identity(n, n);
  const auto lu = (I - ntilde.A).partialPivLu();
  const Matrix resolvent_B = lu.solve(ntilde.B);
  const Matrix value = ntilde.C * resolvent_B + ntilde.D;
  const Matrix slope = ntilde.C * lu.solve(resolvent_B);

  // Column-rank bookkeeping needs full column normal rank.
  {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> angle(0.3, 2.8);
    int nr = 0;
    for (int k = 0; k < 2; ++k) {
      nr = std::max(nr, rank_svd(ntilde.evaluate(std::polar(1.0, angle(rng))), 1e-9).rank);
    }
    if (nr < q) {
      fail(ErrorKind::kPrecondition,
           "multiplicity_at_one: factor does not have full column normal rank");
    }
  }

  double scale = value.norm();
  for (int k = 1; k < 8; ++k) {
    scale = std::max(scale, ntilde.evaluate(std::polar(1.0, k * std::numbers::pi / 4)).norm());
  }

  MultiplicityAtOne out;
  out.columns = q;
  out.value_rank = rank_svd(value, kDefaultRankTol, scale);
  if (out.value_rank.rank == q) {
    out.verdict = AtOne::kNotAZero;
    return out;
  }
  Matrix chain = Matrix::Zero(2 * p, 2 * q);
  chain.topLeftCorner(p, q) = value;
  chain.bottomLeftCorner(p, q) = slope;
  chain.bottomRightCorner(p, q) = value;
  out.chain_rank = rank_svd(chain, kDefaultRankTol, std::max(scale, slope.norm()));

  // Null vectors with nu1 = 0 span ker N(1); any excess carries nu1 != 0.
  const int null_chain = 2 * q - out.chain_rank.rank;
  const int null_value = q - out.value_rank.rank;
  if (null_chain <= null_value) {
    out.verdict = AtOne::kSimple;
    return out;
  }
  out.verdict = AtOne::kMultiple;
  Eigen::JacobiSVD<Matrix> svd(chain, Eigen::ComputeFullV);
  const Matrix basis = svd.matrixV().rightCols(null_chain);
  Eigen::JacobiSVD<Matrix> head_svd(basis.topRows(q), Eigen::ComputeFullV);
  Vector v = basis * head_svd.matrixV().col(0);
  const double h = max_abs(Vector(v.head(q)));
  v /= h;
  out.chain_head = v.head(q);
  out.chain_tail = v.tail(q);
  return out;
}

VulnerabilityVerdict classify_vulnerability(const ZeroReport& report,
                                            const std::optional<MultiplicityAtOne>& at_one) {
  VulnerabilityVerdict v;

  ChannelVerdict& act = v.actuator;
  for (const ZeroRecord& z : report.zeros) act.marginal = act.marginal || z.marginal;
  if (report.shape == SystemShape::kFat) {
    act.status = Exposure::kYes;
    act.reason = "fat plant: one input channel can mask another";
  } else {
    const ZeroRecord* witness = nullptr;
    for (const ZeroRecord& z : report.zeros) {
      if (z.classification == ZeroClass::kNmpStrict &&
          (!witness || std::abs(z.z) > std::abs(witness->z))) {
        witness = &z;
      }
    }
    if (witness) {
      act.status = Exposure::kYes;
      act.reason = "non-minimum-phase zero with 0 < |lambda| < 1";
      act.witness_zero = *witness;
    } else if (at_one && at_one->verdict == AtOne::kMultiple) {
      act.status = Exposure::kYes;
      act.reason = "zero at lambda = 1 with a null chain (polynomial attack)";
      for (const ZeroRecord& z : report.zeros)
        if (close(z.z, Complex(1.0, 0.0), 1e-6)) act.witness_zero = z;
    } else {
      act.status = Exposure::kNo;
      act.reason = "no zero with 0 < |lambda| < 1";
      for (const ZeroRecord& z : report.zeros) {
        if (z.classification != ZeroClass::kBoundaryMultiple) continue;
        if (close(z.z, Complex(1.0, 0.0), 1e-6)) {
          if (!at_one) {
            act.status = Exposure::kUndecided;
            act.reason = "repeated zero at lambda = 1; multiplicity test not run";
            act.witness_zero = z;
          }
        } else {
          act.status = Exposure::kUndecided;
          act.reason =
              "repeated boundary zero away from lambda = 1 (Smith-McMillan analysis out of "
              "scope)";
          act.witness_zero = z;
        }
      }
      if (act.status == Exposure::kNo) {
        const bool any_boundary = std::any_of(
            report.zeros.begin(), report.zeros.end(),
            [](const ZeroRecord& z) { return z.classification != ZeroClass::kMinimumPhase; });
        if (any_boundary) act.reason = "only simple boundary zeros";
      }
    }
  }

  ChannelVerdict& sen = v.sensor;
  const PoleRecord* witness = nullptr;
  for (const PoleRecord& p : report.poles) {
    sen.marginal = sen.marginal || p.marginal;
    if (p.classification == PoleClass::kUnstable &&
        (!witness || std::abs(p.z) > std::abs(witness->z))) {
      witness = &p;
    }
  }
  if (witness) {
    sen.status = Exposure::kYes;
    sen.reason = "unstable pole with 0 < |lambda| < 1";
    sen.witness_pole = *witness;
  } else {
    sen.status = Exposure::kNo;
    sen.reason = "no unstable pole";
    for (const PoleRecord& p : report.poles) {
      if (p.classification == PoleClass::kBoundary && p.multiplicity > 1) {
        sen.status = Exposure::kUndecided;
        sen.reason = "repeated boundary pole (Smith-McMillan analysis out of scope)";
        sen.witness_pole = p;
        break;
      }
      if (p.classification == PoleClass::kBoundary) sen.reason = "only simple boundary poles";
    }
  }
  return v;
}

}  // namespace liftguard
