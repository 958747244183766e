#include "liftguard/plants.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "liftguard/errors.hpp"

namespace liftguard {

ContinuousPlant integrator_chain(int order) {
  if (order < 1) fail(ErrorKind::kArgument, "integrator_chain: order must be >= 1");
  Matrix A = Matrix::Zero(order, order);
  for (int i = 0; i + 1 < order; ++i) A(i, i + 1) = 1.0;
  Matrix B = Matrix::Zero(order, 1);
  B(order - 1, 0) = 1.0;
  Matrix C = Matrix::Zero(1, order);
  C(0, 0) = 1.0;
  return make_continuous_plant(A, B, C, Matrix::Zero(1, 1),
                               "integrator_chain_" + std::to_string(order));
}

ContinuousPlant second_order_with_zero(double zero_s) {
  // (s - z) / (s^2 + 3 s + 2)
  Matrix A(2, 2);
  A << 0, 1, -2, -3;
  Matrix B(2, 1);
  B << 0, 1;
  Matrix C(1, 2);
  C << -zero_s, 1;
  return make_continuous_plant(A, B, C, Matrix::Zero(1, 1), "second_order_with_zero");
}

namespace {

Matrix normal_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = nd(rng);
  return M;
}

/// Smallest PBH margin over the eigenvalues of A: min sigma of [lI - A, B]
/// and of [lI - A; C], relative to the size of the blocks.
double pbh_margin(const StateSpace& s) {
  const int n = s.states();
  const double scale = std::max({s.A.norm(), s.B.norm(), s.C.norm(), 1e-300});
  double margin = std::numeric_limits<double>::infinity();
  for (const Complex l : eig(s.A)) {
    CMatrix ctrb(n, n + s.inputs());
    ctrb << l * CMatrix::Identity(n, n) - s.A.cast<Complex>(), s.B.cast<Complex>();
    CMatrix obsv(n + s.outputs(), n);
    obsv << l * CMatrix::Identity(n, n) - s.A.cast<Complex>(), s.C.cast<Complex>();
    margin = std::min(margin, Eigen::JacobiSVD<CMatrix>(ctrb).singularValues()(n - 1) / scale);
    margin = std::min(margin, Eigen::JacobiSVD<CMatrix>(obsv).singularValues()(n - 1) / scale);
  }
  return margin;
}

}  // namespace

ContinuousPlant random_plant(std::mt19937_64& rng, const RandomPlantSpec& spec) {
  if (spec.states < 1 || spec.inputs < 1 || spec.outputs < 1) {
    fail(ErrorKind::kArgument, "random_plant: dimensions must be positive");
  }
  std::uniform_real_distribution<double> re(spec.min_real, spec.max_real);
  std::uniform_real_distribution<double> im(0.2, spec.max_imag);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int n = spec.states;
  // Random high-order SISO draws have smaller PBH distances on average.
  const double margin = spec.min_pbh_margin * std::min(1.0, 4.0 / n);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix J = Matrix::Zero(n, n);
    int i = 0;
    while (i < n) {
      if (i + 1 < n && coin(rng) < 0.4) {
        const double a = re(rng), b = im(rng);
        J(i, i) = a;
        J(i + 1, i + 1) = a;
        J(i, i + 1) = b;
        J(i + 1, i) = -b;
        i += 2;
      } else {
        J(i, i) = re(rng);
        i += 1;
      }
    }
    const Matrix V = normal_matrix(n, n, rng);
    Eigen::JacobiSVD<Matrix> svd(V);
    const Vector& sv = svd.singularValues();
    if (sv(n - 1) <= 0.0 || sv(0) / sv(n - 1) > 50.0) continue;
    const Matrix A = V * J * V.inverse();
    ContinuousPlant p = make_continuous_plant(
        A, normal_matrix(n, spec.inputs, rng), normal_matrix(spec.outputs, n, rng),
        spec.feedthrough ? normal_matrix(spec.outputs, spec.inputs, rng)
                         : Matrix::Zero(spec.outputs, spec.inputs),
        "random");
    if (!check_minimal(p).minimal() || pbh_margin(p.system) < margin) continue;
    if (spec.period > 0.0) {
      if (check_pathological(p, spec.period).pathological) continue;
      if (spec.rate > 1 && check_pathological(p, spec.period / spec.rate).pathological) continue;
    }
    return p;
  }
  fail(ErrorKind::kNumeric, "random_plant: could not draw a minimal plant");
}

}  // namespace liftguard
