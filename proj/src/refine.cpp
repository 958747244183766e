#include "refine.hpp"

#include <cmath>

#include "liftguard/errors.hpp"
#include "mp.hpp"

namespace liftguard {

using mp::Real;
using mp::RMatrix;
using mp::RVector;

namespace {

RMatrix to_mp(const Matrix& M) { return M.cast<Real>(); }

Real pencil_residual(const RMatrix& M, const RMatrix& E, const Real& a, const Real& b,
                     const RVector& vr, const RVector& vi) {
  const RMatrix P = a * E - M;
  const RVector fr = P * vr - b * (E * vi);
  const RVector fi = P * vi + b * (E * vr);
  return boost::multiprecision::sqrt(fr.squaredNorm() + fi.squaredNorm());
}

}  // namespace

RefinedPair refine_pencil_pair(const Matrix& M_d, const Matrix& E_d, Complex zeta0,
                               const CVector& v0, int pivot, int digits) {
  const int N = static_cast<int>(M_d.rows());
  if (M_d.cols() != N || E_d.rows() != N || E_d.cols() != N || v0.size() != N || pivot < 0 ||
      pivot >= N) {
    fail(ErrorKind::kDimension, "refine_pencil_pair: inconsistent pencil");
  }
  mp::PrecisionScope scope(digits + 20);
  const RMatrix M = to_mp(M_d), E = to_mp(E_d);
  const bool real_case = zeta0.imag() == 0.0;

  const CVector v_scaled = v0 / v0(pivot);
  Real a = zeta0.real(), b = real_case ? 0.0 : zeta0.imag();
  RVector vr = v_scaled.real().cast<Real>(), vi = v_scaled.imag().cast<Real>();
  vr(pivot) = 1;
  vi(pivot) = 0;
  if (real_case) vi.setZero();

  const Real target = boost::multiprecision::pow(Real(10), -(digits - 5));
  const Real scale = 1 + M.cwiseAbs().maxCoeff() + boost::multiprecision::abs(a) +
                     boost::multiprecision::abs(b);
  bool converged = false;
  for (int it = 0; it < 80 && !converged; ++it) {
    const RMatrix P = a * E - M;
    if (real_case) {
      RMatrix J(N, N);
      J.col(0) = E * vr;
      for (int j = 0, c = 1; j < N; ++j)
        if (j != pivot) J.col(c++) = P.col(j);
      const RVector F = P * vr;
      const RVector dx = J.fullPivLu().solve(F);
      a -= dx(0);
      for (int j = 0, c = 1; j < N; ++j)
        if (j != pivot) vr(j) -= dx(c++);
      converged = dx.cwiseAbs().maxCoeff() <= target * (1 + vr.cwiseAbs().maxCoeff());
    } else {
      RMatrix J = RMatrix::Zero(2 * N, 2 * N);
      J.block(0, 0, N, 1) = E * vr;
      J.block(N, 0, N, 1) = E * vi;
      J.block(0, 1, N, 1) = -(E * vi);
      J.block(N, 1, N, 1) = E * vr;
      int c = 2;
      for (int j = 0; j < N; ++j) {
        if (j == pivot) continue;
        J.block(0, c, N, 1) = P.col(j);
        J.block(N, c, N, 1) = b * E.col(j);
        J.block(0, c + 1, N, 1) = -b * E.col(j);
        J.block(N, c + 1, N, 1) = P.col(j);
        c += 2;
      }
      RVector F(2 * N);
      F.head(N) = P * vr - b * (E * vi);
      F.tail(N) = P * vi + b * (E * vr);
      const RVector dx = J.fullPivLu().solve(F);
      a -= dx(0);
      b -= dx(1);
      c = 2;
      for (int j = 0; j < N; ++j) {
        if (j == pivot) continue;
        vr(j) -= dx(c);
        vi(j) -= dx(c + 1);
        c += 2;
      }
      converged = dx.cwiseAbs().maxCoeff() <=
                  target * (1 + vr.cwiseAbs().maxCoeff() + vi.cwiseAbs().maxCoeff());
    }
  }
  const Real res = pencil_residual(M, E, a, b, vr, vi);
  const Real vnorm = boost::multiprecision::sqrt(vr.squaredNorm() + vi.squaredNorm());
  if (!converged || !(res <= target * scale * vnorm)) {
    fail(ErrorKind::kNumeric, "refine_pencil_pair: Newton iteration did not converge",
         "residual=" + mp::to_decimal(res, 6));
  }

  RefinedPair out;
  out.digits = digits;
  out.zeta_re = mp::to_decimal(a, digits);
  out.zeta_im = mp::to_decimal(b, digits);
  out.zeta = Complex(mp::to_double(a), mp::to_double(b));
  out.v.resize(N);
  for (int j = 0; j < N; ++j) {
    out.v_re.push_back(mp::to_decimal(vr(j), digits));
    out.v_im.push_back(mp::to_decimal(vi(j), digits));
    out.v(j) = Complex(mp::to_double(vr(j)), mp::to_double(vi(j)));
  }
  return out;
}

}  // namespace liftguard
