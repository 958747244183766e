#include "liftguard/factor.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "liftguard/errors.hpp"

namespace liftguard {

CoprimeFactors coprime_factorize(const StateSpace& sys, const FactorOptions& options) {
  sys.validate();
  const int n = sys.states(), nu = sys.inputs(), ny = sys.outputs();
  if (!(options.q > 0.0) || !(options.r > 0.0)) {
    fail(ErrorKind::kArgument, "coprime_factorize: DARE weights must be positive");
  }
  const Matrix& A = sys.A;
  const Matrix& B = sys.B;
  const Matrix& C = sys.C;
  const Matrix& D = sys.D;

  CoprimeFactors f;
  f.base = sys;
  f.F = options.F ? *options.F
                  : dare_gain(A, B, options.q * Matrix::Identity(n, n),
                              options.r * Matrix::Identity(nu, nu));
  f.H = options.H ? *options.H
                  : Matrix(dare_gain(A.transpose(), C.transpose(),
                                     options.q * Matrix::Identity(n, n),
                                     options.r * Matrix::Identity(ny, ny))
                               .transpose());
  if (f.F.rows() != nu || f.F.cols() != n) fail(ErrorKind::kDimension, "F must be inputs x states");
  if (f.H.rows() != n || f.H.cols() != ny) fail(ErrorKind::kDimension, "H must be states x outputs");

  const Matrix AF = A + B * f.F;
  const Matrix AH = A + f.H * C;
  if (!is_schur_stable(AF)) {
    fail(ErrorKind::kModel, "coprime_factorize: A + B F is not Schur stable",
         "rho=" + std::to_string(spectral_radius(AF)));
  }
  if (!is_schur_stable(AH)) {
    fail(ErrorKind::kModel, "coprime_factorize: A + H C is not Schur stable",
         "rho=" + std::to_string(spectral_radius(AH)));
  }

  f.Mtilde = {AH, f.H, C, Matrix::Identity(ny, ny)};
  f.Ntilde = {AH, B + f.H * D, C, D};
  f.M = {AF, B, f.F, Matrix::Identity(nu, nu)};
  f.N = {AF, B, C + D * f.F, D};
  f.X = {AF, -f.H, C + D * f.F, Matrix::Identity(ny, ny)};
  f.Y = {AF, -f.H, f.F, Matrix::Zero(nu, ny)};

  f.bezout_residual = bezout_residual(f);
  if (!(f.bezout_residual <= 1e-8)) {
    fail(ErrorKind::kNumeric, "coprime_factorize: Bezout identity violated",
         "residual=" + std::to_string(f.bezout_residual));
  }
  return f;
}

double bezout_residual(const CoprimeFactors& f, int points) {
  const int ny = f.Mtilde.outputs();
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * k / points);
    const CMatrix E = f.Mtilde.evaluate(z) * f.X.evaluate(z) -
                      f.Ntilde.evaluate(z) * f.Y.evaluate(z) - CMatrix::Identity(ny, ny);
    const double e = Eigen::JacobiSVD<CMatrix>(E).singularValues()(0);
    worst = std::isfinite(e) ? std::max(worst, e) : e;
  }
  return worst;
}

Controller observer_controller(const CoprimeFactors& f, ControllerKind kind) {
  const StateSpace& p = f.base;
  const int nu = p.inputs(), ny = p.outputs();
  Controller k;
  k.system = {p.A + p.B * f.F + f.H * p.C + f.H * p.D * f.F, -f.H, f.F, Matrix::Zero(nu, ny)};
  k.kind = kind;
  k.strictly_proper = true;
  const double rho = spectral_radius(closed_loop_matrix(p, k.system));
  if (!(rho < 1.0)) {
    fail(ErrorKind::kNumeric, "observer_controller: closed loop is not Schur stable",
         "rho=" + std::to_string(rho));
  }
  return k;
}

Matrix closed_loop_matrix(const StateSpace& plant, const StateSpace& controller) {
  const int n = plant.states(), nk = controller.states();
  if (controller.inputs() != plant.outputs() || controller.outputs() != plant.inputs()) {
    fail(ErrorKind::kDimension, "closed_loop_matrix: controller does not fit the plant");
  }
  // u = Dk y, y = C x + D u  =>  u = (I - Dk D)^{-1} (Dk C x + Ck xk)
  const Matrix I = Matrix::Identity(plant.inputs(), plant.inputs());
  const auto lu = (I - controller.D * plant.D).partialPivLu();
  const Matrix Ux = lu.solve(controller.D * plant.C);
  const Matrix Uk = lu.solve(controller.C);
  const Matrix Yx = plant.C + plant.D * Ux;
  const Matrix Yk = plant.D * Uk;
  Matrix L(n + nk, n + nk);
  L << plant.A + plant.B * Ux, plant.B * Uk,
       controller.B * Yx, controller.A + controller.B * Yk;
  return L;
}

ResidualGenerator::ResidualGenerator(const CoprimeFactors& f)
    : Abar_(f.Mtilde.A),
      H_(f.H),
      Bbar_(f.Ntilde.B),
      C_(f.base.C),
      D_(f.base.D),
      xi_(Vector::Zero(f.base.states())) {}

Vector ResidualGenerator::step(const Vector& y, const Vector& u) {
  if (y.size() != C_.rows() || u.size() != D_.cols()) {
    fail(ErrorKind::kDimension, "residual generator: stream dimension mismatch");
  }
  const Vector r = C_ * xi_ + y - D_ * u;
  xi_ = Abar_ * xi_ + H_ * y - Bbar_ * u;
  return r;
}

void ResidualGenerator::reset() { xi_.setZero(); }

ResidualGenerator residual_generator(const CoprimeFactors& f) { return ResidualGenerator(f); }

}  // namespace liftguard
