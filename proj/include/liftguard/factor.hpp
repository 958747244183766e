#pragma once

#include <optional>

#include "liftguard/linalg.hpp"
#include "liftguard/model.hpp"

namespace liftguard {

struct FactorOptions {
  std::optional<Matrix> F;  // state feedback, A + B F Schur
  std::optional<Matrix> H;  // output injection, A + H C Schur
  /// DARE weights Q = q I, R = r I for both the gain and its dual.
  double q = 1.0;
  double r = 1.0;
};

/// Doubly coprime factors of P = Mtilde^{-1} Ntilde = N M^{-1} with the
/// Bezout identity Mtilde X - Ntilde Y = I. Sign convention: u = K y with
/// K = Y X^{-1} (positive feedback).
struct CoprimeFactors {
  Matrix F, H;
  StateSpace Ntilde, Mtilde, N, M, X, Y;
  StateSpace base;
  double bezout_residual = 0.0;
};

CoprimeFactors coprime_factorize(const StateSpace& sys, const FactorOptions& options = {});

/// max over 16 points z = e^{i 2 pi k / 16} of ||Mtilde X - Ntilde Y - I||_2.
double bezout_residual(const CoprimeFactors& f, int points = 16);

enum class ControllerKind { kSingleRate, kLifted };

struct Controller {
  StateSpace system;
  ControllerKind kind = ControllerKind::kSingleRate;
  bool strictly_proper = true;
};

/// K = [A + BF + HC + HDF | -H; F | 0].
Controller observer_controller(const CoprimeFactors& f,
                               ControllerKind kind = ControllerKind::kSingleRate);

/// State matrix of the loop x+ = A x + B u, y = C x + D u, u = K y.
Matrix closed_loop_matrix(const StateSpace& plant, const StateSpace& controller);

/// Stateful filter r = Mtilde y - Ntilde u. Single owner.
class ResidualGenerator {
 public:
  explicit ResidualGenerator(const CoprimeFactors& f);

  Vector step(const Vector& y, const Vector& u);
  void reset();
  const Vector& state() const { return xi_; }

 private:
  Matrix Abar_, H_, Bbar_, C_, D_;
  Vector xi_;
};

ResidualGenerator residual_generator(const CoprimeFactors& f);

}  // namespace liftguard
