#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "liftguard/errors.hpp"
#include "liftguard/model.hpp"

namespace liftguard {

/// Relative degree of the single-input single-output channel (C, b, d): 0 if
/// d != 0, else the smallest i with C A^{i-1} b != 0; -1 if identically zero.
inline int relative_degree(const Matrix& A, const Vector& b, const Matrix& C, double d,
                           double rel_tol = 1e-10) {
  const double scale = std::max({1.0, A.norm(), b.norm(), C.norm(), std::abs(d)});
  if (std::abs(d) > rel_tol * scale) return 0;
  Vector v = b;
  for (int i = 1; i <= A.rows(); ++i) {
    const double g = (C * v).cwiseAbs().maxCoeff();
    if (g > rel_tol * scale * std::max(1.0, v.norm())) return i;
    v = A * v;
  }
  return -1;
}

/// Data of the causal filter d2 = -P2^{-1} P1 d1 on a 1 x nu plant, with d1
/// delayed by max(0, r2 - r1) samples.
struct MaskingFilter {
  int free_input = 0, masking_input = 1;
  int r1 = 0, r2 = 0, delay = 0;
  Matrix A;
  Vector b1, b2;
  Matrix C;
  double d1 = 0.0;
  Matrix CAr;              // C A^{r2}
  std::vector<double> g;   // C A^{r2-1-j} b1, j < r2
  double den = 0.0;        // C A^{r2-1} b2, or d2 when r2 == 0
  /// State matrix of the filter with d2 in feedback; its spectral radius
  /// bounds the growth of the masking signal.
  Matrix closed;
};

inline MaskingFilter masking_filter(const StateSpace& sys, int free_input, int masking_input) {
  if (sys.outputs() != 1) fail(ErrorKind::kCapability, "fat masking needs a single output");
  if (sys.inputs() < 2 || free_input == masking_input || free_input < 0 || masking_input < 0 ||
      free_input >= sys.inputs() || masking_input >= sys.inputs()) {
    fail(ErrorKind::kCapability, "fat masking needs two distinct input channels");
  }
  MaskingFilter f;
  f.free_input = free_input;
  f.masking_input = masking_input;
  f.A = sys.A;
  f.C = sys.C;
  f.b1 = sys.B.col(free_input);
  f.b2 = sys.B.col(masking_input);
  f.d1 = sys.D(0, free_input);
  const double d2 = sys.D(0, masking_input);
  f.r2 = relative_degree(f.A, f.b2, f.C, d2);
  if (f.r2 < 0) fail(ErrorKind::kCapability, "masking channel is identically zero");
  f.r1 = relative_degree(f.A, f.b1, f.C, f.d1);
  if (f.r1 < 0) f.r1 = f.r2;  // P1 == 0: nothing to cancel
  f.delay = std::max(0, f.r2 - f.r1);

  const int n = sys.states();
  Matrix Ap = Matrix::Identity(n, n);
  for (int i = 0; i < f.r2; ++i) Ap = f.A * Ap;
  f.CAr = f.C * Ap;
  for (int j = 0; j < f.r2; ++j) {
    Matrix P = Matrix::Identity(n, n);
    for (int i = 0; i < f.r2 - 1 - j; ++i) P = f.A * P;
    f.g.push_back((f.C * P * f.b1)(0, 0));
  }
  if (f.r2 == 0) {
    f.den = d2;
  } else {
    Matrix P = Matrix::Identity(n, n);
    for (int i = 0; i < f.r2 - 1; ++i) P = f.A * P;
    f.den = (f.C * P * f.b2)(0, 0);
  }
  f.closed = f.A - f.b2 * f.CAr / f.den;
  return f;
}

/// Runs the masking filter in scalar type S. step(d1(k)) returns the applied
/// pair (v1(k), v2(k)) with v1 the delayed free signal.
template <typename S>
class Masker {
 public:
  using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  explicit Masker(const MaskingFilter& f)
      : f_(f),
        A_(f.A.cast<S>()),
        b1_(f.b1.cast<S>()),
        b2_(f.b2.cast<S>()),
        CAr_(f.CAr.cast<S>()),
        x_(VecS::Zero(f.A.rows())) {
    for (double v : f.g) g_.push_back(S(v));
  }

  std::pair<S, S> step(const S& d1_k) {
    hist_.push_back(d1_k);
    const int k = static_cast<int>(hist_.size()) - 1;
    const S v1 = at(k - f_.delay);
    S acc = (CAr_ * x_)(0);
    for (int j = 0; j < f_.r2; ++j) {
      const int idx = k + j - f_.delay;
      if (idx > k) break;
      acc += g_[j] * at(idx);
    }
    if (f_.d1 != 0.0 && k + f_.r2 - f_.delay <= k) acc += S(f_.d1) * at(k + f_.r2 - f_.delay);
    const S v2 = -acc / S(f_.den);
    x_ = A_ * x_ + b1_ * v1 + b2_ * v2;
    return {v1, v2};
  }

 private:
  S at(int i) const { return i < 0 ? S(0) : hist_[static_cast<std::size_t>(i)]; }

  MaskingFilter f_;
  MatS A_;
  VecS b1_, b2_;
  MatS CAr_;
  std::vector<S> g_;
  VecS x_;
  std::vector<S> hist_;
};

}  // namespace liftguard
