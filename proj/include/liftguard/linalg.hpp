#pragma once

#include <complex>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace liftguard {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double kDefaultRankTol = 1e-9;

struct RankResult {
  int rank = 0;
  Vector singular_values;  // nonincreasing
  double tolerance_used = 0.0;

  /// Smallest singular value counted in the rank (0 if rank == 0).
  double smallest_retained() const;
  /// Largest singular value below tolerance (0 if none).
  double largest_discarded() const;
  bool full_column_rank(int cols) const { return rank == cols; }
};

/// Matrix exponential by scaling and squaring with a Padé approximant.
Matrix expm(const Matrix& M);

/// rank = #{sigma_i > rel_tol * sigma_max}.
RankResult rank_svd(const Matrix& M, double rel_tol = kDefaultRankTol);
/// Same, but the tolerance is rel_tol * max(sigma_max, reference_norm). Use
/// when the matrix may be numerically zero relative to a known scale.
RankResult rank_svd(const Matrix& M, double rel_tol, double reference_norm);
RankResult rank_svd(const CMatrix& M, double rel_tol = kDefaultRankTol);

template <typename Derived>
RankResult rank_svd(const Eigen::MatrixBase<Derived>& M, double rel_tol = kDefaultRankTol) {
  if constexpr (std::is_same_v<typename Derived::Scalar, double>) {
    return rank_svd(Matrix(M), rel_tol);
  } else {
    return rank_svd(CMatrix(M), rel_tol);
  }
}

std::vector<Complex> eig(const Matrix& M);

struct EigenPairs {
  std::vector<Complex> values;
  CMatrix vectors;  // column i pairs with values[i]
};
EigenPairs eig_pairs(const Matrix& M);

double spectral_radius(const Matrix& M);
bool is_schur_stable(const Matrix& M);

struct DareOptions {
  int max_iterations = 10000;
  double rel_tol = 1e-11;
};

/// Stabilizing state-feedback gain F (A + B F Schur) from the DARE solution
/// reached by the fixed-point Riccati recursion started at P = Q.
Matrix dare_gain(const Matrix& A, const Matrix& B, const Matrix& Q,
                 const Matrix& R, const DareOptions& options = {});

/// Right null vector for the smallest singular value of a complex matrix.
CVector smallest_right_singular_vector(const CMatrix& M, double* sigma = nullptr);

/// Infinity norm of a vector (max modulus entry), the monitor norm.
double max_abs(const Vector& v);
double max_abs(const CVector& v);

/// Scales v so its largest-modulus entry equals exactly 1 (real).
CVector normalize_max_entry(const CVector& v);

}  // namespace liftguard
