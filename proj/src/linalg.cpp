#include "liftguard/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "liftguard/errors.hpp"

namespace liftguard {

double RankResult::smallest_retained() const {
  return rank > 0 ? singular_values(rank - 1) : 0.0;
}

double RankResult::largest_discarded() const {
  return rank < singular_values.size() ? singular_values(rank) : 0.0;
}

namespace {

void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) {
    fail(ErrorKind::kArgument, std::string(what) + ": matrix has non-finite entries");
  }
}

RankResult rank_from_singular_values(Vector sv, double rel_tol, double reference) {
  RankResult out;
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  out.tolerance_used = rel_tol * std::max(smax, reference);
  out.rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > out.tolerance_used) ++out.rank;
  }
  out.singular_values = std::move(sv);
  return out;
}

}  // namespace

Matrix expm(const Matrix& M) {
  if (M.rows() != M.cols()) {
    fail(ErrorKind::kDimension, "expm: matrix must be square");
  }
  require_finite(M, "expm");
  if (M.size() == 0) return M;
  Matrix result = M.exp();
  if (!result.allFinite()) {
    fail(ErrorKind::kNumeric, "expm: overflow in matrix exponential");
  }
  return result;
}

RankResult rank_svd(const Matrix& M, double rel_tol) {
  return rank_svd(M, rel_tol, 0.0);
}

RankResult rank_svd(const Matrix& M, double rel_tol, double reference_norm) {
  if (M.size() == 0) fail(ErrorKind::kDimension, "rank_svd: empty matrix");
  require_finite(M, "rank_svd");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    fail(ErrorKind::kArgument, "rank_svd: rel_tol must lie in (0, 1)");
  }
  Eigen::JacobiSVD<Matrix> svd(M);
  return rank_from_singular_values(svd.singularValues(), rel_tol, reference_norm);
}

RankResult rank_svd(const CMatrix& M, double rel_tol) {
  if (M.size() == 0) fail(ErrorKind::kDimension, "rank_svd: empty matrix");
  if (!M.allFinite()) fail(ErrorKind::kArgument, "rank_svd: non-finite entries");
  Eigen::JacobiSVD<CMatrix> svd(M);
  return rank_from_singular_values(svd.singularValues(), rel_tol, 0.0);
}

std::vector<Complex> eig(const Matrix& M) { return eig_pairs(M).values; }

EigenPairs eig_pairs(const Matrix& M) {
  if (M.rows() != M.cols()) fail(ErrorKind::kDimension, "eig: matrix must be square");
  require_finite(M, "eig");
  EigenPairs out;
  if (M.size() == 0) return out;
  Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eig: QR iteration failed to converge for " << M.rows() << "x" << M.cols()
        << " matrix with norm " << M.norm();
    fail(ErrorKind::kNumeric, msg.str());
  }
  const auto& values = solver.eigenvalues();
  out.values.assign(values.data(), values.data() + values.size());
  out.vectors = solver.eigenvectors();
  return out;
}

double spectral_radius(const Matrix& M) {
  double rho = 0.0;
  for (const Complex& v : eig(M)) rho = std::max(rho, std::abs(v));
  return rho;
}

bool is_schur_stable(const Matrix& M) { return M.size() == 0 || spectral_radius(M) < 1.0; }

Matrix dare_gain(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                 const DareOptions& options) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != p || R.cols() != p) {
    fail(ErrorKind::kDimension, "dare_gain: inconsistent dimensions");
  }
  require_finite(A, "dare_gain");
  require_finite(B, "dare_gain");
  if (!Q.isApprox(Q.transpose(), 1e-10) || !R.isApprox(R.transpose(), 1e-10)) {
    fail(ErrorKind::kArgument, "dare_gain: Q and R must be symmetric");
  }
  Eigen::LLT<Matrix> r_llt(R);
  if (r_llt.info() != Eigen::Success) {
    fail(ErrorKind::kArgument, "dare_gain: R must be positive definite");
  }

  auto gain_for = [&](const Matrix& P) -> Matrix {
    const Matrix S = R + B.transpose() * P * B;
    return -S.ldlt().solve(B.transpose() * P * A);
  };

  Matrix P = Q;
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Matrix S = R + B.transpose() * P * B;
    const Matrix BtPA = B.transpose() * P * A;
    Matrix next = A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA) + Q;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) {
      fail(ErrorKind::kModel,
           "dare_gain: Riccati iterate diverged; (A, B) appears unstabilizable");
    }
    const double change = (next - P).cwiseAbs().rowwise().sum().maxCoeff();
    const double scale = next.cwiseAbs().rowwise().sum().maxCoeff();
    P = std::move(next);
    if (change < options.rel_tol * scale) {
      converged = true;
      break;
    }
  }

  const Matrix F = gain_for(P);
  const double rho = spectral_radius(A + B * F);
  if (rho >= 1.0) {
    fail(ErrorKind::kModel,
         "dare_gain: closed loop keeps an unstable eigenvalue (|z| = " +
             std::to_string(rho) + "); (A, B) is not stabilizable");
  }
  if (!converged) {
    fail(ErrorKind::kNumeric,
         "dare_gain: Riccati iteration did not converge in " +
             std::to_string(options.max_iterations) +
             " steps; try larger Q or smaller R weights");
  }
  return F;
}

CVector smallest_right_singular_vector(const CMatrix& M, double* sigma) {
  if (M.cols() == 0) fail(ErrorKind::kDimension, "null vector of empty matrix");
  Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
  const Eigen::Index k = std::min(M.rows(), M.cols());
  // A wide matrix has an exact null space beyond its row count.
  const Eigen::Index col = M.cols() > M.rows() ? M.cols() - 1 : k - 1;
  if (sigma) *sigma = M.cols() > M.rows() ? 0.0 : svd.singularValues()(k - 1);
  return svd.matrixV().col(col);
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const CVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

CVector normalize_max_entry(const CVector& v) {
  Eigen::Index idx = 0;
  if (v.size() == 0) return v;
  v.cwiseAbs().maxCoeff(&idx);
  if (std::abs(v(idx)) == 0.0) return v;
  CVector out = v / v(idx);
  out(idx) = Complex(1.0, 0.0);
  return out;
}

}  // namespace liftguard
