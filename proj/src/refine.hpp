#pragma once

#include <string>
#include <vector>

#include "liftguard/linalg.hpp"

namespace liftguard {

struct RefinedPair {
  int digits = 0;
  std::string zeta_re, zeta_im;
  std::vector<std::string> v_re, v_im;
  Complex zeta;
  CVector v;
};

/// Newton refinement in mpfr of (zeta E - M) v = 0 with v(pivot) = 1, from a
/// double-precision estimate. Real estimates stay real.
RefinedPair refine_pencil_pair(const Matrix& M, const Matrix& E, Complex zeta0,
                               const CVector& v0, int pivot, int digits);

}  // namespace liftguard
