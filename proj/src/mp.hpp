#pragma once

#include <string>

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "liftguard/linalg.hpp"

namespace liftguard::mp {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Sets the default mpfr precision (decimal digits) for the current scope.
class PrecisionScope {
 public:
  explicit PrecisionScope(int digits) : saved_(Real::default_precision()) {
    Real::default_precision(static_cast<unsigned>(digits));
  }
  ~PrecisionScope() { Real::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

inline std::string to_decimal(const Real& x, int digits) {
  return x.str(digits, std::ios_base::scientific);
}

template <typename S>
S from_decimal(const std::string& s) {
  if constexpr (std::is_same_v<S, double>) {
    return std::stod(s);
  } else {
    return S(s);
  }
}

template <typename S>
double to_double(const S& x) {
  if constexpr (std::is_same_v<S, double>) {
    return x;
  } else {
    return x.template convert_to<double>();
  }
}

}  // namespace liftguard::mp
