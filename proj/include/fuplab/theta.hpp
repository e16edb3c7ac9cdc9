#pragma once

#include <cmath>

namespace fuplab {

/// theta(xi) = (log(10 + |xi|))^-delta, with the exponents it was chosen from.
struct ThetaWeight {
  double delta = 0.9;
  int m = 0;            // ceil(2/nu) when built by choose_delta
  double epsilon = 0.0;

  double operator()(double xi) const { return std::pow(std::log(10.0 + std::fabs(xi)), -delta); }
  /// |xi| theta(xi); increasing on [0, inf).
  double growth(double xi) const { return std::fabs(xi) * (*this)(xi); }
};

}  // namespace fuplab
