#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fuplab/interval_set.hpp"
#include "fuplab/theta.hpp"

namespace fuplab {

/// m = ceil(2/nu), epsilon = 1 - log(m-1)/log(m), delta midway between
/// 1/(1+epsilon) and 1. Requires 0 < nu < 1.
ThetaWeight choose_delta(const Rational& nu);

/// Minimal cover of one dyadic band of the scaled set.
struct BandCover {
  int k = 0;
  double theta = 0.0;          // theta(2^k)
  Rational length;             // 2^k theta(2^k), exact image of the double
  std::vector<Rational> starts;  // left ends of the covering intervals

  std::size_t count() const { return starts.size(); }
};

struct CoveringReport {
  int K = 0;
  ThetaWeight theta;
  std::vector<BandCover> bands;  // k = 0..K
  /// Least-squares slope of log N_k against -log theta(2^k) over N_k > 0.
  std::optional<double> slope;
  /// Smallest C with N_k <= C theta(2^k)^-(1-epsilon) for all k.
  double c_fit = 0.0;

  double bound(int k) const;
};

/// The band J_0 = [-1, 1] or J_k = [-2^k, -2^(k-1)] u [2^(k-1), 2^k].
IntervalSet dyadic_band(int k);

/// Left-to-right greedy cover of `set` by closed intervals of length `len`.
std::vector<Rational> greedy_cover(const IntervalSet& set, const Rational& len);

/// Covers Ytilde within each J_k, k = 0..K.
CoveringReport cover_bands(const IntervalSet& ytilde, int K, const ThetaWeight& theta);

/// Continuous piecewise-linear function, zero outside [knots.front, knots.back].
struct WeightFunction {
  std::vector<std::pair<double, double>> knots;  // (xi, w), xi strictly increasing
  double slope_bound = 0.0;                      // realized sup |w'|

  double operator()(double xi) const;
};

struct WeightOptions {
  /// Ramp width of each bump as a fraction of its plateau, in [1/100, 1].
  double ramp_fraction = 1.0;
  double prefactor = 10.0;
  /// Half-width of the low-frequency patch.
  double patch_radius = 32.0;
  /// Mirror every bump so that w is even.
  bool symmetric = true;
};

/// 10 * (sum of trapezoid bumps on the covering intervals), raised on
/// [-C0, C0] to an upper interpolant of |xi| theta(xi).
WeightFunction build_weight(const CoveringReport& report, const WeightOptions& opts = {});

/// Low-frequency patch alone.
WeightFunction theta_patch(const ThetaWeight& theta, double radius);

/// Pointwise maximum of two weight functions.
WeightFunction pointwise_max(const WeightFunction& a, const WeightFunction& b);

/// First xi in Ytilde with w(xi) < |xi| theta(xi), or nullopt when none.
std::optional<double> check_weight(const WeightFunction& w, const IntervalSet& ytilde,
                                   const ThetaWeight& theta);

/// Integral of w(xi) / (1 + xi^2) over the line, exact per linear piece.
double poisson_integral(const WeightFunction& w);

/// sum_k N_k theta(2^k)^2.
double surrogate_sum(const CoveringReport& report);

/// One line per knot: "xi w" with 17 significant digits.
std::string serialize_weight(const WeightFunction& w);

}  // namespace fuplab
