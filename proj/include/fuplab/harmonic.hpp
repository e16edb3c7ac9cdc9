#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fuplab/fourier.hpp"
#include "fuplab/restriction.hpp"
#include "fuplab/theta.hpp"

namespace fuplab {

/// {|Im z| < r} minus the slit [hole_lo, hole_hi] on the real axis; the
/// context interval I of unit length contains the slit.
struct SlitStrip {
  double r = 0.2;
  double hole_lo = 0.45;
  double hole_hi = 0.55;
  double context_lo = 0.0;
  double context_hi = 1.0;

  void validate() const;
  /// Closed-form distance from (x, y) to the boundary.
  double distance_to_boundary(double x, double y) const;
};

struct WalkConfig {
  long walks = 100000;
  /// Absorption distance; 0 picks 1e-4 min(r, |I'|).
  double shell = 0.0;
  long max_steps = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct MeasureEstimate {
  double p_hat = 0.0;
  double ci95 = 0.0;
  long walks_used = 0;
  long timeouts = 0;
  long hits_slit = 0;
  long hits_top = 0;
  long hits_bottom = 0;
};

/// More than 0.1% of the walks hit the step limit.
class EstimateRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Walk-on-spheres estimate of the probability that Brownian motion from
/// (t, 0) leaves the strip through the slit. Walk i draws from its own
/// generator seeded by (seed, i), so the result does not depend on threads.
MeasureEstimate estimate_harmonic_measure(const SlitStrip& strip, double t,
                                          const WalkConfig& cfg);

struct FdGrid {
  std::size_t nx = 2001;
  std::size_t ny = 401;  // rows across the full height 2r
  double x_min = -2.0;
  double x_max = 3.0;
};

/// Five-point finite-difference solution of the exit problem (1 on the slit,
/// 0 on the lines and on the truncated ends), evaluated at (t, 0). The
/// solution is even in y, so only the upper half is assembled.
double fd_harmonic_measure(const SlitStrip& strip, double t, const FdGrid& grid = {});

struct KappaBound {
  double kappa = 0.0;  // max(0, min_t (p_hat - ci95))
  double argmin_t = 0.0;
  std::vector<MeasureEstimate> estimates;  // one per t
};

/// Conservative lower bound for the slit measure over starting points t.
KappaBound kappa_lower_bound(const SlitStrip& strip, std::span<const double> ts,
                             const WalkConfig& cfg);

struct KappaFit {
  double c = 0.0;          // slope of log(1/p) against 1/r
  double intercept = 0.0;
  std::size_t used = 0;    // points with p > 0
  bool bound_holds = false;  // p(r) >= exp(-1.1 c / r) at every used point
};

/// Least-squares fit of log(1/p) = intercept + c / r over (r, p) pairs.
KappaFit fit_kappa(std::span<const std::pair<double, double>> r_and_p);

/// g(z) = sum_{n=-K..K} a_n e^{i n z}; entire and 2 pi periodic.
struct TrigPolynomial {
  std::vector<Complex> coeffs;  // a_{-K}, ..., a_K

  int degree() const { return static_cast<int>(coeffs.size() / 2); }
  Complex operator()(Complex z) const;
};

/// Coefficients i.i.d. complex Gaussian, deterministic in the seed.
TrigPolynomial random_trig_polynomial(int degree, std::uint64_t seed);

struct SubharmonicReport {
  double sup_context = 0.0;  // sup over I
  double sup_hole = 0.0;     // sup over I'
  double sup_lines = 0.0;    // sup over Im z = +-r
  double rhs = 0.0;          // sup_hole^kappa sup_lines^(1-kappa)
  double slack = 0.0;        // rhs - sup_context
};

/// Dense-sampling check of the two-constants bound on the slit strip.
/// Throws std::invalid_argument for g identically zero.
SubharmonicReport check_subharmonic_bound(const TrigPolynomial& g, const SlitStrip& strip,
                                          double kappa, std::size_t samples = 1u << 14);

struct HarmonicLemmaReport {
  double lhs = 0.0;      // ||g||
  double log_rhs = 0.0;
  double kappa = 0.0;
  bool holds = false;
};

/// Both sides of the low/high interpolation bound for a grid function g on
/// the unit torus, with kappa = exp(-C / theta(K)) and the norm on U' taken
/// over the grid points of `holes`. R ignores round-off-level coefficients.
HarmonicLemmaReport check_harmonic_lemma(std::span<const Complex> g, const GridSet& holes,
                                         std::size_t kfreq, const ThetaWeight& theta,
                                         double c_candidate);

/// Smallest C in {1, 2, 4, ..., 2^10} for which the bound holds on every
/// function of the corpus, or nullopt.
std::optional<double> empirical_harmonic_constant(
    const std::vector<std::vector<Complex>>& corpus, const GridSet& holes, std::size_t kfreq,
    const ThetaWeight& theta);

enum class ConditionForm {
  /// e^{-C/theta} K theta - log theta, as usually written.
  AsPrinted,
  /// e^{-C/theta} K theta + log theta: the exponent of the remainder term
  /// C e^{-kappa K theta} / theta, which must tend to +infinity.
  RemainderExponent,
};

/// Values of the growth condition on theta at each K.
std::vector<double> condition_theta_values(const std::function<double(double)>& theta, double c,
                                           std::span<const double> ks,
                                           ConditionForm form = ConditionForm::AsPrinted);

bool strictly_increasing(std::span<const double> values);
bool strictly_decreasing(std::span<const double> values);

}  // namespace fuplab
