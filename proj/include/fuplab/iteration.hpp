#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fuplab/fourier.hpp"
#include "fuplab/interval_set.hpp"
#include "fuplab/restriction.hpp"
#include "fuplab/theta.hpp"

namespace fuplab {

/// Some dyadic interval contains no admissible hole.
class PorosityViolation : public std::runtime_error {
 public:
  PorosityViolation(const std::string& what, Interval interval)
      : std::runtime_error(what), interval_(std::move(interval)) {}
  const Interval& interval() const { return interval_; }

 private:
  Interval interval_;
};

/// Spectrum of an input function leaks outside the declared band.
class SupportViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ChosenHole {
  Interval dyadic;  // I in the level-k partition
  Interval hole;    // I', open, |I'| = nu |I|
};

/// Level-k holes of a set treated as 1-periodic, on the box [-1, 2].
///
/// Three concentric families per hole I': I' itself, the core (middle 3/4)
/// that is removed to form X_k, and the shrunk hole I'' (middle 1/2) on which
/// the mollifier is kept small. X_k contains the nu 2^-k/8 neighbourhood of X
/// and I'' keeps distance nu 2^-k/4 from X.
struct HoleDecomposition {
  int level = 0;
  Rational nu;
  IntervalSet holes;         // union of I'
  IntervalSet cores;         // union of middle 3/4 of each I'
  IntervalSet shrunk_holes;  // U'' = union of I''
  IntervalSet complement;    // X_k = [-1, 2] minus the cores
  std::vector<ChosenHole> chosen;  // one per dyadic I inside [-1, 2]
};

/// Leftmost admissible hole in every level-k dyadic interval.
HoleDecomposition build_holes(const IntervalSet& x, int k, const Rational& nu);

struct MollifierSpec {
  int k0 = 1;
  /// Kernel = (normalized Fejer kernel)^power; power 1 is plain Fejer.
  int kernel_power = 2;
};

/// Band-limited smoothing of the indicator of X_k sampled on the N-grid.
struct Mollifier {
  int level = 0;
  int k0 = 0;
  std::size_t band = 0;                // coefficients vanish for |m| > band
  std::vector<Complex> coefficients;   // c_m = N^-1 sum_j chi(j/N) e^{-2 pi i m j/N}, FFT order
  std::vector<double> values;          // chi(j/N)
};

/// Throws std::invalid_argument when 2^(k+k0) > N/4.
Mollifier build_mollifier(const HoleDecomposition& decomp, const MollifierSpec& spec,
                          std::size_t n);

/// Grid indices j with j/N in the set (closed intervals, taken mod 1).
GridSet grid_points(const IntervalSet& set, std::size_t n);

struct MollifierCheck {
  int level = 0;
  double max_on_shrunk = 0.0;  // max of chi over grid points of U''
  double max_on_holes = 0.0;   // same over U' (recorded, not required)
  double min_on_x = 1.0;       // min over discretize(X, N)
  bool passes = false;         // max_on_shrunk <= 1/2 and min_on_x >= 1 - 2^-k0
};

MollifierCheck check_mollifier(const Mollifier& chi, const HoleDecomposition& decomp,
                               const IntervalSet& x);

/// Precomputed holes and mollifiers for levels 0, k0, ..., K.
struct ChainPlan {
  std::size_t n = 0;
  Rational nu;
  int k0 = 1;
  int K = 0;  // padded up to a multiple of k0 (at least k0)
  std::vector<HoleDecomposition> decompositions;
  std::vector<Mollifier> mollifiers;
  std::vector<MollifierCheck> checks;
  GridSet x_points;  // discretize(X, N)

  bool admissible() const;
};

ChainPlan prepare_chain(const IntervalSet& x, const Rational& nu, int k0, int K, std::size_t n,
                        int kernel_power = 2);

/// Smallest k0 in [1, max_k0] whose plan passes every mollifier check, or
/// nullopt. Candidates whose band does not fit the grid, or whose padded
/// depth runs into a porosity violation, are skipped.
std::optional<ChainPlan> find_k0(const IntervalSet& x, const Rational& nu, int K, std::size_t n,
                                 int kernel_power = 2, int max_k0 = 20);

/// min over chain levels k of estimate_c(U''_k, band fattened by 2^k).
double chain_constant(const ChainPlan& plan, const GridSet& band,
                      std::size_t dense_limit = 1500);

struct ChainStep {
  int k = 0;
  double norm = 0.0;   // ||f_k||
  double ratio = 0.0;  // ||f_k|| / ||f_{k-k0}|| (0 when the previous norm is 0)
  double bound = 0.0;  // sqrt(1 - c^2/10) ||f_{k-k0}||
  bool flag = false;
};

struct ChainState {
  double input_norm = 0.0;
  double norm_on_x = 0.0;   // ||f||_{L^2(X)} over discretize(X, N)
  double c_used = 0.0;
  double contraction = 1.0;  // sqrt(1 - c^2/10)
  int k0 = 1;
  int K = 0;
  std::vector<ChainStep> steps;
  /// 2 (contraction / (1 - 2^-k0))^(K/k0) ||f||.
  double final_bound = 0.0;
  bool any_flag = false;
};

/// Grid L^2 norm (1/N sum |f_j|^2)^(1/2).
double grid_norm(std::span<const Complex> f);

/// f_k = chi_k f_{k-k0}, with chi_{-k0} f := f. Throws SupportViolation when
/// more than 1e-12 of the spectral mass of f0 lies outside `band`.
ChainState run_chain(const ChainPlan& plan, std::span<const Complex> f0, const GridSet& band,
                     double c);

/// Grid function with Gaussian random coefficients on `band`, unit grid norm.
std::vector<Complex> random_band_limited(const GridSet& band, std::uint64_t seed);

struct FrequencySplit {
  std::vector<Complex> low;   // frequencies |m| <= K
  std::vector<Complex> high;  // the rest
  double log_r = 0.0;         // log ||e^{|m| theta(m)} c_m||_{l^2}
  double high_norm = 0.0;
  double log_rhs = 0.0;       // -K theta(K) + log_r
  /// 1 - high_norm / rhs; the bound holds iff slack >= 0.
  double slack = 1.0;
};

/// Sharp cutoff at |m| <= kfreq with frequencies m in (-N/2, N/2]. Coefficients
/// below the FFT round-off floor (64 eps log2(N+1) ||g||) count as zero.
FrequencySplit split_frequencies(std::span<const Complex> g, std::size_t kfreq,
                                 const ThetaWeight& theta);

}  // namespace fuplab
