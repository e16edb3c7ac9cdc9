#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fuplab/interval_set.hpp"

namespace fuplab {

/// Set would exceed the configured interval cap.
class ResourceExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CantorSpec {
  int base = 3;
  std::vector<int> digits{0, 2};
  int depth = 0;
};

constexpr std::size_t kDefaultIntervalCap = std::size_t{1} << 24;

/// Union over digit strings (d_1..d_K) of [sum d_i M^-i, sum d_i M^-i + M^-K].
IntervalSet make_cantor(const CantorSpec& spec, std::size_t cap = kDefaultIntervalCap);

/// Seeded random porous subset of [0,1].
///
/// At level k = 1..depth+1 each dyadic cell of length 2^-(k-1) that still
/// meets the set is halved, and from each half an open subinterval of
/// relative length 4*nu is removed at a pseudorandom position. Any window of
/// length L in [2^-depth, 1] contains a whole half of length d in (L/4, L/2],
/// hence a hole of length 4*nu*d > nu*L: the output is nu-porous on scales
/// 2^-depth to 1. Requires 0 < nu < 1/4; depends only on (nu, depth, seed).
IntervalSet make_random_porous(const Rational& nu, int depth, std::uint64_t seed);

struct PorosityParams {
  Rational nu;
  Rational alpha0;
  Rational alpha1;
};

enum class PorosityStatus { CertifiedPorous, CertifiedNotPorous, Unknown };

const char* to_string(PorosityStatus s);

struct PorosityVerdict {
  PorosityStatus status = PorosityStatus::Unknown;
  /// Window of admissible length whose largest complement gap is < nu*|I|.
  std::optional<Interval> witness;
  /// Smallest relative slack (gap/|I| - nu) over the certified size bands.
  Rational margin = 0;
};

struct CertifierOptions {
  /// Ratio between consecutive tested window sizes.
  double size_ratio = 1.0905077326652577;  // 2^(1/8)
  /// Bisection depth used inside a size band before giving up with Unknown.
  int max_refinements = 12;
};

/// Smallest, over all window positions x, of the largest gap of the
/// complement inside [x, x+L]; exact. Returns the minimizing x as well.
struct MinGap {
  Rational gap;
  Rational x;
};
MinGap min_window_gap(const IntervalSet& set, const Rational& L);

/// Decides nu-porosity on scales alpha0..alpha1 for a finite union of
/// intervals. A hole J counts when the open complement contains an interval
/// of length nu*|I| inside I. Three-valued: never certifies on doubt.
PorosityVerdict check_porosity(const IntervalSet& set, const PorosityParams& params,
                               const CertifierOptions& opts = {});

/// Largest nu on the grid j*2^-resolution_bits that check_porosity certifies;
/// 0 if even the first grid point fails.
Rational max_porosity(const IntervalSet& set, const Rational& alpha0, const Rational& alpha1,
                      int resolution_bits = 10, const CertifierOptions& opts = {});

/// Pieces of a set porous on scales h^rho..1 that are porous on scales h..1.
struct ScaleDecomposition {
  Rational period;              // h^rho (exact when rational)
  bool period_exact = true;
  std::vector<IntervalSet> pieces;  // one per block offset l = 0..ceil(2 h^(rho-1))
};

ScaleDecomposition decompose_scales(const IntervalSet& set, const Rational& h,
                                    const Rational& rho);

/// Exact h^rho when it is rational, nullopt otherwise.
std::optional<Rational> rational_power(const Rational& h, const Rational& rho);

}  // namespace fuplab
