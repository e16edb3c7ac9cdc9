#include "fuplab/dyadic_sets.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fuplab {

IntervalSet make_cantor(const CantorSpec& spec, std::size_t cap) {
  if (spec.base < 2) throw std::invalid_argument("cantor: base must be >= 2");
  if (spec.depth < 0) throw std::invalid_argument("cantor: depth must be >= 0");
  std::vector<int> digits = spec.digits;
  std::sort(digits.begin(), digits.end());
  digits.erase(std::unique(digits.begin(), digits.end()), digits.end());
  if (digits.empty() || digits.size() >= static_cast<std::size_t>(spec.base))
    throw std::invalid_argument("cantor: digits must be a nonempty proper subset");
  if (digits.front() < 0 || digits.back() >= spec.base)
    throw std::invalid_argument("cantor: digit out of range");

  double count = std::pow(static_cast<double>(digits.size()), spec.depth);
  if (count > static_cast<double>(cap))
    throw ResourceExhausted("cantor: " + std::to_string(count) + " intervals exceed cap " +
                            std::to_string(cap));

  // Left endpoints as integers over base^depth.
  std::vector<mpz_class> lefts{0};
  for (int level = 0; level < spec.depth; ++level) {
    std::vector<mpz_class> next;
    next.reserve(lefts.size() * digits.size());
    for (const auto& a : lefts)
      for (int d : digits) next.push_back(a * spec.base + d);
    lefts = std::move(next);
  }
  Rational scale = rational_pow(spec.base, -spec.depth);
  std::vector<Interval> ivs;
  ivs.reserve(lefts.size());
  for (const auto& a : lefts) {
    Rational lo = Rational(a) * scale;
    ivs.push_back({lo, lo + scale});
  }
  return IntervalSet(std::move(ivs));
}

IntervalSet make_random_porous(const Rational& nu, int depth, std::uint64_t seed) {
  if (nu <= 0 || nu >= Rational(1, 4))
    throw std::invalid_argument("random porous: nu must lie in (0, 1/4)");
  if (depth < 1) throw std::invalid_argument("random porous: depth must be >= 1");

  std::mt19937_64 engine(seed);
  constexpr int kPositionBits = 20;
  const Rational position_unit = pow2(-kPositionBits);

  IntervalSet set = IntervalSet::single(0, 1);
  for (int k = 1; k <= depth + 1; ++k) {
    const Rational parent = pow2(-(k - 1));
    const Rational half = pow2(-k);
    const Rational hole = 4 * nu * half;
    std::vector<Interval> holes;
    const long cells = 1L << (k - 1);
    for (long j = 0; j < cells; ++j) {
      Rational a = parent * j;
      if (!set.meets_open(a, a + parent)) continue;
      for (int side = 0; side < 2; ++side) {
        Rational start = a + half * side;
        auto u = static_cast<long>(engine() >> (64 - kPositionBits));
        Rational offset = (half - hole) * position_unit * u;
        holes.push_back({start + offset, start + offset + hole});
      }
    }
    // Holes are open: keep the closure of set minus holes.
    set = set.intersect(IntervalSet(std::move(holes)).complement_in(0, 1));
  }
  return set;
}

const char* to_string(PorosityStatus s) {
  switch (s) {
    case PorosityStatus::CertifiedPorous: return "CERTIFIED_POROUS";
    case PorosityStatus::CertifiedNotPorous: return "CERTIFIED_NOT_POROUS";
    case PorosityStatus::Unknown: return "UNKNOWN";
  }
  return "?";
}

namespace {

// Range-maximum over the open gaps between consecutive members.
class GapTable {
 public:
  explicit GapTable(const std::vector<Interval>& ivs) {
    std::size_t n = ivs.size() > 0 ? ivs.size() - 1 : 0;
    if (n == 0) return;
    levels_.emplace_back();
    levels_[0].reserve(n);
    for (std::size_t t = 0; t < n; ++t) levels_[0].push_back(ivs[t + 1].lo - ivs[t].hi);
    for (std::size_t w = 1; (std::size_t{1} << w) <= n; ++w) {
      const auto& prev = levels_[w - 1];
      std::vector<Rational> cur;
      std::size_t span = std::size_t{1} << (w - 1);
      for (std::size_t t = 0; t + (std::size_t{1} << w) <= n; ++t)
        cur.push_back(std::max(prev[t], prev[t + span]));
      levels_.push_back(std::move(cur));
    }
  }

  // Max of gaps t in [first, last]; requires first <= last.
  const Rational& max(std::size_t first, std::size_t last) const {
    std::size_t len = last - first + 1;
    std::size_t w = 0;
    while ((std::size_t{2} << w) <= len) ++w;
    const auto& a = levels_[w][first];
    const auto& b = levels_[w][last + 1 - (std::size_t{1} << w)];
    return a < b ? b : a;
  }

 private:
  std::vector<std::vector<Rational>> levels_;
};

// Piecewise description of x -> largest gap in [x, x+L], valid on a segment
// free of breakpoints: max(C, s - x, x + L - e) with optional terms.
struct WindowShape {
  bool all_gap = false;
  std::optional<Rational> constant;
  std::optional<Rational> left_end;   // s: term s - x
  std::optional<Rational> right_end;  // e: term x + L - e
};

WindowShape shape_at(const std::vector<Interval>& ivs, const GapTable& gaps, const Rational& x,
                     const Rational& L) {
  WindowShape w;
  const Rational y = x + L;
  auto first = std::partition_point(ivs.begin(), ivs.end(),
                                    [&](const Interval& iv) { return iv.hi < x; });
  auto past = std::partition_point(ivs.begin(), ivs.end(),
                                   [&](const Interval& iv) { return iv.lo <= y; });
  if (first == ivs.end() || first >= past) {
    w.all_gap = true;
    return w;
  }
  auto i = static_cast<std::size_t>(first - ivs.begin());
  auto j = static_cast<std::size_t>(past - ivs.begin()) - 1;
  if (x < ivs[i].lo) w.left_end = ivs[i].lo;
  if (y > ivs[j].hi) w.right_end = ivs[j].hi;
  if (j > i) w.constant = gaps.max(i, j - 1);
  return w;
}

Rational evaluate(const WindowShape& w, const Rational& x, const Rational& L) {
  if (w.all_gap) return L;
  Rational v = w.constant ? *w.constant : Rational(0);
  if (w.left_end) v = std::max(v, Rational(*w.left_end - x));
  if (w.right_end) v = std::max(v, Rational(x + L - *w.right_end));
  return v;
}

}  // namespace

MinGap min_window_gap(const IntervalSet& set, const Rational& L) {
  const auto& ivs = set.intervals();
  if (ivs.empty()) return {L, 0};
  GapTable gaps(ivs);

  std::vector<Rational> breaks;
  breaks.reserve(4 * ivs.size());
  for (const auto& iv : ivs) {
    breaks.push_back(iv.lo - L);
    breaks.push_back(iv.lo);
    breaks.push_back(iv.hi - L);
    breaks.push_back(iv.hi);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  MinGap best{L, breaks.front()};
  auto consider = [&](const WindowShape& w, const Rational& x) {
    Rational v = evaluate(w, x, L);
    if (v < best.gap) best = {v, x};
  };
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const Rational& u = breaks[b];
    const Rational& v = breaks[b + 1];
    Rational mid = (u + v) / 2;
    WindowShape w = shape_at(ivs, gaps, mid, L);
    consider(w, u);
    consider(w, v);
    if (w.left_end && w.right_end) {
      // s - x = x + L - e at x = (s + e - L) / 2
      Rational cross = (*w.left_end + *w.right_end - L) / 2;
      if (u < cross && cross < v) consider(w, cross);
    }
  }
  return best;
}

namespace {

struct BandOutcome {
  bool refuted = false;
  bool unknown = false;
  std::optional<Interval> witness;
  std::optional<Rational> margin;
};

void merge_margin(BandOutcome& out, const Rational& m) {
  if (!out.margin || m < *out.margin) out.margin = m;
}

// Certifies every window size in [lo, hi] using the smallest window lo.
void certify_band(const IntervalSet& set, const Rational& nu, const Rational& lo,
                  const Rational& hi, int depth_left, BandOutcome& out) {
  if (out.refuted) return;
  MinGap g = min_window_gap(set, lo);
  if (g.gap < nu * lo) {
    out.refuted = true;
    out.witness = Interval{g.x, g.x + lo};
    return;
  }
  if (g.gap >= nu * hi) {
    merge_margin(out, g.gap / hi - nu);
    return;
  }
  if (depth_left == 0) {
    out.unknown = true;
    return;
  }
  Rational mid = (lo + hi) / 2;
  certify_band(set, nu, lo, mid, depth_left - 1, out);
  certify_band(set, nu, mid, hi, depth_left - 1, out);
}

}  // namespace

PorosityVerdict check_porosity(const IntervalSet& set, const PorosityParams& params,
                               const CertifierOptions& opts) {
  const auto& [nu, a0, a1] = params;
  if (!(nu > 0 && nu < 1)) throw std::invalid_argument("porosity: nu must lie in (0,1)");
  if (!(a0 > 0 && a0 <= a1)) throw std::invalid_argument("porosity: need 0 < alpha0 <= alpha1");
  if (!(opts.size_ratio > 1.0)) throw std::invalid_argument("porosity: size ratio must exceed 1");

  PorosityVerdict verdict;
  if (set.empty()) {
    verdict.status = PorosityStatus::CertifiedPorous;
    verdict.margin = 1 - nu;
    return verdict;
  }

  // Geometric size grid alpha0 = L_0 < L_1 < ... < L_n = alpha1.
  std::vector<Rational> sizes{a0};
  const double a0d = to_double(a0);
  for (int j = 1;; ++j) {
    double next = a0d * std::pow(opts.size_ratio, j);
    Rational L = rational_from_double(next);
    if (L >= a1) break;
    if (L > sizes.back()) sizes.push_back(L);
  }
  if (sizes.back() < a1) sizes.push_back(a1);

  BandOutcome out;
  for (std::size_t j = 0; j + 1 < sizes.size() && !out.refuted; ++j)
    certify_band(set, nu, sizes[j], sizes[j + 1], opts.max_refinements, out);
  if (!out.refuted) {
    // The largest size is checked on its own.
    MinGap g = min_window_gap(set, a1);
    if (g.gap < nu * a1) {
      out.refuted = true;
      out.witness = Interval{g.x, g.x + a1};
    } else {
      merge_margin(out, g.gap / a1 - nu);
    }
  }

  if (out.refuted) {
    verdict.status = PorosityStatus::CertifiedNotPorous;
    verdict.witness = out.witness;
  } else if (out.unknown) {
    verdict.status = PorosityStatus::Unknown;
  } else {
    verdict.status = PorosityStatus::CertifiedPorous;
    verdict.margin = out.margin.value_or(0);
  }
  return verdict;
}

Rational max_porosity(const IntervalSet& set, const Rational& alpha0, const Rational& alpha1,
                      int resolution_bits, const CertifierOptions& opts) {
  if (alpha1 < alpha0) throw std::invalid_argument("max_porosity: alpha0 > alpha1");
  const long top = (1L << resolution_bits) - 1;
  const Rational step = pow2(-resolution_bits);
  auto certified = [&](long j) {
    return check_porosity(set, {step * j, alpha0, alpha1}, opts).status ==
           PorosityStatus::CertifiedPorous;
  };
  if (!certified(1)) return 0;
  long good = 1, bad = top + 1;
  while (bad - good > 1) {
    long mid = good + (bad - good) / 2;
    if (certified(mid)) good = mid; else bad = mid;
  }
  return step * good;
}

std::optional<Rational> rational_power(const Rational& h, const Rational& rho) {
  if (h <= 0) throw std::invalid_argument("rational_power: base must be positive");
  const mpz_class& a = rho.get_num();
  const mpz_class& b = rho.get_den();
  if (!a.fits_ulong_p() || !b.fits_ulong_p()) return std::nullopt;
  auto root = [&](const mpz_class& v) -> std::optional<mpz_class> {
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), v.get_mpz_t(), a.get_ui());
    mpz_class r;
    if (mpz_root(r.get_mpz_t(), p.get_mpz_t(), b.get_ui()) == 0) return std::nullopt;
    return r;
  };
  auto num = root(h.get_num());
  auto den = root(h.get_den());
  if (!num || !den) return std::nullopt;
  Rational q(*num, *den);
  q.canonicalize();
  return q;
}

ScaleDecomposition decompose_scales(const IntervalSet& set, const Rational& h,
                                    const Rational& rho) {
  if (!(h > 0 && h < 1)) throw std::invalid_argument("decompose_scales: need 0 < h < 1");
  if (!(rho > 0 && rho <= 1)) throw std::invalid_argument("decompose_scales: need 0 < rho <= 1");

  ScaleDecomposition out;
  if (rho == 1) {
    out.period = h;
    out.pieces.push_back(set);
    return out;
  }
  if (auto p = rational_power(h, rho)) {
    out.period = *p;
  } else {
    out.period = rational_from_double(std::pow(to_double(h), to_double(rho)));
    out.period_exact = false;
  }
  const Rational& period = out.period;
  const Rational block = h / 2;
  const long blocks = ceil_of(2 * period / h).get_si();

  auto box = set.bounding_box();
  for (long l = 0; l <= blocks; ++l) {
    if (!box) {
      out.pieces.emplace_back();
      continue;
    }
    const long j_lo = floor_of(box->lo / period).get_si() - 1;
    const long j_hi = ceil_of(box->hi / period).get_si() + 1;
    std::vector<Interval> cells;
    for (long j = j_lo; j <= j_hi; ++j) {
      Rational start = period * j + block * l;
      Rational end_of_period = period * (j + 1);
      if (start >= end_of_period) continue;
      Rational stop = std::min(Rational(start + block), end_of_period);
      cells.push_back({start, stop});
    }
    out.pieces.push_back(set.intersect(IntervalSet(std::move(cells))));
  }
  return out;
}

}  // namespace fuplab
