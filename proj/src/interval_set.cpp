#include "fuplab/interval_set.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace fuplab {

IntervalSet::IntervalSet(std::vector<Interval> intervals) {
  // mpq_class(num, den) does not reduce; equality needs lowest terms
  for (auto& iv : intervals) {
    iv.lo.canonicalize();
    iv.hi.canonicalize();
    if (iv.hi < iv.lo) throw std::invalid_argument("interval with hi < lo");
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (auto& iv : intervals) {
    if (!intervals_.empty() && iv.lo <= intervals_.back().hi) {
      if (iv.hi > intervals_.back().hi) intervals_.back().hi = iv.hi;
    } else {
      intervals_.push_back(std::move(iv));
    }
  }
}

IntervalSet IntervalSet::single(Rational lo, Rational hi) {
  return IntervalSet({Interval{std::move(lo), std::move(hi)}});
}

std::optional<Interval> IntervalSet::bounding_box() const {
  if (intervals_.empty()) return std::nullopt;
  return Interval{intervals_.front().lo, intervals_.back().hi};
}

Rational IntervalSet::measure() const {
  Rational total = 0;
  for (const auto& iv : intervals_) total += iv.length();
  return total;
}

namespace {

// Index of the first interval with hi >= x.
std::size_t first_not_left_of(const std::vector<Interval>& ivs, const Rational& x) {
  auto it = std::partition_point(ivs.begin(), ivs.end(),
                                 [&](const Interval& iv) { return iv.hi < x; });
  return static_cast<std::size_t>(it - ivs.begin());
}

}  // namespace

bool IntervalSet::contains(const Rational& x) const {
  auto i = first_not_left_of(intervals_, x);
  return i < intervals_.size() && intervals_[i].lo <= x;
}

bool IntervalSet::meets_closed(const Rational& lo, const Rational& hi) const {
  auto i = first_not_left_of(intervals_, lo);
  return i < intervals_.size() && intervals_[i].lo <= hi;
}

bool IntervalSet::meets_open(const Rational& lo, const Rational& hi) const {
  if (!(lo < hi)) return false;
  auto it = std::partition_point(intervals_.begin(), intervals_.end(),
                                 [&](const Interval& iv) { return iv.hi <= lo; });
  return it != intervals_.end() && it->lo < hi;
}

Rational IntervalSet::distance_to(const Rational& lo, const Rational& hi) const {
  if (intervals_.empty()) throw std::invalid_argument("distance_to on empty set");
  if (meets_closed(lo, hi)) return 0;
  auto i = first_not_left_of(intervals_, lo);
  std::optional<Rational> best;
  if (i < intervals_.size()) best = intervals_[i].lo - hi;
  if (i > 0) {
    Rational left = lo - intervals_[i - 1].hi;
    if (!best || left < *best) best = left;
  }
  return *best;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  const auto& a = intervals_;
  const auto& b = other.intervals_;
  while (i < a.size() && j < b.size()) {
    const Rational& lo = a[i].lo < b[j].lo ? b[j].lo : a[i].lo;
    const Rational& hi = a[i].hi < b[j].hi ? a[i].hi : b[j].hi;
    if (lo <= hi) out.push_back({lo, hi});
    if (a[i].hi < b[j].hi) ++i; else ++j;
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::clip(const Rational& lo, const Rational& hi) const {
  if (hi < lo) return {};
  return intersect(single(lo, hi));
}

IntervalSet IntervalSet::complement_in(const Rational& lo, const Rational& hi) const {
  std::vector<Interval> gaps;
  Rational cursor = lo;
  for (auto i = first_not_left_of(intervals_, lo); i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (iv.lo > hi) break;
    if (iv.lo > cursor) gaps.push_back({cursor, iv.lo});
    if (iv.hi > cursor) cursor = iv.hi;
  }
  if (cursor < hi) gaps.push_back({cursor, hi});
  return IntervalSet(std::move(gaps));
}

IntervalSet IntervalSet::dilate(const Rational& factor) const {
  if (factor <= 0) throw std::invalid_argument("dilate: factor must be positive");
  std::vector<Interval> out;
  out.reserve(intervals_.size());
  for (const auto& iv : intervals_) out.push_back({iv.lo * factor, iv.hi * factor});
  IntervalSet s;
  s.intervals_ = std::move(out);
  return s;
}

IntervalSet IntervalSet::translate(const Rational& shift) const {
  IntervalSet s;
  s.intervals_.reserve(intervals_.size());
  for (const auto& iv : intervals_) s.intervals_.push_back({iv.lo + shift, iv.hi + shift});
  return s;
}

Rational IntervalSet::largest_gap_in(const Rational& lo, const Rational& hi) const {
  Rational best = 0;
  Rational cursor = lo;
  for (auto i = first_not_left_of(intervals_, lo); i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (iv.lo > hi) break;
    if (iv.lo - cursor > best) best = iv.lo - cursor;
    if (iv.hi > cursor) cursor = iv.hi;
    if (cursor >= hi) return best;
  }
  if (hi - cursor > best) best = hi - cursor;
  return best;
}

std::string serialize(const IntervalSet& set) {
  std::ostringstream out;
  write_interval_set(out, set);
  return out.str();
}

IntervalSet deserialize_interval_set(const std::string& text) {
  std::istringstream in(text);
  return read_interval_set(in);
}

void write_interval_set(std::ostream& out, const IntervalSet& set) {
  out << "intervalset v1\n";
  for (const auto& iv : set.intervals())
    out << format_rational(iv.lo) << ' ' << format_rational(iv.hi) << '\n';
}

IntervalSet read_interval_set(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "intervalset v1")
    throw ParseError("missing 'intervalset v1' header");
  std::vector<Interval> ivs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra))
      throw ParseError("line " + std::to_string(lineno) + ": expected two endpoints");
    Interval iv{parse_rational(a), parse_rational(b)};
    if (iv.hi < iv.lo) throw ParseError("line " + std::to_string(lineno) + ": hi < lo");
    ivs.push_back(std::move(iv));
  }
  return IntervalSet(std::move(ivs));
}

}  // namespace fuplab
