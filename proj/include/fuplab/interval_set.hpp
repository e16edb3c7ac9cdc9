#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fuplab/rational.hpp"

namespace fuplab {

/// Closed interval [lo, hi] with exact endpoints, lo <= hi.
struct Interval {
  Rational lo;
  Rational hi;

  Rational length() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Finite union of closed intervals.
///
/// Members are kept sorted by left endpoint; overlapping or touching members
/// are merged on construction, so any two stored intervals are separated by
/// an open gap of positive length. All operations are exact.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> intervals);

  static IntervalSet single(Rational lo, Rational hi);

  const std::vector<Interval>& intervals() const& { return intervals_; }
  std::vector<Interval> intervals() && { return std::move(intervals_); }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }

  /// Smallest interval containing the set; nullopt for the empty set.
  std::optional<Interval> bounding_box() const;

  Rational measure() const;
  bool contains(const Rational& x) const;

  /// True when the closed interval [lo, hi] meets the set.
  bool meets_closed(const Rational& lo, const Rational& hi) const;
  /// True when the open interval (lo, hi) meets the set.
  bool meets_open(const Rational& lo, const Rational& hi) const;

  /// Distance from the set to the closed interval [lo, hi] (0 if they meet).
  /// Requires a nonempty set.
  Rational distance_to(const Rational& lo, const Rational& hi) const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet clip(const Rational& lo, const Rational& hi) const;

  /// Closure of [lo, hi] minus the set: the gaps of the set inside [lo, hi].
  IntervalSet complement_in(const Rational& lo, const Rational& hi) const;

  IntervalSet dilate(const Rational& factor) const;
  IntervalSet translate(const Rational& shift) const;

  /// Largest open gap of the complement that lies inside [lo, hi].
  Rational largest_gap_in(const Rational& lo, const Rational& hi) const;

  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> intervals_;
};

// "intervalset v1" text format: header line, then one "num/den num/den" line
// per interval in lowest terms.
std::string serialize(const IntervalSet& set);
IntervalSet deserialize_interval_set(const std::string& text);

void write_interval_set(std::ostream& out, const IntervalSet& set);
IntervalSet read_interval_set(std::istream& in);

}  // namespace fuplab
