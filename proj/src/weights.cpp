#include "fuplab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace fuplab {

ThetaWeight choose_delta(const Rational& nu) {
  if (!(nu > 0 && nu < 1)) throw std::invalid_argument("choose_delta: nu must lie in (0, 1)");
  const Rational two_over = Rational(2) / nu;
  const mpz_class m = ceil_of(two_over);
  if (!m.fits_slong_p()) throw std::invalid_argument("choose_delta: nu too small");
  ThetaWeight th;
  th.m = static_cast<int>(m.get_si());
  const double md = static_cast<double>(th.m);
  th.epsilon = 1.0 - std::log(md - 1.0) / std::log(md);
  th.delta = 0.5 * (1.0 / (1.0 + th.epsilon) + 1.0);
  if (!(th.delta < 1.0) || !(th.delta * (1.0 + th.epsilon) > 1.0))
    throw std::logic_error("choose_delta: delta out of range for nu = " + format_rational(nu));
  return th;
}

double CoveringReport::bound(int k) const {
  const auto& b = bands.at(static_cast<std::size_t>(k));
  return c_fit * std::pow(b.theta, -(1.0 - theta.epsilon));
}

IntervalSet dyadic_band(int k) {
  if (k < 0) throw std::invalid_argument("dyadic_band: k must be >= 0");
  if (k == 0) return IntervalSet::single(-1, 1);
  const Rational hi = pow2(k), lo = pow2(k - 1);
  return IntervalSet({Interval{-hi, -lo}, Interval{lo, hi}});
}

std::vector<Rational> greedy_cover(const IntervalSet& set, const Rational& len) {
  if (!(len > 0)) throw std::invalid_argument("greedy_cover: length must be positive");
  std::vector<Rational> starts;
  const auto& ivs = set.intervals();
  if (ivs.empty()) return starts;
  std::size_t i = 0;
  Rational p = ivs.front().lo;
  for (;;) {
    starts.push_back(p);
    const Rational end = p + len;
    while (i < ivs.size() && ivs[i].hi <= end) ++i;
    if (i == ivs.size()) break;
    p = ivs[i].lo > end ? ivs[i].lo : end;
  }
  return starts;
}

CoveringReport cover_bands(const IntervalSet& ytilde, int K, const ThetaWeight& theta) {
  if (K < 0 || K > 60) throw std::invalid_argument("cover_bands: K must lie in [0, 60]");
  CoveringReport rep;
  rep.K = K;
  rep.theta = theta;
  std::vector<double> xs, ys;
  for (int k = 0; k <= K; ++k) {
    BandCover b;
    b.k = k;
    b.theta = theta(std::ldexp(1.0, k));
    b.length = rational_from_double(std::ldexp(b.theta, k));
    b.starts = greedy_cover(ytilde.intersect(dyadic_band(k)), b.length);
    if (b.count() > 0) {
      xs.push_back(-std::log(b.theta));
      ys.push_back(std::log(static_cast<double>(b.count())));
      rep.c_fit = std::max(rep.c_fit, static_cast<double>(b.count()) *
                                          std::pow(b.theta, 1.0 - theta.epsilon));
    }
    rep.bands.push_back(std::move(b));
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx > 0) rep.slope = sxy / sxx;
  }
  return rep;
}

double WeightFunction::operator()(double xi) const {
  if (knots.empty() || xi < knots.front().first || xi > knots.back().first) return 0.0;
  auto it = std::upper_bound(knots.begin(), knots.end(), xi,
                             [](double x, const auto& kn) { return x < kn.first; });
  if (it == knots.end()) return knots.back().second;
  if (it == knots.begin()) return knots.front().second;
  const auto& [x1, w1] = *it;
  const auto& [x0, w0] = *(it - 1);
  return w0 + (w1 - w0) * (xi - x0) / (x1 - x0);
}

namespace {

void finish(WeightFunction& w) {
  w.slope_bound = 0;
  for (std::size_t i = 1; i < w.knots.size(); ++i) {
    const double dx = w.knots[i].first - w.knots[i - 1].first;
    w.slope_bound = std::max(w.slope_bound, std::fabs(w.knots[i].second - w.knots[i - 1].second) / dx);
  }
}

}  // namespace

WeightFunction build_weight(const CoveringReport& report, const WeightOptions& opts) {
  if (!(opts.ramp_fraction >= 0.01 && opts.ramp_fraction <= 1.0))
    throw std::invalid_argument("build_weight: ramp fraction must lie in [1/100, 1]");
  // Slope changes of the trapezoid sum, keyed by position.
  std::map<double, double> events;
  auto add_bump = [&](double lo, double hi, double height) {
    const double ramp = opts.ramp_fraction * height;
    const double s = height / ramp;
    events[lo - ramp] += s;
    events[lo] -= s;
    events[hi] -= s;
    events[hi + ramp] += s;
  };
  for (const auto& b : report.bands) {
    const double len = to_double(b.length);
    for (const auto& st : b.starts) {
      const double lo = to_double(st);
      add_bump(lo, lo + len, len);
      if (opts.symmetric) add_bump(-lo - len, -lo, len);
    }
  }
  WeightFunction bumps;
  double value = 0, slope = 0, prev = 0;
  bool first = true;
  for (const auto& [x, ds] : events) {
    if (!first) value += slope * (x - prev);
    first = false;
    bumps.knots.emplace_back(x, std::max(0.0, value) * opts.prefactor);
    slope += ds;
    prev = x;
  }
  if (!bumps.knots.empty()) bumps.knots.back().second = 0.0;
  finish(bumps);
  return pointwise_max(bumps, theta_patch(report.theta, opts.patch_radius));
}

WeightFunction theta_patch(const ThetaWeight& theta, double radius) {
  WeightFunction p;
  if (!(radius > 0)) return p;
  // On [x_i, x_i + h] the value theta.growth(x_i + h) dominates because
  // |xi| theta(xi) increases in |xi|; knots use the right neighbour's value.
  const double h = 0.125;
  const auto n = static_cast<long>(std::ceil(radius / h));
  const double edge = static_cast<double>(n) * h;
  const double top = theta.growth(edge + h);
  std::vector<std::pair<double, double>> right;
  for (long i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) * h;
    right.emplace_back(x, theta.growth(x + h));
  }
  right.emplace_back(edge + top, 0.0);  // slope -1 down to zero
  for (auto it = right.rbegin(); it != right.rend(); ++it)
    if (it->first > 0) p.knots.emplace_back(-it->first, it->second);
  p.knots.insert(p.knots.end(), right.begin(), right.end());
  finish(p);
  return p;
}

WeightFunction pointwise_max(const WeightFunction& a, const WeightFunction& b) {
  std::vector<double> xs;
  for (const auto& k : a.knots) xs.push_back(k.first);
  for (const auto& k : b.knots) xs.push_back(k.first);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  WeightFunction out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x1 = xs[i];
    const double a1 = a(x1), b1 = b(x1);
    if (i > 0) {
      const double x0 = xs[i - 1];
      const double d0 = a(x0) - b(x0), d1 = a1 - b1;
      if ((d0 < 0 && d1 > 0) || (d0 > 0 && d1 < 0)) {
        const double xc = x0 + (x1 - x0) * d0 / (d0 - d1);
        if (xc > x0 && xc < x1) out.knots.emplace_back(xc, std::max(a(xc), b(xc)));
      }
    }
    out.knots.emplace_back(x1, std::max(a1, b1));
  }
  finish(out);
  return out;
}

std::optional<double> check_weight(const WeightFunction& w, const IntervalSet& ytilde,
                                   const ThetaWeight& theta) {
  auto deficit = [&](double xi) { return w(xi) - theta.growth(xi); };
  auto fails = [&](double xi) {
    return deficit(xi) < -1e-12 * std::max(1.0, theta.growth(xi));
  };
  constexpr double kGolden = 0.6180339887498949;
  for (const auto& iv : ytilde.intervals()) {
    const double a = to_double(iv.lo), b = to_double(iv.hi);
    std::vector<double> cuts{a};
    auto it = std::upper_bound(w.knots.begin(), w.knots.end(), a,
                               [](double x, const auto& kn) { return x < kn.first; });
    for (; it != w.knots.end() && it->first < b; ++it) cuts.push_back(it->first);
    if (b > a) cuts.push_back(b);
    if (a <= 0 && b >= 0) {
      cuts.push_back(0.0);
      std::sort(cuts.begin(), cuts.end());
    }
    for (double c : cuts)
      if (fails(c)) return c;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      double lo = cuts[i - 1], hi = cuts[i];
      if (!(hi > lo)) continue;
      for (int g = 1; g < 16; ++g) {
        const double x = lo + (hi - lo) * g / 16.0;
        if (fails(x)) return x;
      }
      // w is linear on the piece and the target is concave there, so the
      // deficit is convex; golden-section search finds its minimum.
      double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
      double f1 = deficit(x1), f2 = deficit(x2);
      for (int step = 0; step < 80 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++step) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - kGolden * (hi - lo);
          f1 = deficit(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + kGolden * (hi - lo);
          f2 = deficit(x2);
        }
      }
      const double xm = f1 < f2 ? x1 : x2;
      if (fails(xm)) return xm;
    }
  }
  return std::nullopt;
}

double poisson_integral(const WeightFunction& w) {
  double total = 0;
  for (std::size_t i = 1; i < w.knots.size(); ++i) {
    const auto [u, wu] = w.knots[i - 1];
    const auto [v, wv] = w.knots[i];
    const double s = (wv - wu) / (v - u);
    // integral of 1/(1+x^2) and of x/(1+x^2) over [u, v]
    const double da = u * v > 0 ? std::atan((v - u) / (1.0 + u * v)) : std::atan(v) - std::atan(u);
    const double dl = 0.5 * std::log1p((v - u) * (v + u) / (1.0 + u * u));
    total += wu * da + s * (dl - u * da);
  }
  return total;
}

double surrogate_sum(const CoveringReport& report) {
  double s = 0;
  for (const auto& b : report.bands) s += static_cast<double>(b.count()) * b.theta * b.theta;
  return s;
}

std::string serialize_weight(const WeightFunction& w) {
  std::string out = "weight v1\n";
  char buf[80];
  for (const auto& [x, v] : w.knots) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", x, v);
    out += buf;
  }
  return out;
}

}  // namespace fuplab
