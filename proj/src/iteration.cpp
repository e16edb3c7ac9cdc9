#include "fuplab/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fuplab {

namespace {

long signed_frequency(std::size_t i, std::size_t n) {
  return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

// Fourier coefficients c_m = N^-1 sum_j f_j e^{-2 pi i m j / N}.
std::vector<Complex> coefficients_of(std::span<const Complex> f) {
  std::vector<Complex> c(f.begin(), f.end());
  UnitaryDft dft(c.size());
  dft.forward(c);
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.size()));
  for (auto& z : c) z *= scale;
  return c;
}

std::vector<Complex> values_of(std::vector<Complex> c) {
  UnitaryDft dft(c.size());
  dft.inverse(c);
  const double scale = std::sqrt(static_cast<double>(c.size()));
  for (auto& z : c) z *= scale;
  return c;
}

// Coefficients of the p-th power of the Fejer kernel of order M, scaled to
// unit mass; index i holds frequency i - p M.
std::vector<double> kernel_coefficients(long half_width, int power) {
  std::vector<double> tri(static_cast<std::size_t>(2 * half_width + 1));
  for (long m = -half_width; m <= half_width; ++m)
    tri[static_cast<std::size_t>(m + half_width)] =
        1.0 - static_cast<double>(std::labs(m)) / static_cast<double>(half_width + 1);
  std::vector<double> acc{1.0};
  for (int p = 0; p < power; ++p) {
    std::vector<double> next(acc.size() + tri.size() - 1, 0.0);
    for (std::size_t a = 0; a < acc.size(); ++a)
      for (std::size_t b = 0; b < tri.size(); ++b) next[a + b] += acc[a] * tri[b];
    acc = std::move(next);
  }
  const double mass = acc[acc.size() / 2];
  for (auto& v : acc) v /= mass;
  return acc;
}

}  // namespace

HoleDecomposition build_holes(const IntervalSet& x, int k, const Rational& nu) {
  if (!(nu > 0 && nu <= 1)) throw std::invalid_argument("build_holes: nu must lie in (0, 1]");
  if (k < 0 || k > 24) throw std::invalid_argument("build_holes: level must lie in [0, 24]");
  const IntervalSet periodic = x.unite(x.translate(-1)).unite(x.translate(1));
  const Rational len = pow2(-k);
  const Rational need = nu * len;
  const long count = 1L << k;

  HoleDecomposition d;
  d.level = k;
  d.nu = nu;
  std::vector<ChosenHole> base;
  base.reserve(static_cast<std::size_t>(count));
  for (long j = 0; j < count; ++j) {
    Interval dyadic{len * j, len * (j + 1)};
    std::optional<Rational> start;
    const IntervalSet gaps = periodic.complement_in(dyadic.lo, dyadic.hi);
    for (const auto& gap : gaps.intervals()) {
      if (gap.length() >= need) {
        start = gap.lo;
        break;
      }
    }
    if (!start)
      throw PorosityViolation("no hole of relative size " + format_rational(nu) + " in [" +
                                  format_rational(dyadic.lo) + ", " + format_rational(dyadic.hi) +
                                  "]",
                              dyadic);
    base.push_back({dyadic, Interval{*start, *start + need}});
  }

  std::vector<Interval> holes, cores, shrunk;
  for (int shift = -1; shift <= 1; ++shift) {
    for (const auto& ch : base) {
      const Rational s(shift);
      Interval hole{ch.hole.lo + s, ch.hole.hi + s};
      d.chosen.push_back({Interval{ch.dyadic.lo + s, ch.dyadic.hi + s}, hole});
      cores.push_back({hole.lo + need / 8, hole.hi - need / 8});
      shrunk.push_back({hole.lo + need / 4, hole.hi - need / 4});
      holes.push_back(std::move(hole));
    }
  }
  d.holes = IntervalSet(std::move(holes));
  d.cores = IntervalSet(std::move(cores));
  d.shrunk_holes = IntervalSet(std::move(shrunk));
  d.complement = d.cores.complement_in(-1, 2);
  return d;
}

Mollifier build_mollifier(const HoleDecomposition& decomp, const MollifierSpec& spec,
                          std::size_t n) {
  if (spec.k0 < 1) throw std::invalid_argument("build_mollifier: k0 must be >= 1");
  if (spec.kernel_power < 1) throw std::invalid_argument("build_mollifier: kernel power must be >= 1");
  const int e = decomp.level + spec.k0;
  if (e > 40 || (std::size_t{1} << e) > n / 4)
    throw std::invalid_argument("build_mollifier: band 2^(k+k0) exceeds N/4");

  // Sample 1_{X_k} at j/N on the torus: zero strictly inside a core. The
  // cores already carry their translates by +-1.
  std::vector<Complex> indicator(n, 1.0);
  const Rational scale(static_cast<unsigned long>(n));
  const long ln = static_cast<long>(n);
  for (const auto& core : decomp.cores.intervals()) {
    const long first = std::max(floor_of(core.lo * scale).get_si() + 1, -ln);
    const long last = std::min(ceil_of(core.hi * scale).get_si() - 1, 2 * ln - 1);
    for (long j = first; j <= last; ++j) indicator[static_cast<std::size_t>((j % ln + ln) % ln)] = 0.0;
  }

  Mollifier chi;
  chi.level = decomp.level;
  chi.k0 = spec.k0;
  const long total = 1L << (e - 1);
  const long half_width = total / spec.kernel_power;
  chi.band = static_cast<std::size_t>(half_width * spec.kernel_power);
  const auto kernel = kernel_coefficients(half_width, spec.kernel_power);
  const long reach = static_cast<long>(chi.band);

  chi.coefficients = coefficients_of(indicator);
  for (std::size_t i = 0; i < n; ++i) {
    const long m = signed_frequency(i, n);
    if (std::labs(m) > reach)
      chi.coefficients[i] = 0.0;
    else
      chi.coefficients[i] *= kernel[static_cast<std::size_t>(m + reach)];
  }
  const auto vals = values_of(chi.coefficients);
  chi.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) chi.values[i] = vals[i].real();
  return chi;
}

GridSet grid_points(const IntervalSet& set, std::size_t n) {
  std::vector<char> m(n, 0);
  const Rational scale(static_cast<unsigned long>(n));
  const long ln = static_cast<long>(n);
  for (const auto& iv : set.intervals()) {
    if (iv.length() >= 1) return GridSet::full(Grid{n});
    const long first = ceil_of(iv.lo * scale).get_si();
    const long last = floor_of(iv.hi * scale).get_si();
    for (long j = first; j <= last; ++j) m[static_cast<std::size_t>(((j % ln) + ln) % ln)] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j)
    if (m[j]) out.push_back(j);
  return GridSet(Grid{n}, std::move(out));
}

MollifierCheck check_mollifier(const Mollifier& chi, const HoleDecomposition& decomp,
                               const IntervalSet& x) {
  const std::size_t n = chi.values.size();
  MollifierCheck out;
  out.level = chi.level;
  for (auto j : grid_points(decomp.shrunk_holes, n).indices())
    out.max_on_shrunk = std::max(out.max_on_shrunk, chi.values[j]);
  for (auto j : grid_points(decomp.holes, n).indices())
    out.max_on_holes = std::max(out.max_on_holes, chi.values[j]);
  for (auto j : discretize(x, n).indices()) out.min_on_x = std::min(out.min_on_x, chi.values[j]);
  out.passes = out.max_on_shrunk <= 0.5 && out.min_on_x >= 1.0 - std::ldexp(1.0, -chi.k0);
  return out;
}

bool ChainPlan::admissible() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passes; });
}

namespace {

int padded_depth(int K, int k0) { return std::max(k0, (K + k0 - 1) / k0 * k0); }

bool band_fits(int K_padded, int k0, std::size_t n) {
  const int e = K_padded + k0;
  return e <= 40 && (std::size_t{1} << e) <= n / 4;
}

}  // namespace

ChainPlan prepare_chain(const IntervalSet& x, const Rational& nu, int k0, int K, std::size_t n,
                        int kernel_power) {
  if (k0 < 1) throw std::invalid_argument("prepare_chain: k0 must be >= 1");
  if (K < 0) throw std::invalid_argument("prepare_chain: K must be >= 0");
  ChainPlan plan;
  plan.n = n;
  plan.nu = nu;
  plan.k0 = k0;
  plan.K = padded_depth(K, k0);
  plan.x_points = discretize(x, n);
  for (int k = 0; k <= plan.K; k += k0) {
    plan.decompositions.push_back(build_holes(x, k, nu));
    plan.mollifiers.push_back(
        build_mollifier(plan.decompositions.back(), MollifierSpec{k0, kernel_power}, n));
    plan.checks.push_back(check_mollifier(plan.mollifiers.back(), plan.decompositions.back(), x));
  }
  return plan;
}

std::optional<ChainPlan> find_k0(const IntervalSet& x, const Rational& nu, int K, std::size_t n,
                                 int kernel_power, int max_k0) {
  for (int k0 = 1; k0 <= max_k0; ++k0) {
    if (!band_fits(padded_depth(K, k0), k0, n)) continue;
    try {
      ChainPlan plan = prepare_chain(x, nu, k0, K, n, kernel_power);
      if (plan.admissible()) return plan;
    } catch (const PorosityViolation&) {
      continue;  // padded depth goes beyond what the set resolves
    }
  }
  return std::nullopt;
}

double chain_constant(const ChainPlan& plan, const GridSet& band, std::size_t dense_limit) {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& d : plan.decompositions) {
    const GridSet u = grid_points(d.shrunk_holes, plan.n);
    const GridSet b = band.fatten(std::size_t{1} << d.level);
    c = std::min(c, estimate_c(u, b, dense_limit).c);
  }
  return c;
}

double grid_norm(std::span<const Complex> f) {
  if (f.empty()) return 0.0;
  double s = 0;
  for (const auto& z : f) s += std::norm(z);
  return std::sqrt(s / static_cast<double>(f.size()));
}

ChainState run_chain(const ChainPlan& plan, std::span<const Complex> f0, const GridSet& band,
                     double c) {
  if (f0.size() != plan.n || band.n() != plan.n)
    throw std::invalid_argument("run_chain: grid size mismatch");
  if (!(c >= 0 && c <= 1)) throw std::invalid_argument("run_chain: c must lie in [0, 1]");

  const auto coeffs = coefficients_of(f0);
  double total = 0, outside = 0;
  const auto inside = band.mask();
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    total += std::norm(coeffs[i]);
    if (!inside[i]) outside += std::norm(coeffs[i]);
  }
  if (outside > 1e-12 * total)
    throw SupportViolation("run_chain: spectral mass outside the band is " +
                           std::to_string(total > 0 ? outside / total : 0.0));

  ChainState st;
  st.c_used = c;
  st.contraction = std::sqrt(std::max(0.0, 1.0 - c * c / 10.0));
  st.k0 = plan.k0;
  st.K = plan.K;
  st.input_norm = grid_norm(f0);
  double on_x = 0;
  for (auto j : plan.x_points.indices()) on_x += std::norm(f0[j]);
  st.norm_on_x = std::sqrt(on_x / static_cast<double>(plan.n));

  std::vector<Complex> f(f0.begin(), f0.end());
  double prev = st.input_norm;
  for (std::size_t s = 0; s < plan.mollifiers.size(); ++s) {
    const auto& chi = plan.mollifiers[s];
    for (std::size_t j = 0; j < f.size(); ++j) f[j] *= chi.values[j];
    ChainStep step;
    step.k = chi.level;
    step.norm = grid_norm(f);
    step.ratio = prev > 0 ? step.norm / prev : 0.0;
    step.bound = st.contraction * prev;
    step.flag = step.ratio > st.contraction + 1e-9;
    st.any_flag = st.any_flag || step.flag;
    st.steps.push_back(step);
    prev = step.norm;
  }
  st.final_bound = 2.0 *
                   std::pow(st.contraction / (1.0 - std::ldexp(1.0, -plan.k0)),
                            static_cast<double>(plan.K / plan.k0)) *
                   st.input_norm;
  return st;
}

std::vector<Complex> random_band_limited(const GridSet& band, std::uint64_t seed) {
  std::vector<Complex> c(band.n(), 0.0);
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> gauss;
  for (auto i : band.indices()) c[i] = Complex(gauss(engine), gauss(engine));
  auto f = values_of(std::move(c));
  const double s = grid_norm(f);
  if (s > 0)
    for (auto& z : f) z /= s;
  return f;
}

FrequencySplit split_frequencies(std::span<const Complex> g, std::size_t kfreq,
                                 const ThetaWeight& theta) {
  const std::size_t n = g.size();
  if (n == 0) throw std::invalid_argument("split_frequencies: empty input");
  if (kfreq > n / 2) throw std::invalid_argument("split_frequencies: cutoff beyond N/2");
  auto coeffs = coefficients_of(g);
  // otherwise e^{|m| theta(m)} turns 1e-17 noise into the dominant term of R
  zero_roundoff(coeffs);
  std::vector<Complex> low(n, 0.0), high(n, 0.0);
  std::vector<double> terms;
  double high_sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long m = signed_frequency(i, n);
    if (static_cast<std::size_t>(std::labs(m)) <= kfreq) {
      low[i] = coeffs[i];
    } else {
      high[i] = coeffs[i];
      high_sq += std::norm(coeffs[i]);
    }
    const double a = std::abs(coeffs[i]);
    if (a > 0) terms.push_back(2.0 * theta.growth(static_cast<double>(m)) + 2.0 * std::log(a));
  }

  FrequencySplit out;
  if (terms.empty()) {
    out.log_r = -std::numeric_limits<double>::infinity();
  } else {
    const double top = *std::max_element(terms.begin(), terms.end());
    double s = 0;
    for (double t : terms) s += std::exp(t - top);
    out.log_r = 0.5 * (top + std::log(s));
  }
  out.high_norm = std::sqrt(high_sq);
  out.log_rhs = -theta.growth(static_cast<double>(kfreq)) + out.log_r;
  out.slack = out.high_norm == 0 ? 1.0 : 1.0 - std::exp(std::log(out.high_norm) - out.log_rhs);
  out.low = values_of(std::move(low));
  out.high = values_of(std::move(high));
  return out;
}

}  // namespace fuplab
