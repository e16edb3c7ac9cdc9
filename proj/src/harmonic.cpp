#include "fuplab/harmonic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fuplab/iteration.hpp"
#include "fuplab/parallel.hpp"

namespace fuplab {

void SlitStrip::validate() const {
  if (!(r > 0)) throw std::invalid_argument("slit strip: r must be positive");
  if (!(hole_lo < hole_hi)) throw std::invalid_argument("slit strip: empty slit");
  if (hole_lo < context_lo || hole_hi > context_hi)
    throw std::invalid_argument("slit strip: slit must lie inside the context interval");
  if (std::fabs(context_hi - context_lo - 1.0) > 1e-12)
    throw std::invalid_argument("slit strip: context interval must have unit length");
}

double SlitStrip::distance_to_boundary(double x, double y) const {
  const double dx = x < hole_lo ? hole_lo - x : (x > hole_hi ? x - hole_hi : 0.0);
  return std::min({r - y, r + y, std::hypot(dx, y)});
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Exit { Slit, Top, Bottom, Timeout };

Exit walk_once(const SlitStrip& s, double t, double shell, long max_steps, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  double x = t, y = 0.0;
  for (long step = 0; step < max_steps; ++step) {
    const double top = s.r - y;
    const double bottom = s.r + y;
    const double dx = x < s.hole_lo ? s.hole_lo - x : (x > s.hole_hi ? x - s.hole_hi : 0.0);
    const double slit = std::hypot(dx, y);
    const double d = std::min({top, bottom, slit});
    if (d <= shell) {
      if (slit == d) return Exit::Slit;
      return top <= bottom ? Exit::Top : Exit::Bottom;
    }
    const double a = angle(engine);
    x += d * std::cos(a);
    y += d * std::sin(a);
  }
  return Exit::Timeout;
}

}  // namespace

MeasureEstimate estimate_harmonic_measure(const SlitStrip& strip, double t,
                                          const WalkConfig& cfg) {
  strip.validate();
  if (cfg.walks < 1) throw std::invalid_argument("walk config: walks must be >= 1");
  if (cfg.max_steps < 1) throw std::invalid_argument("walk config: max_steps must be >= 1");
  if (t < strip.context_lo || t > strip.context_hi || (t >= strip.hole_lo && t <= strip.hole_hi))
    throw std::invalid_argument("harmonic measure: start point must lie in I minus I'");
  const double scale = std::min(strip.r, strip.hole_hi - strip.hole_lo);
  const double shell = cfg.shell > 0 ? cfg.shell : 1e-4 * scale;
  if (!(shell < scale / 10))
    throw std::invalid_argument("walk config: shell must be below min(r, |I'|)/10");

  constexpr long kChunk = 4096;
  const auto chunks = static_cast<std::size_t>((cfg.walks + kChunk - 1) / kChunk);
  struct Counts {
    long slit = 0, top = 0, bottom = 0, timeout = 0;
  };
  std::vector<Counts> partial(chunks);
  const std::uint64_t base = splitmix64(cfg.seed);
  parallel_for(chunks, cfg.threads, [&](std::size_t c) {
    Counts& out = partial[c];
    const long first = static_cast<long>(c) * kChunk;
    const long last = std::min(cfg.walks, first + kChunk);
    for (long i = first; i < last; ++i) {
      const auto seed = splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(i)));
      switch (walk_once(strip, t, shell, cfg.max_steps, seed)) {
        case Exit::Slit: ++out.slit; break;
        case Exit::Top: ++out.top; break;
        case Exit::Bottom: ++out.bottom; break;
        case Exit::Timeout: ++out.timeout; break;
      }
    }
  });

  MeasureEstimate est;
  for (const auto& p : partial) {
    est.hits_slit += p.slit;
    est.hits_top += p.top;
    est.hits_bottom += p.bottom;
    est.timeouts += p.timeout;
  }
  est.walks_used = cfg.walks - est.timeouts;
  if (est.timeouts * 1000 > cfg.walks)
    throw EstimateRejected("harmonic measure: " + std::to_string(est.timeouts) + " of " +
                           std::to_string(cfg.walks) + " walks timed out");
  if (est.walks_used > 0) {
    est.p_hat = static_cast<double>(est.hits_slit) / static_cast<double>(est.walks_used);
    est.ci95 = 1.96 * std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(est.walks_used));
  }
  return est;
}

double fd_harmonic_measure(const SlitStrip& strip, double t, const FdGrid& grid) {
  strip.validate();
  if (grid.nx < 5 || grid.ny < 5 || grid.ny % 2 == 0)
    throw std::invalid_argument("fd grid: need nx >= 5 and odd ny >= 5");
  if (!(grid.x_min < strip.hole_lo && strip.hole_hi < grid.x_max && grid.x_min < t &&
        t < grid.x_max))
    throw std::invalid_argument("fd grid: x range must contain the slit and the start point");

  const std::size_t nx = grid.nx;
  const std::size_t rows = (grid.ny - 1) / 2;  // unknown rows j = 0 .. rows-1; row `rows` is y = r
  const double hx = (grid.x_max - grid.x_min) / static_cast<double>(nx - 1);
  const double hy = strip.r / static_cast<double>(rows);
  const double ax = 1.0 / (hx * hx);
  const double ay = 1.0 / (hy * hy);
  const double eps = 1e-9 * hx;
  auto x_of = [&](std::size_t i) { return grid.x_min + static_cast<double>(i) * hx; };
  auto on_slit = [&](std::size_t i, std::size_t j) {
    return j == 0 && x_of(i) >= strip.hole_lo - eps && x_of(i) <= strip.hole_hi + eps;
  };

  // Index map; -1 marks Dirichlet nodes.
  std::vector<long> index(nx * rows, -1);
  long count = 0;
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i)
      if (!on_slit(i, j)) index[j * nx + i] = count++;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(count) * 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(count);
  for (std::size_t j = 0; j < rows; ++j) {
    // Row j = 0 uses the mirror ghost and is halved to keep the matrix symmetric.
    const double w = j == 0 ? 0.5 : 1.0;
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const long row = index[j * nx + i];
      if (row < 0) continue;
      trips.emplace_back(row, row, w * (2 * ax + 2 * ay));
      auto couple = [&](std::size_t ii, std::size_t jj, double coef) {
        if (jj == rows || ii == 0 || ii + 1 == nx) return;  // zero Dirichlet data
        if (on_slit(ii, jj)) {
          rhs[row] += coef;
          return;
        }
        trips.emplace_back(row, index[jj * nx + ii], -coef);
      };
      couple(i - 1, j, w * ax);
      couple(i + 1, j, w * ax);
      couple(i, j + 1, ay);  // at j = 0 the doubled ghost term is halved back
      if (j > 0) couple(i, j - 1, ay);
    }
  }
  Eigen::SparseMatrix<double> a(count, count);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("fd solve: factorization failed");
  const Eigen::VectorXd u = solver.solve(rhs);

  auto value = [&](std::size_t i) {
    if (i == 0 || i + 1 == nx) return 0.0;
    if (on_slit(i, 0)) return 1.0;
    return u[index[i]];
  };
  const double pos = (t - grid.x_min) / hx;
  const auto i0 = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i0);
  if (frac < 1e-12) return value(i0);
  return (1 - frac) * value(i0) + frac * value(i0 + 1);
}

KappaBound kappa_lower_bound(const SlitStrip& strip, std::span<const double> ts,
                             const WalkConfig& cfg) {
  if (ts.empty()) throw std::invalid_argument("kappa_lower_bound: no start points");
  KappaBound out;
  double best = std::numeric_limits<double>::infinity();
  for (double t : ts) {
    out.estimates.push_back(estimate_harmonic_measure(strip, t, cfg));
    const auto& e = out.estimates.back();
    if (e.p_hat - e.ci95 < best) {
      best = e.p_hat - e.ci95;
      out.argmin_t = t;
    }
  }
  out.kappa = std::max(0.0, best);
  return out;
}

KappaFit fit_kappa(std::span<const std::pair<double, double>> r_and_p) {
  std::vector<double> xs, ys;
  for (const auto& [r, p] : r_and_p) {
    if (!(r > 0)) throw std::invalid_argument("fit_kappa: r must be positive");
    if (p > 0) {
      xs.push_back(1.0 / r);
      ys.push_back(-std::log(p));
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("fit_kappa: need two points with p > 0");
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
  if (sxx == 0) throw std::invalid_argument("fit_kappa: r values must not all coincide");
  KappaFit fit;
  fit.c = sxy / sxx;
  fit.intercept = my - fit.c * mx;
  fit.used = xs.size();
  fit.bound_holds = true;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (-ys[i] < -1.1 * fit.c * xs[i]) fit.bound_holds = false;
  return fit;
}

Complex TrigPolynomial::operator()(Complex z) const {
  if (coeffs.empty()) return 0.0;
  const Complex w = std::exp(Complex(0, 1) * z);
  Complex acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * w + *it;
  return acc * std::pow(w, -degree());
}

TrigPolynomial random_trig_polynomial(int degree, std::uint64_t seed) {
  if (degree < 0) throw std::invalid_argument("random_trig_polynomial: negative degree");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> gauss;
  TrigPolynomial g;
  g.coeffs.resize(static_cast<std::size_t>(2 * degree + 1));
  for (auto& a : g.coeffs) a = Complex(gauss(engine), gauss(engine));
  return g;
}

namespace {

double sup_on_segment(const TrigPolynomial& g, double lo, double hi, double y,
                      std::size_t samples) {
  double best = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    best = std::max(best, std::abs(g(Complex(x, y))));
  }
  return best;
}

}  // namespace

SubharmonicReport check_subharmonic_bound(const TrigPolynomial& g, const SlitStrip& strip,
                                          double kappa, std::size_t samples) {
  strip.validate();
  if (!(kappa >= 0 && kappa <= 1)) throw std::invalid_argument("kappa must lie in [0, 1]");
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  if (std::all_of(g.coeffs.begin(), g.coeffs.end(), [](Complex a) { return a == 0.0; }))
    throw std::invalid_argument("check_subharmonic_bound: g is identically zero");
  SubharmonicReport rep;
  rep.sup_context = sup_on_segment(g, strip.context_lo, strip.context_hi, 0.0, samples);
  rep.sup_hole = sup_on_segment(g, strip.hole_lo, strip.hole_hi, 0.0, samples);
  // g is 2 pi periodic in x, so one period of each line covers it.
  const double period = 2.0 * std::numbers::pi;
  double lines = 0;
  for (double y : {strip.r, -strip.r})
    for (std::size_t i = 0; i < samples; ++i)
      lines = std::max(lines, std::abs(g(Complex(period * static_cast<double>(i) /
                                                     static_cast<double>(samples),
                                                 y))));
  rep.sup_lines = lines;
  rep.rhs = std::exp(kappa * std::log(rep.sup_hole) + (1.0 - kappa) * std::log(rep.sup_lines));
  if (kappa == 0) rep.rhs = rep.sup_lines;
  rep.slack = rep.rhs - rep.sup_context;
  return rep;
}

namespace {

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

HarmonicLemmaReport check_harmonic_lemma(std::span<const Complex> g, const GridSet& holes,
                                         std::size_t kfreq, const ThetaWeight& theta,
                                         double c_candidate) {
  const std::size_t n = g.size();
  if (holes.n() != n) throw std::invalid_argument("check_harmonic_lemma: grid size mismatch");
  if (kfreq > n / 2) throw std::invalid_argument("check_harmonic_lemma: cutoff beyond N/2");
  if (!(c_candidate > 0)) throw std::invalid_argument("check_harmonic_lemma: C must be positive");

  std::vector<Complex> c(g.begin(), g.end());
  UnitaryDft dft(n);
  dft.forward(c);
  zero_roundoff(c);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  double log_r = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(c[i]) * scale;
    if (a == 0) continue;
    const double m = i <= n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
    log_r = log_add(log_r, 2.0 * theta.growth(m) + 2.0 * std::log(a));
  }
  log_r *= 0.5;

  double on_holes = 0;
  for (auto j : holes.indices()) on_holes += std::norm(g[j]);
  on_holes = std::sqrt(on_holes / static_cast<double>(n));

  HarmonicLemmaReport rep;
  const double th = theta(static_cast<double>(kfreq));
  rep.kappa = std::exp(-c_candidate / th);
  rep.lhs = grid_norm(g);
  const double log_pref = std::log(c_candidate / th);
  const double first = on_holes > 0 ? log_pref + rep.kappa * std::log(on_holes) +
                                          (1.0 - rep.kappa) * log_r
                                    : -INFINITY;
  const double second = log_pref - rep.kappa * static_cast<double>(kfreq) * th + log_r;
  rep.log_rhs = log_add(first, second);
  rep.holds = rep.lhs == 0 || std::log(rep.lhs) <= rep.log_rhs + 1e-12;
  return rep;
}

std::optional<double> empirical_harmonic_constant(
    const std::vector<std::vector<Complex>>& corpus, const GridSet& holes, std::size_t kfreq,
    const ThetaWeight& theta) {
  for (int e = 0; e <= 10; ++e) {
    const double c = std::ldexp(1.0, e);
    const bool all = std::all_of(corpus.begin(), corpus.end(), [&](const auto& g) {
      return check_harmonic_lemma(g, holes, kfreq, theta, c).holds;
    });
    if (all) return c;
  }
  return std::nullopt;
}

std::vector<double> condition_theta_values(const std::function<double(double)>& theta, double c,
                                           std::span<const double> ks, ConditionForm form) {
  std::vector<double> out;
  out.reserve(ks.size());
  for (double k : ks) {
    const double th = theta(k);
    if (!(th > 0)) throw std::invalid_argument("condition_theta_values: theta must be positive");
    const double lead = std::exp(-c / th) * k * th;
    out.push_back(form == ConditionForm::AsPrinted ? lead - std::log(th) : lead + std::log(th));
  }
  return out;
}

bool strictly_increasing(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) ==
         v.end();
}

bool strictly_decreasing(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a > b); }) ==
         v.end();
}

}  // namespace fuplab
