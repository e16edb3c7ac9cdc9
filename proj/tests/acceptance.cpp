// One PASS/FAIL line per acceptance criterion. Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fuplab/dyadic_sets.hpp"
#include "fuplab/fourier.hpp"
#include "fuplab/harmonic.hpp"
#include "fuplab/iteration.hpp"
#include "fuplab/restriction.hpp"
#include "fuplab/weights.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace fuplab;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kUnknownRate = 0.05;
constexpr double kCertifierSeconds = 60;
constexpr double kPowerVsDense = 1e-8;
constexpr double kFullNorm = 1e-10;
constexpr double kOperatorSeconds = 300;
constexpr double kDecayR2 = 0.9;
constexpr double kDecaySeconds = 600;
constexpr double kComplementIdentity = 1e-8;
constexpr double kSlopeAllowance = 0.05;
constexpr double kSurrogateRatio = 1.5;
constexpr double kPoissonQuadrature = 1e-9;
constexpr double kHighSlack = -1e-10;
constexpr double kWalkVsFd = 2e-2;
constexpr double kHarmonicSeconds = 600;
constexpr long kWalks = 100000;
constexpr double kRatioAllowance = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

// Sets with at most 64 intervals, from four families.
IntervalSet porosity_sample(int i) {
  std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(i));
  for (;;) {
    IntervalSet s;
    switch (i % 4) {
      case 0:
        s = make_random_porous(pick(rng, std::vector{Rational(1, 10), Rational(1, 8), Rational(3, 20)}),
                               std::uniform_int_distribution<int>(2, 8)(rng), rng());
        break;
      case 1: {
        const long den = pick(rng, std::vector<long>{64, 81, 100});
        std::uniform_int_distribution<long> at(0, den);
        std::vector<Interval> ivs;
        const int count = std::uniform_int_distribution<int>(1, 12)(rng);
        for (int j = 0; j < count; ++j) {
          long a = at(rng), b = at(rng);
          if (a > b) std::swap(a, b);
          ivs.push_back({Rational(a, den), Rational(b, den)});
        }
        s = IntervalSet(ivs);
        break;
      }
      case 2: {
        const int base = std::uniform_int_distribution<int>(3, 5)(rng);
        std::vector<int> digits{0, base - 1};
        if (base == 5 && rng() % 2) digits = {0, 2, 4};
        s = make_cantor({base, digits, std::uniform_int_distribution<int>(1, 3)(rng)});
        break;
      }
      default:
        s = make_random_porous(Rational(1, 10), std::uniform_int_distribution<int>(2, 6)(rng), rng())
                .dilate(Rational(1, 2))
                .translate(Rational(std::uniform_int_distribution<long>(0, 32)(rng), 64));
    }
    if (!s.empty() && s.size() <= 64) return s;
  }
}

Outcome criterion_porosity() {
  const std::vector<Rational> nus{Rational(1, 12), Rational(1, 9), Rational(1, 7), Rational(1, 5),
                                  Rational(2, 9), Rational(3, 13), Rational(1, 4), Rational(1, 3)};
  const std::vector<Rational> floors{Rational(1, 64), Rational(1, 128), Rational(1, 50)};
  int porous = 0, refuted = 0, unknown = 0, disagree = 0;
  double certifier_time = 0;
  for (int i = 0; i < 200; ++i) {
    const auto s = porosity_sample(i);
    std::mt19937_64 rng(77 + static_cast<std::uint64_t>(i));
    const PorosityParams p{pick(rng, nus), pick(rng, floors), 1};
    const auto t0 = std::chrono::steady_clock::now();
    const auto v = check_porosity(s, p);
    certifier_time += seconds_since(t0);
    switch (v.status) {
      case PorosityStatus::CertifiedPorous:
        ++porous;
        if (oracle::scan_windows(s, p.nu, p.alpha0, p.alpha1, Rational(1, 256), 24)) ++disagree;
        break;
      case PorosityStatus::CertifiedNotPorous: {
        ++refuted;
        const auto& w = v.witness;
        if (!w || w->length() < p.alpha0 || w->length() > p.alpha1 ||
            !(oracle::largest_gap(s, w->lo, w->hi) < p.nu * w->length()))
          ++disagree;
        break;
      }
      case PorosityStatus::Unknown:
        ++unknown;
    }
  }
  const double rate = unknown / 200.0;
  return {disagree == 0 && rate <= kUnknownRate && certifier_time <= kCertifierSeconds,
          fmt("porous=%d not_porous=%d unknown=%d (%.1f%%) disagreements=%d certifier=%.2fs", porous,
              refuted, unknown, 100 * rate, disagree, certifier_time)};
}

GridSet random_grid_set(std::mt19937_64& rng, std::size_t n) {
  const double density = std::uniform_real_distribution<double>(0.03, 0.5)(rng);
  std::bernoulli_distribution keep(density);
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < n; ++j)
    if (keep(rng)) idx.push_back(j);
  if (idx.empty()) idx.push_back(rng() % n);
  return GridSet(Grid{n}, idx);
}

Outcome criterion_operator() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  const std::vector<std::size_t> sizes{64, 256, 512};
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = sizes[i % 3];
    GridSet x, y;
    if (i % 5 == 4) {
      x = discretize(make_random_porous(Rational(1, 10), 8, rng()), n);
      y = discretize(make_cantor({3, {0, 2}, 6}), n);
    } else {
      x = random_grid_set(rng, n);
      y = random_grid_set(rng, n);
    }
    worst = std::max(worst, std::fabs(fup_norm(x, y).sigma - fup_norm_dense(x, y).sigma));
  }
  double worst_full = 0;
  std::vector<std::size_t> fulls{3, 100, 1000, 19683};
  for (int e = 1; e <= 16; ++e) fulls.push_back(std::size_t{1} << e);
  for (auto n : fulls) {
    const auto f = GridSet::full(Grid{n});
    worst_full = std::max(worst_full, std::fabs(fup_norm(f, f).sigma - 1.0));
  }
  const double t = seconds_since(t0);
  return {worst <= kPowerVsDense && worst_full <= kFullNorm && t <= kOperatorSeconds,
          fmt("max|power-dense|=%.2e on 50 pairs, max|full-1|=%.2e up to N=65536, %.1fs", worst,
              worst_full, t)};
}

Outcome criterion_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = make_cantor({3, {0, 2}, 9});
  std::vector<std::size_t> ns;
  for (int k = 4; k <= 9; ++k) ns.push_back(static_cast<std::size_t>(std::pow(3, k)));
  const auto sw = norm_sweep(c, c, ns, {}, 729);
  std::vector<std::pair<std::size_t, double>> pts;
  bool ok = true;
  double worst = 0;
  std::string sigmas;
  for (const auto& e : sw.entries) {
    if (!e.result) {
      ok = false;
      continue;
    }
    if (!pts.empty() && !(e.result->sigma < pts.back().second)) ok = false;
    pts.emplace_back(e.n, e.result->sigma);
    sigmas += fmt(" %.6f", e.result->sigma);
    if (e.n <= 729) {
      const auto x = discretize(c, e.n);
      worst = std::max(worst, std::fabs(fup_norm(x, x).sigma - e.result->sigma));
    }
  }
  const auto fit = ok ? fit_exponent(pts) : ExponentFit{};
  const double t = seconds_since(t0);
  return {ok && fit.beta > 0 && fit.r_squared >= kDecayR2 && worst <= kPowerVsDense &&
              t <= kDecaySeconds,
          fmt("sigma(3^4..3^9)=%s beta=%.4f r2=%.4f power-vs-dense=%.1e %.1fs", sigmas.c_str(),
              fit.beta, fit.r_squared, worst, t)};
}

Outcome criterion_complement() {
  double worst = 0, cmin = 1, cmax = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = i % 2 ? 512 : 256;
    const int level = 1 + i % 4;
    const auto x = make_random_porous(Rational(1, 10), 6 + i % 3, static_cast<std::uint64_t>(i) + 1);
    const auto u = discretize(build_holes(x, level, Rational(1, 10)).holes.clip(0, 1), n);
    const Rational lo(i % 7, 64);
    const auto band = fattened_band(IntervalSet::single(lo, lo + Rational(1, 32)), n, 2 + i % 3);
    const auto est = estimate_c(u, band, i % 3 == 2 ? 1 : 1500);
    const double s = complement_norm(u, band).sigma;
    worst = std::max(worst, std::fabs(est.c * est.c + s * s - 1.0));
    cmin = std::min(cmin, est.c);
    cmax = std::max(cmax, est.c);
  }
  return {worst <= kComplementIdentity,
          fmt("max|c^2+sigma'^2-1|=%.2e over 20 configs, c in [%.3g, %.3g]", worst, cmin, cmax)};
}

Outcome criterion_covering() {
  const int K = 12;
  bool ok = true;
  std::string detail;
  for (const Rational nu : {Rational(1, 10), Rational(1, 5), Rational(2, 5)}) {
    const auto theta = choose_delta(nu);
    const double limit = 1 - theta.epsilon + kSlopeAllowance;
    std::vector<Rational> gens{Rational(1, 10), Rational(1, 8), Rational(3, 20), Rational(1, 5),
                               Rational(6, 25)};
    std::erase_if(gens, [&](const Rational& g) { return nu <= Rational(1, 4) && g < nu; });
    int certified = 0, rejected = 0, over = 0;
    double worst = -INFINITY;
    for (std::uint64_t seed = 1; certified < 20 && seed < 400; ++seed) {
      IntervalSet x = make_random_porous(gens[seed % gens.size()], K, seed);
      if (nu == Rational(1, 10) && seed % 4 == 0) x = make_cantor({3, {0, 2}, 8});
      if (nu == Rational(1, 10) && seed % 8 == 0) x = make_cantor({4, {0, 3}, 6});
      if (check_porosity(x, {nu, pow2(-K), 1}).status != PorosityStatus::CertifiedPorous) {
        ++rejected;
        continue;
      }
      ++certified;
      const auto rep = cover_bands(x.dilate(pow2(K)), K, theta);
      if (!rep.slope) continue;  // fewer than two nonempty bands
      worst = std::max(worst, *rep.slope);
      if (*rep.slope > limit) ++over;
    }
    ok = ok && certified == 20 && over == 0;
    detail += fmt("nu=%s: %d sets (%d rejected), max slope %.4f <= %.4f; ", format_rational(nu).c_str(),
                  certified, rejected, worst, limit);
  }
  return {ok, detail};
}

Outcome criterion_poisson() {
  const Rational nu(3, 16);
  const auto theta = choose_delta(nu);
  const bool certified =
      check_porosity(make_cantor({3, {0, 2}, 8}), {nu, rational_pow(3, -7), 1}).status ==
      PorosityStatus::CertifiedPorous;
  const auto x = make_cantor({3, {0, 2}, 16});
  const auto rep12 = cover_bands(x.dilate(pow2(12)), 12, theta);
  const auto rep24 = cover_bands(x.dilate(pow2(24)), 24, theta);
  const double s12 = surrogate_sum(rep12), s24 = surrogate_sum(rep24);
  double worst = 0;
  for (const auto* rep : {&rep12, &rep24}) {
    const auto w = build_weight(*rep);
    worst = std::max(worst, std::fabs(poisson_integral(w) - oracle::poisson_integral(w)));
  }
  const double ratio = s24 / s12;
  return {certified && ratio <= kSurrogateRatio && worst <= kPoissonQuadrature,
          fmt("S(12)=%.6f S(24)=%.6f ratio=%.4f, |poisson-quadrature|=%.2e", s12, s24, ratio, worst)};
}

Outcome criterion_high_frequency() {
  const ThetaWeight theta;
  const std::size_t n = 1024;
  double worst = INFINITY;
  int nontrivial = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    std::mt19937_64 rng(500 + i);
    std::set<std::size_t> freqs;
    const int count = std::uniform_int_distribution<int>(4, 40)(rng);
    std::uniform_int_distribution<long> m(-300, 300);
    for (int j = 0; j < count; ++j) freqs.insert(static_cast<std::size_t>((m(rng) + long(n)) % long(n)));
    const auto g = random_band_limited(GridSet(Grid{n}, {freqs.begin(), freqs.end()}), i);
    const auto s = split_frequencies(g, std::uniform_int_distribution<std::size_t>(1, 200)(rng), theta);
    worst = std::min(worst, s.slack);
    nontrivial += s.high_norm > 0;
  }
  return {worst >= kHighSlack, fmt("min slack %.3e over 100 functions (%d with a high part)", worst,
                                   nontrivial)};
}

Outcome criterion_harmonic() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  WalkConfig cfg;
  cfg.walks = kWalks;

  const SlitStrip geometry;  // r = 0.2, I' = [0.45, 0.55], I = [0, 1]
  double worst = 0;
  for (double t : {0.0, 0.3, 1.0}) {
    const double fd = fd_harmonic_measure(geometry, t);
    worst = std::max(worst, std::fabs(estimate_harmonic_measure(geometry, t, cfg).p_hat - fd));
  }
  ok = ok && worst <= kWalkVsFd;
  detail += fmt("|wos-fd|=%.4f; ", worst);

  bool monotone = true;
  MeasureEstimate prev;
  bool first = true;
  for (double r : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
    const auto e = estimate_harmonic_measure(SlitStrip{r}, 0.0, cfg);
    if (!first && e.p_hat + e.ci95 < prev.p_hat - prev.ci95) monotone = false;
    if (e.hits_slit + e.hits_top + e.hits_bottom + e.timeouts != e.walks_used) monotone = false;
    prev = e;
    first = false;
  }
  ok = ok && monotone;
  detail += fmt("monotone in r: %s; ", monotone ? "yes" : "no");

  const auto sym = estimate_harmonic_measure(SlitStrip{0.3}, 0.2, cfg);
  const double nw = static_cast<double>(sym.walks_used);
  const double pt = sym.hits_top / nw, pb = sym.hits_bottom / nw;
  const double band = 1.96 * std::sqrt((pt + pb - (pt - pb) * (pt - pb)) / nw);
  const bool symmetric = std::fabs(pt - pb) <= band;
  ok = ok && symmetric;
  detail += fmt("top-bottom=%.4f (95%% band %.4f); ", pt - pb, band);

  std::vector<double> ts;
  for (int j = 0; j <= 20; ++j)
    if (double t = j / 20.0; t < geometry.hole_lo || t > geometry.hole_hi) ts.push_back(t);
  const double kappa = kappa_lower_bound(geometry, ts, cfg).kappa;
  double min_slack = INFINITY;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto g = random_trig_polynomial(2 + static_cast<int>(i % 30), 900 + i);
    min_slack = std::min(min_slack, check_subharmonic_bound(g, geometry, kappa).slack);
  }
  const double t = seconds_since(t0);
  ok = ok && kappa > 0 && min_slack >= 0 && t <= kHarmonicSeconds;
  detail += fmt("kappa=%.4f min slack %.4g over 50; %.1fs", kappa, min_slack, t);
  return {ok, detail};
}

Outcome criterion_chain() {
  const Rational nu(1, 5);
  const std::size_t n = 1 << 16;
  const auto x = make_random_porous(nu, 8, 7);
  const auto plan = find_k0(x, nu, 1, n);
  if (!plan) return {false, "no admissible k0"};
  bool support = true;
  double leak = 0;
  UnitaryDft dft(n);
  for (const auto& chi : plan->mollifiers) {
    const std::size_t limit = std::size_t{1} << (chi.level + chi.k0 - 1);
    if (chi.band > limit) support = false;
    std::vector<Complex> resampled(chi.values.begin(), chi.values.end());
    dft.forward(resampled);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = std::min(i, n - i);
      if (m > limit) {
        if (chi.coefficients[i] != Complex(0.0)) support = false;
        leak += std::norm(resampled[i]) / double(n);
      }
    }
  }
  bool checks = plan->admissible();
  for (const auto& c : plan->checks)
    checks = checks && c.max_on_shrunk <= 0.5 && c.min_on_x >= 1 - std::ldexp(1.0, -plan->k0);
  const bool smallest = plan->k0 == 1 || !prepare_chain(x, nu, plan->k0 - 1, 1, n).admissible();

  const auto band = discretize(make_random_porous(nu, 6, 11).dilate(Rational(1, 1024)), n);
  const double c = chain_constant(*plan, band);
  const double limit = std::sqrt(1 - c * c / 10) + kRatioAllowance;
  double worst = 0;
  long flags = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto st = run_chain(*plan, random_band_limited(band, 7000 + i), band, c);
    for (const auto& s : st.steps) {
      worst = std::max(worst, s.ratio);
      flags += s.flag;
    }
  }
  return {support && checks && smallest && c > 0 && worst <= limit && flags == 0,
          fmt("k0=%d (smallest: %s), coefficients beyond 2^(k+k0-1) exactly zero: %s, resampled "
              "leak %.1e, checks %s, c=%.3e, max ratio %.6f <= %.10f, flags %ld",
              plan->k0, smallest ? "yes" : "no", support ? "yes" : "no", leak,
              checks ? "pass" : "fail", c, worst, limit, flags)};
}

Outcome criterion_decomposition() {
  const Rational h = pow2(-8);
  bool ok = true;
  std::string detail;
  for (const Rational rho : {Rational(1, 2), Rational(3, 4)}) {
    const Rational period = *rational_power(h, rho);
    const int depth = static_cast<int>(std::lround(-std::log2(to_double(period))));
    const std::size_t cap =
        static_cast<std::size_t>(std::ceil(2 * std::pow(to_double(h), to_double(rho) - 1))) + 1;
    Rational worst_nu = 1;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto x = make_random_porous(Rational(1, 10), depth, seed);
      ok = ok && check_porosity(x, {Rational(1, 10), period, 1}).status ==
                     PorosityStatus::CertifiedPorous;
      const auto d = decompose_scales(x, h, rho);
      ok = ok && d.pieces.size() <= cap;
      IntervalSet uni;
      Rational total = 0;
      for (const auto& piece : d.pieces) {
        uni = uni.unite(piece);
        total += piece.measure();
        if (piece.empty()) continue;
        const Rational nu_piece = max_porosity(piece, h, 1);
        ok = ok && nu_piece > 0 &&
             check_porosity(piece, {nu_piece, h, 1}).status == PorosityStatus::CertifiedPorous;
        worst_nu = std::min(worst_nu, nu_piece);
      }
      ok = ok && uni == x && total == x.measure();
    }
    detail += fmt("rho=%s: <= %zu pieces, min nu'=%s; ", format_rational(rho).c_str(), cap,
                  format_rational(worst_nu).c_str());
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_binary(const fs::path& config, const fs::path& out) {
  fs::remove_all(out);
  const std::string cmd = std::string(FUPLAB_BINARY) + " run --config " + config.string() +
                          " --out " + out.string() + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome criterion_cli() {
  const fs::path root = FUPLAB_TEST_SOURCE_DIR;
  const fs::path a = fs::temp_directory_path() / "fuplab_accept_a";
  const fs::path b = fs::temp_directory_path() / "fuplab_accept_b";
  int configs = 0, files = 0, mismatches = 0, golden = 0, golden_bad = 0;
  for (const auto& entry : fs::directory_iterator(root / "configs")) {
    const auto name = entry.path().stem().string();
    ++configs;
    const int ra = run_binary(entry.path(), a), rb = run_binary(entry.path(), b);
    if (ra != rb || (ra != 0 && ra != 4)) ++mismatches;
    for (const auto& f : fs::directory_iterator(a)) {
      ++files;
      if (f.path().filename() == "manifest.json") {
        auto ma = nlohmann::json::parse(slurp(f.path())), mb = nlohmann::json::parse(slurp(b / "manifest.json"));
        ma.erase("runtime");
        mb.erase("runtime");
        mismatches += ma != mb;
      } else {
        mismatches += slurp(f.path()) != slurp(b / f.path().filename());
      }
    }
    const fs::path gdir = root / "tests/golden" / name;
    if (!fs::exists(gdir)) continue;
    for (const auto& g : fs::directory_iterator(gdir)) {
      ++golden;
      golden_bad += slurp(g.path()) != slurp(a / g.path().filename());
    }
  }
  fs::remove_all(a);
  fs::remove_all(b);
  return {configs > 0 && mismatches == 0 && golden > 0 && golden_bad == 0,
          fmt("%d configs, %d files compared across runs, %d mismatches; golden %d/%d match", configs,
              files, mismatches, golden - golden_bad, golden)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"porosity certifier soundness", criterion_porosity},
      {"operator correctness", criterion_operator},
      {"decay on the Cantor set", criterion_decay},
      {"complement identity", criterion_complement},
      {"covering bound", criterion_covering},
      {"Poisson boundedness", criterion_poisson},
      {"high-frequency bound", criterion_high_frequency},
      {"harmonic measure", criterion_harmonic},
      {"mollifier and chain", criterion_chain},
      {"scale decomposition", criterion_decomposition},
      {"CLI determinism", criterion_cli},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, all[i].name,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
