#include "fuplab/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fuplab/dyadic_sets.hpp"
#include "fuplab/harmonic.hpp"
#include "fuplab/iteration.hpp"
#include "fuplab/restriction.hpp"
#include "fuplab/weights.hpp"

#ifndef FUPLAB_VERSION
#define FUPLAB_VERSION "0.0.0"
#endif

namespace fuplab::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr int kSchemaVersion = 1;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Diag {
  std::vector<std::string> items;
  void add(std::string s) { items.push_back(std::move(s)); }
};

// A YAML mapping whose reads are recorded; keys never read are reported.
class Section {
 public:
  Section(YAML::Node node, std::string path, Diag& diag, json& params)
      : node_(std::move(node)), path_(std::move(path)), diag_(&diag), params_(&params) {
    if (!node_.IsMap()) diag_->add(where("") + "expected a mapping");
  }

  bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined(); }

  long integer(const std::string& key, std::optional<long> def, long lo, long hi) {
    auto v = scalar<long>(key, def);
    if (v && (*v < lo || *v > hi))
      diag_->add(where(key) + "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    if (v) (*params_)[key] = *v;
    return v.value_or(lo);
  }

  double real(const std::string& key, std::optional<double> def, double lo, double hi) {
    auto v = scalar<double>(key, def);
    if (v && !(*v >= lo && *v <= hi))
      diag_->add(where(key) + "must lie in [" + num(lo) + ", " + num(hi) + "]");
    if (v) (*params_)[key] = *v;
    return v.value_or(lo);
  }

  Rational rational(const std::string& key, std::optional<Rational> def) {
    used_.insert(key);
    const YAML::Node n = node_[key];
    Rational out = def.value_or(Rational(0));
    if (!n.IsDefined()) {
      if (!def) diag_->add(where(key) + "missing required key");
    } else if (!n.IsScalar()) {
      diag_->add(where(key) + "expected a number such as 1/10 or 0.25");
    } else {
      try {
        out = parse_rational(n.as<std::string>());
      } catch (const std::exception& e) {
        diag_->add(where(key) + e.what());
      }
    }
    (*params_)[key] = format_rational(out);
    return out;
  }

  std::string text(const std::string& key, std::optional<std::string> def,
                   const std::vector<std::string>& allowed) {
    auto v = scalar<std::string>(key, def);
    if (v && !allowed.empty() && std::find(allowed.begin(), allowed.end(), *v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      diag_->add(where(key) + "must be one of " + list);
    }
    if (v) (*params_)[key] = *v;
    return v.value_or("");
  }

  bool flag(const std::string& key, bool def) {
    auto v = scalar<bool>(key, def);
    (*params_)[key] = v.value_or(def);
    return v.value_or(def);
  }

  template <typename T>
  std::vector<T> list(const std::string& key, std::optional<std::vector<T>> def) {
    used_.insert(key);
    const YAML::Node n = node_[key];
    std::vector<T> out;
    if (!n.IsDefined()) {
      if (!def) diag_->add(where(key) + "missing required key");
      else out = *def;
    } else if (!n.IsSequence()) {
      diag_->add(where(key) + "expected a list");
    } else {
      try {
        for (const auto& item : n) out.push_back(item.as<T>());
      } catch (const YAML::Exception&) {
        diag_->add(where(key) + "list element has the wrong type");
      }
    }
    (*params_)[key] = out;
    return out;
  }

  Section child(const std::string& key) {
    used_.insert(key);
    if (!has(key)) diag_->add(where(key) + "missing required section");
    json& sub = (*params_)[key];
    if (!sub.is_object()) sub = json::object();
    return Section(has(key) ? node_[key] : YAML::Node(YAML::NodeType::Map), path_ + key + ".",
                   *diag_, sub);
  }

  void finish() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto k = kv.first.as<std::string>();
      if (!used_.count(k)) diag_->add(where(k) + "unknown key");
    }
  }

  std::string where(const std::string& key) const { return path_ + key + ": "; }
  Diag& diag() { return *diag_; }

 private:
  template <typename T>
  std::optional<T> scalar(const std::string& key, std::optional<T> def) {
    used_.insert(key);
    const YAML::Node n = node_[key];
    if (!n.IsDefined()) {
      if (!def) diag_->add(where(key) + "missing required key");
      return def;
    }
    try {
      if (!n.IsScalar()) throw YAML::Exception(YAML::Mark::null_mark(), "not a scalar");
      return n.as<T>();
    } catch (const YAML::Exception&) {
      diag_->add(where(key) + "value has the wrong type");
      return std::nullopt;
    }
  }

  YAML::Node node_;
  std::string path_;
  Diag* diag_;
  json* params_;
  std::set<std::string> used_;
};

struct SetSpec {
  std::string kind;
  CantorSpec cantor;
  Rational nu;
  int depth = 0;
  std::uint64_t seed = 0;
  std::string path;
  std::vector<Interval> intervals;
  Rational scale = 1;
  Rational shift = 0;
};

SetSpec parse_set(Section s, std::uint64_t default_seed) {
  SetSpec spec;
  spec.kind = s.text("kind", std::nullopt, {"cantor", "random", "intervals", "file"});
  if (spec.kind == "cantor") {
    spec.cantor.base = static_cast<int>(s.integer("base", 3, 2, 1000));
    spec.cantor.digits = s.list<int>("digits", std::vector<int>{0, 2});
    spec.cantor.depth = static_cast<int>(s.integer("depth", std::nullopt, 0, 64));
    const double count = std::pow(static_cast<double>(spec.cantor.digits.size()), spec.cantor.depth);
    if (count > static_cast<double>(kDefaultIntervalCap))
      s.diag().add(s.where("depth") + "set would exceed the interval cap");
    for (int d : spec.cantor.digits)
      if (d < 0 || d >= spec.cantor.base) s.diag().add(s.where("digits") + "digit out of range");
  } else if (spec.kind == "random") {
    spec.nu = s.rational("nu", std::nullopt);
    if (!(spec.nu > 0 && spec.nu < Rational(1, 4))) s.diag().add(s.where("nu") + "must lie in (0, 1/4)");
    spec.depth = static_cast<int>(s.integer("depth", std::nullopt, 1, 30));
    spec.seed = static_cast<std::uint64_t>(s.integer("seed", static_cast<long>(default_seed), 0,
                                                     std::numeric_limits<long>::max()));
  } else if (spec.kind == "intervals") {
    auto raw = s.list<std::vector<std::string>>("intervals", std::nullopt);
    for (const auto& pair : raw) {
      if (pair.size() != 2) {
        s.diag().add(s.where("intervals") + "each interval needs two endpoints");
        continue;
      }
      try {
        Interval iv{parse_rational(pair[0]), parse_rational(pair[1])};
        if (iv.hi < iv.lo) s.diag().add(s.where("intervals") + "interval with hi < lo");
        else spec.intervals.push_back(iv);
      } catch (const std::exception& e) {
        s.diag().add(s.where("intervals") + e.what());
      }
    }
  } else if (spec.kind == "file") {
    spec.path = s.text("path", std::nullopt, {});
    if (!spec.path.empty() && !fs::exists(spec.path))
      s.diag().add(s.where("path") + "file not found: " + spec.path);
  }
  spec.scale = s.rational("scale", Rational(1));
  if (!(spec.scale > 0)) s.diag().add(s.where("scale") + "must be positive");
  spec.shift = s.rational("shift", Rational(0));
  s.finish();
  return spec;
}

IntervalSet build_set(const SetSpec& spec) {
  IntervalSet base;
  if (spec.kind == "cantor") {
    base = make_cantor(spec.cantor);
  } else if (spec.kind == "random") {
    base = make_random_porous(spec.nu, spec.depth, spec.seed);
  } else if (spec.kind == "intervals") {
    base = IntervalSet(spec.intervals);
  } else {
    std::ifstream in(spec.path);
    if (!in) throw std::runtime_error("cannot open " + spec.path);
    base = read_interval_set(in);
  }
  if (spec.scale != 1) base = base.dilate(spec.scale);
  if (spec.shift != 0) base = base.translate(spec.shift);
  return base;
}

struct Context {
  fs::path out;
  int threads = 1;
  std::uint64_t seed = 0;
  json derived = json::object();
  json timings = json::object();
  std::vector<fs::path> outputs;
  int status = kSuccess;

  void write(const std::string& name, const std::string& content) {
    const fs::path p = out / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    outputs.push_back(p);
  }
};

using Runner = std::function<void(Context&)>;

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- commands -------------------------------------------------------------

Runner parse_porosity(Section& root, std::uint64_t seed) {
  SetSpec set = parse_set(root.child("set"), seed);
  PorosityParams p;
  p.nu = root.rational("nu", std::nullopt);
  p.alpha0 = root.rational("alpha0", std::nullopt);
  p.alpha1 = root.rational("alpha1", Rational(1));
  CertifierOptions opts;
  opts.max_refinements = static_cast<int>(root.integer("max_refinements", 12, 0, 40));
  if (!(p.nu > 0 && p.nu < 1)) root.diag().add(root.where("nu") + "must lie in (0, 1)");
  if (!(p.alpha0 > 0 && p.alpha0 <= p.alpha1))
    root.diag().add(root.where("alpha0") + "need 0 < alpha0 <= alpha1");
  return [=](Context& ctx) {
    const auto verdict = check_porosity(build_set(set), p, opts);
    std::string csv = "status,nu,alpha0,alpha1,margin,witness_lo,witness_hi\n";
    csv += std::string(to_string(verdict.status)) + "," + format_rational(p.nu) + "," +
           format_rational(p.alpha0) + "," + format_rational(p.alpha1) + "," +
           format_rational(verdict.margin) + "," +
           (verdict.witness ? format_rational(verdict.witness->lo) : "") + "," +
           (verdict.witness ? format_rational(verdict.witness->hi) : "") + "\n";
    ctx.write("porosity.csv", csv);
    ctx.derived["status"] = to_string(verdict.status);
    ctx.derived["nu"] = format_rational(p.nu);
    if (verdict.status != PorosityStatus::CertifiedPorous) ctx.status = kCertificationNegative;
  };
}

std::pair<SetSpec, SetSpec> parse_pair(Section& root, std::uint64_t seed) {
  if (root.has("set")) {
    SetSpec s = parse_set(root.child("set"), seed);
    return {s, s};
  }
  return {parse_set(root.child("set_x"), seed), parse_set(root.child("set_y"), seed)};
}

PowerOptions parse_power(Section& root, std::uint64_t seed) {
  PowerOptions po;
  po.tol = root.real("tol", 1e-12, 1e-15, 1e-2);
  po.max_iterations = static_cast<int>(root.integer("max_iterations", 100000, 1, 100000000));
  po.seed = seed;
  return po;
}

std::string sweep_row(std::size_t n, const NormResult& r) {
  return std::to_string(n) + "," + num(r.sigma) + "," + std::to_string(r.iterations) + "," +
         num(r.residual) + "," + to_string(r.method) + "\n";
}

const char* kSweepHeader = "N,sigma,iterations,residual,method\n";

Runner parse_norm(Section& root, std::uint64_t seed) {
  auto [sx, sy] = parse_pair(root, seed);
  const auto n = static_cast<std::size_t>(root.integer("n", std::nullopt, 1, 1L << 26));
  const std::string method = root.text("method", "power", {"power", "dense"});
  const PowerOptions po = parse_power(root, seed);
  if (method == "dense" && n > 4096)
    root.diag().add(root.where("n") + "dense method limited to N <= 4096");
  return [=](Context& ctx) {
    const auto gx = discretize(build_set(sx), n);
    const auto gy = discretize(build_set(sy), n);
    const auto r = method == "dense" ? fup_norm_dense(gx, gy) : fup_norm(gx, gy, po);
    ctx.write("norm.csv", std::string(kSweepHeader) + sweep_row(n, r));
    ctx.derived["sigma"] = r.sigma;
  };
}

Runner parse_sweep(Section& root, std::uint64_t seed) {
  auto [sx, sy] = parse_pair(root, seed);
  const auto ns_raw = root.list<long>("ns", std::nullopt);
  const auto dense_up_to = static_cast<std::size_t>(root.integer("dense_up_to", 0, 0, 4096));
  const PowerOptions po = parse_power(root, seed);
  std::vector<std::size_t> ns;
  for (std::size_t i = 0; i < ns_raw.size(); ++i) {
    if (ns_raw[i] < 1 || ns_raw[i] > (1L << 26)) root.diag().add(root.where("ns") + "N out of range");
    if (i > 0 && ns_raw[i] <= ns_raw[i - 1]) root.diag().add(root.where("ns") + "must be strictly increasing");
    ns.push_back(static_cast<std::size_t>(std::max(1L, ns_raw[i])));
  }
  return [=](Context& ctx) {
    const auto sweep = norm_sweep(build_set(sx), build_set(sy), ns, po, dense_up_to, ctx.threads);
    std::string csv = kSweepHeader, errors;
    std::vector<std::pair<std::size_t, double>> points;
    for (const auto& e : sweep.entries) {
      if (e.result) {
        csv += sweep_row(e.n, *e.result);
        points.emplace_back(e.n, e.result->sigma);
      } else {
        csv += std::to_string(e.n) + ",nan,0,nan,FAILED\n";
        errors += "# error N=" + std::to_string(e.n) + ": " + e.error + "\n";
        ctx.status = kComputationFailure;
      }
    }
    if (points.size() >= 3) {
      const auto fit = fit_exponent(points);
      csv += "# beta=" + num(fit.beta) + ",logC=" + num(fit.log_c) + ",r2=" + num(fit.r_squared) + "\n";
      ctx.derived["beta"] = fit.beta;
      ctx.derived["logC"] = fit.log_c;
      ctx.derived["r2"] = fit.r_squared;
    }
    ctx.write("sweep.csv", csv + errors);
  };
}

void check_band(Section& root, int top_level, int k0, std::size_t n) {
  if (top_level + k0 > 40 || (std::size_t{1} << (top_level + k0)) > n / 4)
    root.diag().add(root.where("k0") + "band constraint violated: 2^(k+k0) = 2^" +
                    std::to_string(top_level + k0) + " exceeds N/4 = " + std::to_string(n / 4));
}

Runner parse_holes(Section& root, std::uint64_t seed) {
  SetSpec set = parse_set(root.child("set"), seed);
  const Rational nu = root.rational("nu", std::nullopt);
  const int k = static_cast<int>(root.integer("k", std::nullopt, 0, 24));
  const int k0 = static_cast<int>(root.integer("k0", std::nullopt, 1, 30));
  const auto n = static_cast<std::size_t>(root.integer("n", std::nullopt, 4, 1L << 26));
  const int power = static_cast<int>(root.integer("kernel_power", 2, 1, 4));
  if (!(nu > 0 && nu <= 1)) root.diag().add(root.where("nu") + "must lie in (0, 1]");
  check_band(root, k, k0, n);
  return [=](Context& ctx) {
    const IntervalSet x = build_set(set);
    HoleDecomposition d;
    try {
      d = build_holes(x, k, nu);
    } catch (const PorosityViolation& e) {
      ctx.derived["violation"] = e.what();
      ctx.status = kCertificationNegative;
      ctx.write("holes.csv", "k,k0,max_on_shrunk,max_on_holes,min_on_x,passes\n");
      return;
    }
    const auto chi = build_mollifier(d, MollifierSpec{k0, power}, n);
    const auto chk = check_mollifier(chi, d, x);
    ctx.write("holes.csv", "k,k0,max_on_shrunk,max_on_holes,min_on_x,passes\n" +
                               std::to_string(k) + "," + std::to_string(k0) + "," +
                               num(chk.max_on_shrunk) + "," + num(chk.max_on_holes) + "," +
                               num(chk.min_on_x) + "," + (chk.passes ? "1" : "0") + "\n");
    ctx.write("holes.txt", serialize(d.holes.clip(0, 1)));
    ctx.derived["passes"] = chk.passes;
    if (!chk.passes) ctx.status = kCertificationNegative;
  };
}

Runner parse_chain(Section& root, std::uint64_t seed) {
  SetSpec set = parse_set(root.child("set"), seed);
  SetSpec band = parse_set(root.child("band"), seed);
  const Rational nu = root.rational("nu", std::nullopt);
  const int K = static_cast<int>(root.integer("K", std::nullopt, 0, 30));
  const auto n = static_cast<std::size_t>(root.integer("n", std::nullopt, 4, 1L << 24));
  const int k0 = static_cast<int>(root.integer("k0", 0, 0, 30));
  const int max_k0 = static_cast<int>(root.integer("max_k0", 20, 1, 30));
  const int power = static_cast<int>(root.integer("kernel_power", 2, 1, 4));
  const long functions = root.integer("functions", 10, 1, 100000);
  const auto dense_limit = static_cast<std::size_t>(root.integer("dense_limit", 1500, 1, 20000));
  if (!(nu > 0 && nu <= 1)) root.diag().add(root.where("nu") + "must lie in (0, 1]");
  if (k0 > 0) check_band(root, std::max(k0, (K + k0 - 1) / k0 * k0), k0, n);
  return [=](Context& ctx) {
    const IntervalSet x = build_set(set);
    std::optional<ChainPlan> plan;
    if (k0 > 0)
      plan = prepare_chain(x, nu, k0, K, n, power);
    else
      plan = find_k0(x, nu, K, n, power, max_k0);
    if (!plan) {
      ctx.derived["k0"] = nullptr;
      ctx.status = kCertificationNegative;
      ctx.write("chain.csv", "k,norm,ratio,bound,flag\n# no admissible k0\n");
      return;
    }
    const GridSet grid_band = discretize(build_set(band), n);
    const double c = chain_constant(*plan, grid_band, dense_limit);
    std::string csv = "k,norm,ratio,bound,flag\n";
    csv += "# k0=" + std::to_string(plan->k0) + ",K=" + std::to_string(plan->K) + ",c=" + num(c) +
           ",admissible=" + (plan->admissible() ? "1" : "0") + "\n";
    double max_ratio = 0;
    long flags = 0;
    for (long i = 0; i < functions; ++i) {
      const auto f = random_band_limited(grid_band, mix_seed(ctx.seed, static_cast<std::uint64_t>(i)));
      const auto st = run_chain(*plan, f, grid_band, c);
      csv += "# function=" + std::to_string(i) + ",input_norm=" + num(st.input_norm) +
             ",norm_on_x=" + num(st.norm_on_x) + ",final_bound=" + num(st.final_bound) + "\n";
      for (const auto& s : st.steps) {
        csv += std::to_string(s.k) + "," + num(s.norm) + "," + num(s.ratio) + "," + num(s.bound) +
               "," + (s.flag ? "1" : "0") + "\n";
        max_ratio = std::max(max_ratio, s.ratio);
        flags += s.flag;
      }
    }
    ctx.write("chain.csv", csv);
    ctx.derived["k0"] = plan->k0;
    ctx.derived["K"] = plan->K;
    ctx.derived["c"] = c;
    ctx.derived["contraction"] = std::sqrt(std::max(0.0, 1.0 - c * c / 10.0));
    ctx.derived["max_ratio"] = max_ratio;
    ctx.derived["flags"] = flags;
    if (flags > 0 || !plan->admissible()) ctx.status = kCertificationNegative;
  };
}

Runner parse_harmonic(Section& root, std::uint64_t seed) {
  const auto rs = root.list<double>("r", std::nullopt);
  const auto ts = root.list<double>("t", std::nullopt);
  const auto hole = root.list<double>("hole", std::nullopt);
  const auto context = root.list<double>("context", std::vector<double>{0.0, 1.0});
  WalkConfig wc;
  wc.walks = root.integer("walks", 100000, 1, 100000000);
  wc.shell = root.real("shell", 0.0, 0.0, 1.0);
  wc.max_steps = root.integer("max_steps", 100000, 1, 100000000);
  wc.seed = seed;
  const bool fd = root.flag("fd_check", false);
  const int degree = static_cast<int>(root.integer("subharmonic_degree", 0, 0, 4096));
  const long sub_functions = root.integer("subharmonic_functions", 0, 0, 100000);
  if (hole.size() != 2 || context.size() != 2) {
    root.diag().add(root.where("hole") + "hole and context need two endpoints each");
  } else {
    SlitStrip probe{1.0, hole[0], hole[1], context[0], context[1]};
    try {
      probe.validate();
    } catch (const std::exception& e) {
      root.diag().add(root.where("hole") + e.what());
    }
    for (double t : ts)
      if (t < context[0] || t > context[1] || (t >= hole[0] && t <= hole[1]))
        root.diag().add(root.where("t") + "start point " + num(t) + " not in I minus I'");
  }
  for (double r : rs)
    if (!(r > 0)) root.diag().add(root.where("r") + "must be positive");
  return [=](Context& ctx) {
    WalkConfig cfg = wc;
    cfg.threads = ctx.threads;
    std::string csv = "r,t,p_hat,ci95,walks,timeouts\n", fd_csv = "r,t,p_fd\n";
    std::vector<std::pair<double, double>> first_t;
    double kappa = INFINITY;
    for (double r : rs) {
      SlitStrip strip{r, hole[0], hole[1], context[0], context[1]};
      for (double t : ts) {
        const auto e = estimate_harmonic_measure(strip, t, cfg);
        csv += num(r) + "," + num(t) + "," + num(e.p_hat) + "," + num(e.ci95) + "," +
               std::to_string(e.walks_used) + "," + std::to_string(e.timeouts) + "\n";
        if (t == ts.front()) first_t.emplace_back(r, e.p_hat);
        if (r == rs.front()) kappa = std::min(kappa, e.p_hat - e.ci95);
        if (fd) fd_csv += num(r) + "," + num(t) + "," + num(fd_harmonic_measure(strip, t)) + "\n";
      }
    }
    kappa = std::max(0.0, kappa);
    ctx.derived["kappa"] = kappa;
    try {
      const auto fit = fit_kappa(first_t);
      csv += "# C_fit=" + num(fit.c) + ",intercept=" + num(fit.intercept) +
             ",bound_holds=" + (fit.bound_holds ? "1" : "0") + "\n";
      ctx.derived["C_fit"] = fit.c;
    } catch (const std::invalid_argument&) {
      ctx.derived["C_fit"] = nullptr;
    }
    ctx.write("measure.csv", csv);
    if (fd) ctx.write("fd.csv", fd_csv);
    if (sub_functions > 0) {
      SlitStrip strip{rs.front(), hole[0], hole[1], context[0], context[1]};
      std::string sub = "function,sup_context,sup_hole,sup_lines,rhs,slack\n";
      double worst = INFINITY;
      for (long i = 0; i < sub_functions; ++i) {
        const auto g = random_trig_polynomial(degree, mix_seed(ctx.seed, static_cast<std::uint64_t>(i)));
        const auto rep = check_subharmonic_bound(g, strip, kappa);
        sub += std::to_string(i) + "," + num(rep.sup_context) + "," + num(rep.sup_hole) + "," +
               num(rep.sup_lines) + "," + num(rep.rhs) + "," + num(rep.slack) + "\n";
        worst = std::min(worst, rep.slack);
      }
      ctx.write("subharmonic.csv", sub);
      ctx.derived["min_slack"] = worst;
      if (worst < 0) ctx.status = kCertificationNegative;
    }
  };
}

Runner parse_cover(Section& root, std::uint64_t seed) {
  SetSpec set = parse_set(root.child("set"), seed);
  const int K = static_cast<int>(root.integer("K", std::nullopt, 0, 40));
  const Rational nu = root.rational("nu", std::nullopt);
  if (!(nu > 0 && nu < 1)) root.diag().add(root.where("nu") + "must lie in (0, 1)");
  return [=](Context& ctx) {
    const auto theta = choose_delta(nu);
    const auto rep = cover_bands(build_set(set).dilate(pow2(K)), K, theta);
    std::string csv = "k,theta,Nk,bound\n";
    for (const auto& b : rep.bands)
      csv += std::to_string(b.k) + "," + num(b.theta) + "," + std::to_string(b.count()) + "," +
             num(rep.bound(b.k)) + "\n";
    csv += "# m=" + std::to_string(theta.m) + ",epsilon=" + num(theta.epsilon) +
           ",delta=" + num(theta.delta) + ",slope=" + (rep.slope ? num(*rep.slope) : "nan") +
           ",C=" + num(rep.c_fit) + "\n";
    ctx.write("cover.csv", csv);
    ctx.derived["m"] = theta.m;
    ctx.derived["epsilon"] = theta.epsilon;
    ctx.derived["delta"] = theta.delta;
    ctx.derived["C_fit"] = rep.c_fit;
    if (rep.slope) ctx.derived["slope"] = *rep.slope;
  };
}

Runner parse_weight(Section& root, std::uint64_t seed) {
  SetSpec set = parse_set(root.child("set"), seed);
  const int K = static_cast<int>(root.integer("K", std::nullopt, 0, 40));
  const Rational nu = root.rational("nu", std::nullopt);
  WeightOptions wo;
  wo.ramp_fraction = root.real("ramp_fraction", 1.0, 0.01, 1.0);
  wo.patch_radius = root.real("patch_radius", 32.0, 0.0, 1e6);
  wo.prefactor = root.real("prefactor", 10.0, 0.0, 1e6);
  wo.symmetric = root.flag("symmetric", true);
  if (!(nu > 0 && nu < 1)) root.diag().add(root.where("nu") + "must lie in (0, 1)");
  return [=](Context& ctx) {
    const auto theta = choose_delta(nu);
    const IntervalSet yt = build_set(set).dilate(pow2(K));
    const auto rep = cover_bands(yt, K, theta);
    const auto w = build_weight(rep, wo);
    const auto bad = check_weight(w, yt, theta);
    const double pi = poisson_integral(w);
    const double ss = surrogate_sum(rep);
    ctx.write("weight.txt", serialize_weight(w));
    ctx.write("weight.csv", "K,poisson_integral,surrogate_sum,slope_bound,check\n" +
                                std::to_string(K) + "," + num(pi) + "," + num(ss) + "," +
                                num(w.slope_bound) + "," + (bad ? "fail@" + num(*bad) : "pass") +
                                "\n");
    ctx.derived["delta"] = theta.delta;
    ctx.derived["epsilon"] = theta.epsilon;
    ctx.derived["poisson_integral"] = pi;
    ctx.derived["surrogate_sum"] = ss;
    ctx.derived["slope_bound"] = w.slope_bound;
    if (bad) ctx.status = kCertificationNegative;
  };
}

struct Parsed {
  std::string command;
  std::uint64_t seed = 0;
  json params = json::object();
  Runner runner;
};

Parsed parse_config(std::string_view text, std::optional<std::uint64_t> seed_override, Diag& diag) {
  Parsed p;
  YAML::Node root_node;
  try {
    root_node = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    diag.add(std::string("config: ") + e.what());
    return p;
  }
  if (!root_node.IsMap()) {
    diag.add("config: top level must be a mapping");
    return p;
  }
  Section root(root_node, "", diag, p.params);
  const long schema = root.integer("schema", std::nullopt, 0, 1000);
  if (schema != kSchemaVersion)
    diag.add("schema: unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  p.command = root.text("command", std::nullopt,
                        {"porosity", "norm", "sweep", "holes", "chain", "harmonic", "cover", "weight"});
  const long cfg_seed = root.integer("seed", 1, 0, std::numeric_limits<long>::max());
  p.seed = seed_override.value_or(static_cast<std::uint64_t>(cfg_seed));
  p.params["seed"] = p.seed;
  static const std::map<std::string, std::function<Runner(Section&, std::uint64_t)>> table{
      {"porosity", parse_porosity}, {"norm", parse_norm},         {"sweep", parse_sweep},
      {"holes", parse_holes},       {"chain", parse_chain},       {"harmonic", parse_harmonic},
      {"cover", parse_cover},       {"weight", parse_weight},
  };
  auto it = table.find(p.command);
  if (it != table.end()) p.runner = it->second(root, p.seed);
  root.finish();
  return p;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::vector<std::string> validate_config(std::string_view yaml_text) {
  Diag diag;
  parse_config(yaml_text, std::nullopt, diag);
  return diag.items;
}

RunResult run_config(std::string_view yaml_text, const RunOptions& opts) {
  RunResult result;
  Diag diag;
  Parsed parsed = parse_config(yaml_text, opts.seed, diag);
  if (!diag.items.empty() || !parsed.runner) {
    result.diagnostics = diag.items;
    result.exit_code = kValidationFailure;
    return result;
  }

  Context ctx;
  ctx.out = opts.out_dir;
  ctx.threads = opts.threads;
  ctx.seed = parsed.seed;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    parsed.runner(ctx);
  } catch (const PorosityViolation& e) {
    result.error = e.what();
    ctx.status = kCertificationNegative;
  } catch (const std::exception& e) {
    result.error = e.what();
    ctx.status = kComputationFailure;
  }
  ctx.timings["run_seconds"] = elapsed(t0);

  json manifest;
  manifest["version"] = FUPLAB_VERSION;
  manifest["schema"] = kSchemaVersion;
  manifest["command"] = parsed.command;
  manifest["config_hash"] = hex64(fnv1a(yaml_text));
  manifest["seed"] = parsed.seed;
  manifest["parameters"] = parsed.params;
  manifest["derived"] = ctx.derived;
  json outs = json::array();
  for (const auto& p : ctx.outputs) outs.push_back(p.filename().string());
  manifest["outputs"] = outs;
  manifest["status"] = ctx.status == kSuccess                  ? "ok"
                       : ctx.status == kCertificationNegative ? "negative"
                                                              : "failed";
  manifest["partial"] = ctx.status == kComputationFailure;
  if (!result.error.empty()) manifest["error"] = result.error;
  manifest["runtime"] = {{"threads", opts.threads}, {"timings", ctx.timings}};
  try {
    ctx.write("manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    result.error = e.what();
    ctx.status = kComputationFailure;
  }
  result.outputs = ctx.outputs;
  result.exit_code = ctx.status;
  return result;
}

}  // namespace fuplab::cli
