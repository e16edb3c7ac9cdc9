#include "fuplab/restriction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fuplab/parallel.hpp"

namespace fuplab {

GridSet::GridSet(Grid grid, std::vector<std::size_t> indices)
    : grid_(grid), indices_(std::move(indices)) {
  if (grid_.size < 1) throw std::invalid_argument("GridSet: N must be >= 1");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= grid_.size) throw std::invalid_argument("GridSet: index out of range");
    if (i > 0 && indices_[i] <= indices_[i - 1])
      throw std::invalid_argument("GridSet: indices must be strictly increasing");
  }
}

GridSet GridSet::full(Grid grid) {
  std::vector<std::size_t> all(grid.size);
  for (std::size_t j = 0; j < grid.size; ++j) all[j] = j;
  return GridSet(grid, std::move(all));
}

bool GridSet::contains(std::size_t j) const {
  return std::binary_search(indices_.begin(), indices_.end(), j);
}

std::vector<char> GridSet::mask() const {
  std::vector<char> m(grid_.size, 0);
  for (auto j : indices_) m[j] = 1;
  return m;
}

GridSet GridSet::complement() const {
  auto m = mask();
  std::vector<std::size_t> out;
  out.reserve(grid_.size - indices_.size());
  for (std::size_t j = 0; j < grid_.size; ++j)
    if (!m[j]) out.push_back(j);
  return GridSet(grid_, std::move(out));
}

GridSet GridSet::fatten(std::size_t width) const {
  const std::size_t n = grid_.size;
  if (indices_.empty() || width == 0) return *this;
  if (2 * width + 1 >= n) return full(grid_);
  std::vector<char> m(n, 0);
  for (auto j : indices_)
    for (std::size_t d = 0; d <= 2 * width; ++d) m[(j + n - width + d) % n] = 1;
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j)
    if (m[j]) out.push_back(j);
  return GridSet(grid_, std::move(out));
}

bool GridSet::is_subset_of(const GridSet& other) const {
  return grid_ == other.grid_ &&
         std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                       indices_.end());
}

GridSet discretize(const IntervalSet& set, std::size_t n) {
  if (n < 1) throw std::invalid_argument("discretize: N must be >= 1");
  const long last = static_cast<long>(n) - 1;
  const Rational scale(static_cast<unsigned long>(n));
  std::vector<char> m(n, 0);
  for (const auto& iv : set.intervals()) {
    long first, stop;
    if (iv.lo == iv.hi) {
      first = stop = floor_of(iv.lo * scale).get_si();
    } else {
      if (iv.hi <= 0 || iv.lo >= 1) continue;  // no open cell in (0,1) is met
      first = floor_of(iv.lo * scale).get_si();
      stop = ceil_of(iv.hi * scale).get_si() - 1;
    }
    first = std::clamp(first, 0L, last);
    stop = std::clamp(stop, 0L, last);
    for (long j = first; j <= stop; ++j) m[static_cast<std::size_t>(j)] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j)
    if (m[j]) out.push_back(j);
  return GridSet(Grid{n}, std::move(out));
}

const char* to_string(NormMethod m) {
  switch (m) {
    case NormMethod::Power: return "POWER";
    case NormMethod::Dense: return "DENSE";
    case NormMethod::Lanczos: return "LANCZOS";
  }
  return "?";
}

namespace {

double norm2(const std::vector<Complex>& v) {
  double s = 0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

void restrict_to(std::vector<Complex>& v, const std::vector<char>& mask) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!mask[i]) v[i] = 0;
}

// Start vector: uniform on Y plus a seeded perturbation, or purely random.
std::vector<Complex> start_vector(const GridSet& y, std::uint64_t seed, bool random_only) {
  std::vector<Complex> v(y.n(), 0);
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> gauss;
  const double bias = random_only ? 0.0 : 1.0;
  const double spread = random_only ? 1.0 : 0.1;
  for (auto j : y.indices()) v[j] = Complex(bias + spread * gauss(engine), spread * gauss(engine));
  const double s = std::sqrt(norm2(v));
  for (auto& z : v) z /= s;
  return v;
}

}  // namespace

NormResult fup_norm(const GridSet& x, const GridSet& y, const PowerOptions& opts) {
  if (!(x.grid() == y.grid())) throw std::invalid_argument("fup_norm: grids differ");
  if (!(opts.tol > 0)) throw std::invalid_argument("fup_norm: tol must be positive");
  NormResult result;
  result.method = NormMethod::Power;
  if (x.empty() || y.empty()) return result;

  const std::size_t n = x.n();
  const auto mx = x.mask();
  const auto my = y.mask();
  UnitaryDft dft(n);

  std::vector<Complex> v = start_vector(y, opts.seed, false);
  std::vector<Complex> w(n), u(n);
  bool restarted = false;
  double best_lambda = 0, best_residual = INFINITY;
  NormResult best;
  int stalled = 0;
  constexpr int kStallLimit = 2000;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    w = v;
    dft.forward(w);
    restrict_to(w, mx);
    const double lambda = norm2(w);
    u = w;
    dft.inverse(u);
    restrict_to(u, my);

    double r2 = 0;
    for (std::size_t i = 0; i < n; ++i) r2 += std::norm(u[i] - lambda * v[i]);
    const double residual = std::sqrt(r2);

    result.iterations = it;
    result.sigma = std::sqrt(lambda);
    result.residual = lambda > 0 ? residual / lambda : INFINITY;

    if (lambda > 0 && residual <= opts.tol * lambda) return result;
    if (result.sigma > best.sigma) best = result;

    // lambda reaches round-off long before the residual does when the top
    // gap is small, so a shrinking residual also counts as progress
    const bool progress = lambda > best_lambda * (1 + 1e-15) || residual < best_residual;
    best_lambda = std::max(best_lambda, lambda);
    best_residual = std::min(best_residual, residual);
    stalled = progress ? 0 : stalled + 1;
    if (lambda == 0 || stalled > kStallLimit) {
      if (restarted) break;
      restarted = true;
      stalled = 0;
      best_lambda = 0;
      best_residual = INFINITY;
      v = start_vector(y, opts.seed ^ 0x9e3779b97f4a7c15ULL, true);
      continue;
    }
    const double s = std::sqrt(norm2(u));
    for (std::size_t i = 0; i < n; ++i) v[i] = u[i] / s;
  }
  best.iterations = result.iterations;
  throw NonConvergence("fup_norm: power iteration did not converge in " +
                           std::to_string(result.iterations) + " iterations",
                       best);
}

namespace {

Eigen::MatrixXcd dft_submatrix(const GridSet& rows, const GridSet& cols) {
  const std::size_t n = rows.n();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXcd m(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const auto j = static_cast<unsigned long long>(rows.indices()[a]);
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const auto k = static_cast<unsigned long long>(cols.indices()[b]);
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) /
                           static_cast<double>(n);
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = std::polar(scale, phase);
    }
  }
  return m;
}

}  // namespace

NormResult fup_norm_dense(const GridSet& x, const GridSet& y) {
  if (!(x.grid() == y.grid())) throw std::invalid_argument("fup_norm_dense: grids differ");
  NormResult result;
  result.method = NormMethod::Dense;
  if (x.empty() || y.empty()) return result;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(dft_submatrix(x, y));
  result.sigma = svd.singularValues()(0);
  return result;
}

SweepResult norm_sweep(const IntervalSet& set_x, const IntervalSet& set_y,
                       const std::vector<std::size_t>& ns, const PowerOptions& opts,
                       std::size_t dense_up_to, int threads) {
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] <= ns[i - 1]) throw std::invalid_argument("norm_sweep: Ns must be increasing");
  SweepResult sweep;
  sweep.entries.resize(ns.size());
  parallel_for(ns.size(), threads, [&](std::size_t i) {
    SweepEntry& e = sweep.entries[i];
    e.n = ns[i];
    try {
      GridSet gx = discretize(set_x, ns[i]);
      GridSet gy = discretize(set_y, ns[i]);
      e.result = ns[i] <= dense_up_to ? fup_norm_dense(gx, gy) : fup_norm(gx, gy, opts);
    } catch (const NonConvergence& err) {
      e.error = err.what();
    } catch (const std::exception& err) {
      e.error = err.what();
    }
  });
  return sweep;
}

ExponentFit fit_exponent(const std::vector<std::pair<std::size_t, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_exponent: need at least 3 points");
  const double count = static_cast<double>(points.size());
  double mx = 0, my = 0;
  std::vector<double> xs, ys;
  for (const auto& [n, sigma] : points) {
    if (!(sigma > 0)) throw std::invalid_argument("fit_exponent: sigma must be positive");
    xs.push_back(-std::log(static_cast<double>(n)));
    ys.push_back(std::log(sigma));
    mx += xs.back();
    my += ys.back();
  }
  mx /= count;
  my /= count;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_exponent: N values must not all coincide");
  ExponentFit fit;
  fit.beta = sxy / sxx;
  fit.log_c = my - fit.beta * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.log_c + fit.beta * xs[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy <= 1e-300 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

ExponentFit fit_exponent(const SweepResult& sweep) {
  std::vector<std::pair<std::size_t, double>> points;
  for (const auto& e : sweep.entries)
    if (e.result) points.emplace_back(e.n, e.result->sigma);
  return fit_exponent(points);
}

GridSet fattened_band(const IntervalSet& y, std::size_t n, int k) {
  if (k < 0) throw std::invalid_argument("fattened_band: k must be >= 0");
  const std::size_t width = std::size_t{1} << k;
  return discretize(y, n).fatten(width);
}

namespace {

// v -> P M P v in band coordinates: place v on the band frequencies, go to
// space, multiply by the 0/1 mask, come back and read off the band.
class BandOperator {
 public:
  BandOperator(const GridSet& band, std::vector<char> mask)
      : band_(band), mask_(std::move(mask)), dft_(band.n()), buf_(band.n()) {}

  std::size_t dim() const { return band_.size(); }

  void apply(const std::vector<Complex>& in, std::vector<Complex>& out) {
    std::fill(buf_.begin(), buf_.end(), Complex(0));
    const auto& s = band_.indices();
    for (std::size_t a = 0; a < s.size(); ++a) buf_[s[a]] = in[a];
    dft_.inverse(buf_);
    restrict_to(buf_, mask_);
    dft_.forward(buf_);
    out.resize(s.size());
    for (std::size_t a = 0; a < s.size(); ++a) out[a] = buf_[s[a]];
  }

 private:
  const GridSet& band_;
  std::vector<char> mask_;
  UnitaryDft dft_;
  std::vector<Complex> buf_;
};

Complex dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  Complex s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

struct Extreme {
  double value = 0.0;
  double residual = 0.0;
  int steps = 0;
};

// Extreme eigenvalue of a Hermitian operator with spectrum in [0, 1] by
// Lanczos with full reorthogonalization. Stops when the Ritz residual
// beta_j |y_j| drops below tol, or when the Krylov space is exhausted.
Extreme lanczos(BandOperator& op, bool largest, double tol, int max_steps, std::uint64_t seed) {
  const std::size_t m = op.dim();
  const int cap = static_cast<int>(std::min<std::size_t>(m, static_cast<std::size_t>(max_steps)));
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> gauss;
  std::vector<Complex> q(m);
  for (auto& z : q) z = Complex(gauss(engine), gauss(engine));
  double nq = std::sqrt(norm2(q));
  for (auto& z : q) z /= nq;

  std::vector<std::vector<Complex>> basis;
  std::vector<double> alpha, beta;
  std::vector<Complex> w;
  Extreme best;
  for (int j = 0; j < cap; ++j) {
    basis.push_back(q);
    op.apply(q, w);
    alpha.push_back(dot(q, w).real());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const Complex h = dot(b, w);
        for (std::size_t i = 0; i < m; ++i) w[i] -= h * b[i];
      }
    const double bj = std::sqrt(norm2(w));

    const auto dimj = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), dimj);
    Eigen::VectorXd sub(std::max<Eigen::Index>(dimj - 1, 0));
    for (Eigen::Index i = 0; i + 1 < dimj; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::Index pick = largest ? dimj - 1 : 0;
    best.value = tri.eigenvalues()(pick);
    best.residual = bj * std::fabs(tri.eigenvectors()(dimj - 1, pick));
    best.steps = j + 1;
    if (best.residual <= tol || bj <= 1e-14 || j + 1 == static_cast<int>(m)) return best;

    beta.push_back(bj);
    for (std::size_t i = 0; i < m; ++i) q[i] = w[i] / bj;
  }
  throw NonConvergence("lanczos: no convergence in " + std::to_string(best.steps) + " steps",
                       NormResult{std::sqrt(std::max(0.0, best.value)), best.steps, best.residual,
                                  NormMethod::Lanczos});
}

}  // namespace

NormResult complement_norm(const GridSet& u, const GridSet& band, const PowerOptions& opts) {
  if (!(u.grid() == band.grid())) throw std::invalid_argument("complement_norm: grids differ");
  NormResult out;
  out.method = NormMethod::Lanczos;
  if (band.empty()) return out;
  auto mask = u.complement().mask();
  BandOperator op(band, std::move(mask));
  const auto e = lanczos(op, true, opts.tol, opts.max_iterations, opts.seed);
  out.sigma = std::sqrt(std::clamp(e.value, 0.0, 1.0));
  out.iterations = e.steps;
  out.residual = e.residual;
  return out;
}

LowerBound estimate_c(const GridSet& u, const GridSet& band, std::size_t dense_limit,
                      const PowerOptions& opts) {
  if (!(u.grid() == band.grid())) throw std::invalid_argument("estimate_c: grids differ");
  if (band.empty()) throw std::invalid_argument("estimate_c: empty frequency band");
  LowerBound out;
  out.dimension = band.size();
  const std::size_t n = u.n();

  if (band.size() > dense_limit) {
    BandOperator op(band, u.mask());
    const auto e = lanczos(op, false, opts.tol, opts.max_iterations, opts.seed);
    out.method = NormMethod::Lanczos;
    out.c = std::sqrt(std::clamp(e.value, 0.0, 1.0));
    return out;
  }

  // Gram matrix G(a,b) = (1/N) sum_{x in U} exp(2 pi i x (b - a) / N).
  std::vector<Complex> d(n, 0);
  for (auto x : u.indices()) d[x] = 1;
  UnitaryDft dft(n);
  dft.inverse(d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const auto& s = band.indices();
  const auto dim = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXcd g(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b)
      g(a, b) = d[(s[static_cast<std::size_t>(b)] + n - s[static_cast<std::size_t>(a)]) % n] *
                scale;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(g, Eigen::EigenvaluesOnly);
  out.method = NormMethod::Dense;
  out.c = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
  return out;
}

LowerBound estimate_c(const IntervalSet& u, const IntervalSet& y, std::size_t n, int k,
                      std::size_t dense_limit, const PowerOptions& opts) {
  if (n < 4) throw std::invalid_argument("estimate_c: N must be >= 4");
  return estimate_c(discretize(u, n), fattened_band(y, n, k), dense_limit, opts);
}

}  // namespace fuplab
