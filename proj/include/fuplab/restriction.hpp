#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuplab/fourier.hpp"
#include "fuplab/interval_set.hpp"

namespace fuplab {

/// Uniform grid of N points on the unit torus; h = 1/N.
struct Grid {
  std::size_t size = 1;
  bool operator==(const Grid&) const = default;
};

/// Sorted, duplicate-free subset of {0, ..., N-1}.
class GridSet {
 public:
  GridSet() = default;
  GridSet(Grid grid, std::vector<std::size_t> indices);

  static GridSet full(Grid grid);

  const Grid& grid() const { return grid_; }
  std::size_t n() const { return grid_.size; }
  const std::vector<std::size_t>& indices() const& { return indices_; }
  std::vector<std::size_t> indices() && { return std::move(indices_); }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t j) const;

  /// Indicator as a 0/1 mask of length N.
  std::vector<char> mask() const;

  GridSet complement() const;
  /// Adds every index within `width` of a member, cyclically.
  GridSet fatten(std::size_t width) const;
  bool is_subset_of(const GridSet& other) const;

  bool operator==(const GridSet&) const = default;

 private:
  Grid grid_;
  std::vector<std::size_t> indices_;
};

/// Index j is kept when the open cell (j/N, (j+1)/N) meets the set; a
/// degenerate component {x} keeps the cell with j = floor(xN). Exact.
GridSet discretize(const IntervalSet& set, std::size_t n);

enum class NormMethod { Power, Dense, Lanczos };
const char* to_string(NormMethod m);

struct NormResult {
  double sigma = 0.0;
  int iterations = 0;
  double residual = 0.0;
  NormMethod method = NormMethod::Power;
};

struct PowerOptions {
  /// Stop when ||B*B v - lambda v|| <= tol * lambda.
  double tol = 1e-12;
  int max_iterations = 100000;
  /// Seeds the start-vector perturbation and the stagnation restart.
  std::uint64_t seed = 0x5eed;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, NormResult best)
      : std::runtime_error(what), best_(best) {}
  const NormResult& best_estimate() const { return best_; }

 private:
  NormResult best_;
};

/// Largest singular value of 1_X F_N 1_Y by power iteration on B*B.
/// Each application costs one FFT; the matrix is never formed.
NormResult fup_norm(const GridSet& x, const GridSet& y, const PowerOptions& opts = {});

/// Same quantity from a dense SVD of the |X| x |Y| submatrix of F_N.
NormResult fup_norm_dense(const GridSet& x, const GridSet& y);

struct SweepEntry {
  std::size_t n = 0;
  std::optional<NormResult> result;
  std::string error;  // set when result is empty
};

struct SweepResult {
  std::vector<SweepEntry> entries;
};

/// discretize + fup_norm for each N. Entries are independent; failures are
/// recorded per entry. `dense_up_to` selects the dense method for small N.
SweepResult norm_sweep(const IntervalSet& set_x, const IntervalSet& set_y,
                       const std::vector<std::size_t>& ns, const PowerOptions& opts = {},
                       std::size_t dense_up_to = 0, int threads = 1);

struct ExponentFit {
  double beta = 0.0;
  double log_c = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of log sigma = log C + beta log h with h = 1/N.
ExponentFit fit_exponent(const std::vector<std::pair<std::size_t, double>>& points);
ExponentFit fit_exponent(const SweepResult& sweep);

/// Frequency band of the admissible f: discretize(Y, N) fattened by ceil(2^k).
GridSet fattened_band(const IntervalSet& y, std::size_t n, int k);

struct LowerBound {
  double c = 0.0;
  std::size_t dimension = 0;
  NormMethod method = NormMethod::Dense;
};

/// min ||1_U f|| over unit f with DFT supported on `band`.
///
/// Dense Hermitian eigensolve of the compressed Gram matrix when the band has
/// at most `dense_limit` frequencies; above that, matrix-free Lanczos for the
/// smallest eigenvalue of P 1_U P. `opts.tol` bounds the Ritz residual and
/// `opts.max_iterations` the Krylov dimension.
LowerBound estimate_c(const GridSet& u, const GridSet& band, std::size_t dense_limit = 1500,
                      const PowerOptions& opts = {});

/// Interval-set form: U' and Y discretized on N points, band fattened by 2^k.
LowerBound estimate_c(const IntervalSet& u, const IntervalSet& y, std::size_t n, int k,
                      std::size_t dense_limit = 1500, const PowerOptions& opts = {});

/// max ||1_{complement of U} f|| over unit f with DFT supported on `band`, by
/// Lanczos on P 1_{U^c} P. Independent of estimate_c's dense route.
NormResult complement_norm(const GridSet& u, const GridSet& band, const PowerOptions& opts = {});

}  // namespace fuplab
