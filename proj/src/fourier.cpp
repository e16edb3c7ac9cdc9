#include <limits>
#include "fuplab/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace fuplab {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct UnitaryDft::Plans {
  fftw_complex* buffer = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit Plans(std::size_t n) {
    std::lock_guard lock(planner_mutex());
    buffer = fftw_alloc_complex(n);
    if (!buffer) throw std::bad_alloc();
    const int len = static_cast<int>(n);
    fwd = fftw_plan_dft_1d(len, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(len, buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buffer);
  }
};

UnitaryDft::UnitaryDft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("UnitaryDft: length must be positive");
  plans_ = std::make_unique<Plans>(n);
}

UnitaryDft::~UnitaryDft() = default;
UnitaryDft::UnitaryDft(UnitaryDft&&) noexcept = default;
UnitaryDft& UnitaryDft::operator=(UnitaryDft&&) noexcept = default;

namespace {
void run(fftw_plan plan, fftw_complex* buffer, std::span<Complex> data) {
  const std::size_t n = data.size();
  auto* raw = reinterpret_cast<Complex*>(buffer);
  std::copy(data.begin(), data.end(), raw);
  fftw_execute(plan);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) data[i] = raw[i] * scale;
}
}  // namespace

void UnitaryDft::forward(std::span<Complex> data) {
  if (data.size() != n_) throw std::invalid_argument("UnitaryDft: length mismatch");
  run(plans_->fwd, plans_->buffer, data);
}

void UnitaryDft::inverse(std::span<Complex> data) {
  if (data.size() != n_) throw std::invalid_argument("UnitaryDft: length mismatch");
  run(plans_->bwd, plans_->buffer, data);
}

void zero_roundoff(std::span<Complex> coeffs) {
  double energy = 0;
  for (const auto& c : coeffs) energy += std::norm(c);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::log2(static_cast<double>(coeffs.size()) + 1.0) * std::sqrt(energy);
  for (auto& c : coeffs)
    if (std::abs(c) <= floor) c = 0.0;
}

}  // namespace fuplab
