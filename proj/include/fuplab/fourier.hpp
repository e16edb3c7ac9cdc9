#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace fuplab {

using Complex = std::complex<double>;

/// Unitary discrete Fourier transform of fixed length backed by FFTW.
///
/// forward: (F v)(j) = N^{-1/2} sum_k exp(-2 pi i jk/N) v(k); inverse is F*.
/// Each instance owns its buffers, so distinct instances may be used from
/// different threads concurrently.
class UnitaryDft {
 public:
  explicit UnitaryDft(std::size_t n);
  ~UnitaryDft();
  UnitaryDft(UnitaryDft&&) noexcept;
  UnitaryDft& operator=(UnitaryDft&&) noexcept;
  UnitaryDft(const UnitaryDft&) = delete;
  UnitaryDft& operator=(const UnitaryDft&) = delete;

  std::size_t size() const { return n_; }

  void forward(std::span<Complex> data);
  void inverse(std::span<Complex> data);

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

/// Sets to zero every entry at or below the round-off level of a length-N
/// FFT, 64 eps log2(N+1) times the l2 norm of the vector.
void zero_roundoff(std::span<Complex> coeffs);

}  // namespace fuplab
