#pragma once

// Fourier transforms and the discrete Hilbert transform / analytic signal.
//
// Conventions:
//   X(k) = sum_n x(n) exp(-j 2 pi k n / N)
//   x(n) = (1/N) sum_k X(k) exp(+j 2 pi k n / N)
// Power-of-two lengths use an iterative radix-2 kernel; every other length
// goes through Bluestein's chirp-z algorithm on a power-of-two grid.

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace phaselab::spectral {

using Complex = std::complex<double>;

inline constexpr double kDefaultEps = 1e-12;

// Non-empty sequence of finite reals.
class RealSeries {
 public:
  RealSeries() = default;
  explicit RealSeries(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// Non-empty sequence of finite complex numbers.
class ComplexSeries {
 public:
  ComplexSeries() = default;
  explicit ComplexSeries(std::vector<Complex> values);

  std::size_t size() const noexcept { return values_.size(); }
  const Complex& operator[](std::size_t i) const { return values_[i]; }
  std::span<const Complex> values() const noexcept { return values_; }

  static ComplexSeries from_real(const RealSeries& x);

 private:
  std::vector<Complex> values_;
};

struct EnvelopePhase {
  RealSeries envelope;  // >= 0
  RealSeries phase;     // principal value in (-pi, pi]
};

enum class HilbertVariant {
  standard,          // -j / +j multiplier, DC and Nyquist zeroed, real output
  sign_flip,         // plain sign flip of the upper half spectrum, complex output
};

ComplexSeries dft(const ComplexSeries& x);
ComplexSeries idft(const ComplexSeries& spectrum);

RealSeries hilbert(const RealSeries& x);
ComplexSeries hilbert_sign_flip(const RealSeries& x);
std::variant<RealSeries, ComplexSeries> hilbert(const RealSeries& x, HilbertVariant variant);

// x + j H(x). The real part is the input, bit for bit.
ComplexSeries analytic_signal(const RealSeries& x);

EnvelopePhase envelope_and_phase(const ComplexSeries& xa, double eps = kDefaultEps);

// Scalar building blocks shared with the tape so both paths agree exactly.
double guarded_envelope(double re, double im, double eps);
double guarded_phase(double re, double im, double eps);
bool below_envelope_floor(double re, double im, double eps);

namespace kernels {

// In-place transform of a buffer of any length >= 1. `inverse` applies the
// positive exponent and the 1/N factor.
void fft_inplace(std::span<Complex> data, bool inverse);

// Standard Hilbert transform applied independently to each of `rows`
// contiguous length-n rows. Rows are processed in parallel.
void hilbert_rows(std::span<const double> in, std::span<double> out, std::size_t rows,
                  std::size_t n);

}  // namespace kernels

}  // namespace phaselab::spectral
