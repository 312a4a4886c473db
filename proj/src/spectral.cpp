#include "phaselab/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "phaselab/error.hpp"

namespace phaselab::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(double v, std::size_t i) {
  if (!std::isfinite(v)) {
    throw InvalidInput("non-finite value at index " + std::to_string(i));
  }
}

void radix2(std::span<Complex> a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Twiddles are evaluated directly rather than by recurrence to keep the
  // round-off at the level of a single polar() call.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> twiddle(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    twiddle[k] = std::polar(1.0, sign * 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex t = twiddle[k * stride] * a[start + k + half];
        a[start + k + half] = a[start + k] - t;
        a[start + k] += t;
      }
    }
  }
}

// Bluestein: X(k) = w(k) * sum_n [x(n) w(n)] conj(w(k-n)), w(m) = exp(-j pi m^2 / N).
void bluestein(std::span<Complex> a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;

  std::vector<Complex> chirp(n);
  for (std::size_t i = 0; i < n; ++i) {
    // i^2 mod 2N keeps the angle argument small and exact.
    const std::size_t sq = (i * i) % (2 * n);
    chirp[i] = std::polar(1.0, sign * kPi * static_cast<double>(sq) / static_cast<double>(n));
  }

  std::vector<Complex> u(m, Complex{});
  std::vector<Complex> v(m, Complex{});
  for (std::size_t i = 0; i < n; ++i) u[i] = a[i] * chirp[i];
  v[0] = std::conj(chirp[0]);
  for (std::size_t i = 1; i < n; ++i) {
    v[i] = std::conj(chirp[i]);
    v[m - i] = std::conj(chirp[i]);
  }
  radix2(u, false);
  radix2(v, false);
  for (std::size_t i = 0; i < m; ++i) u[i] *= v[i];
  radix2(u, true);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < n; ++i) a[i] = u[i] * inv_m * chirp[i];
}

// Multiplier of the standard discrete Hilbert transform at bin k.
Complex hilbert_multiplier(std::size_t k, std::size_t n) {
  if (k == 0 || 2 * k == n) return {0.0, 0.0};
  return 2 * k < n ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
}

void hilbert_row(std::span<const double> in, std::span<double> out, std::vector<Complex>& buf) {
  const std::size_t n = in.size();
  buf.assign(in.begin(), in.end());
  kernels::fft_inplace(buf, false);
  for (std::size_t k = 0; k < n; ++k) buf[k] *= hilbert_multiplier(k, n);
  kernels::fft_inplace(buf, true);
  double peak = 1.0;
  for (double v : in) peak = std::max(peak, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(buf[i].imag()) > 1e-10 * peak) {
      throw ContractError("Hilbert transform produced an imaginary residue of " +
                          std::to_string(buf[i].imag()));
    }
    out[i] = buf[i].real();
  }
}

}  // namespace

RealSeries::RealSeries(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("RealSeries must have at least one element");
  for (std::size_t i = 0; i < values_.size(); ++i) require_finite(values_[i], i);
}

ComplexSeries::ComplexSeries(std::vector<Complex> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("ComplexSeries must have at least one element");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    require_finite(values_[i].real(), i);
    require_finite(values_[i].imag(), i);
  }
}

ComplexSeries ComplexSeries::from_real(const RealSeries& x) {
  return ComplexSeries(std::vector<Complex>(x.values().begin(), x.values().end()));
}

namespace kernels {

void fft_inplace(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if (std::has_single_bit(n)) {
    radix2(data, inverse);
  } else {
    bluestein(data, inverse);
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= inv_n;
  }
}

void hilbert_rows(std::span<const double> in, std::span<double> out, std::size_t rows,
                  std::size_t n) {
  if (in.size() != rows * n || out.size() != rows * n) {
    throw ShapeError("hilbert_rows: buffer size does not match rows x n");
  }
  if (n < 2) throw InvalidInput("Hilbert transform needs at least 2 samples");
  const auto count = static_cast<long>(rows);
#pragma omp parallel if (rows * n >= 4096)
  {
    std::vector<Complex> buf;
#pragma omp for schedule(static)
    for (long r = 0; r < count; ++r) {
      const auto off = static_cast<std::size_t>(r) * n;
      hilbert_row(in.subspan(off, n), out.subspan(off, n), buf);
    }
  }
}

}  // namespace kernels

ComplexSeries dft(const ComplexSeries& x) {
  std::vector<Complex> buf(x.values().begin(), x.values().end());
  kernels::fft_inplace(buf, false);
  return ComplexSeries(std::move(buf));
}

ComplexSeries idft(const ComplexSeries& spectrum) {
  std::vector<Complex> buf(spectrum.values().begin(), spectrum.values().end());
  kernels::fft_inplace(buf, true);
  return ComplexSeries(std::move(buf));
}

RealSeries hilbert(const RealSeries& x) {
  const std::size_t n = x.size();
  if (n < 2) throw InvalidInput("Hilbert transform needs at least 2 samples");
  std::vector<double> out(n);
  std::vector<Complex> buf;
  hilbert_row(x.values(), out, buf);
  return RealSeries(std::move(out));
}

ComplexSeries hilbert_sign_flip(const RealSeries& x) {
  const std::size_t n = x.size();
  if (n < 2) throw InvalidInput("Hilbert transform needs at least 2 samples");
  std::vector<Complex> buf(x.values().begin(), x.values().end());
  kernels::fft_inplace(buf, false);
  for (std::size_t k = 0; k < n; ++k) {
    if (2 * k > n) buf[k] = -buf[k];
  }
  kernels::fft_inplace(buf, true);
  return ComplexSeries(std::move(buf));
}

std::variant<RealSeries, ComplexSeries> hilbert(const RealSeries& x, HilbertVariant variant) {
  if (variant == HilbertVariant::sign_flip) return hilbert_sign_flip(x);
  return hilbert(x);
}

ComplexSeries analytic_signal(const RealSeries& x) {
  const RealSeries h = hilbert(x);
  std::vector<Complex> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = Complex{x[i], h[i]};
  return ComplexSeries(std::move(out));
}

bool below_envelope_floor(double re, double im, double eps) {
  return guarded_envelope(re, im, eps) < std::sqrt(2.0 * eps);
}

double guarded_envelope(double re, double im, double eps) {
  return std::sqrt(re * re + im * im + eps);
}

double guarded_phase(double re, double im, double eps) {
  if (below_envelope_floor(re, im, eps)) return 0.0;
  const double p = std::atan2(im, re);
  // atan2(-0.0, negative) yields -pi; fold onto the half-open range.
  return p <= -kPi ? kPi : p;
}

EnvelopePhase envelope_and_phase(const ComplexSeries& xa, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  std::vector<double> env(xa.size());
  std::vector<double> ph(xa.size());
  for (std::size_t i = 0; i < xa.size(); ++i) {
    env[i] = guarded_envelope(xa[i].real(), xa[i].imag(), eps);
    ph[i] = guarded_phase(xa[i].real(), xa[i].imag(), eps);
  }
  return {RealSeries(std::move(env)), RealSeries(std::move(ph))};
}

}  // namespace phaselab::spectral
