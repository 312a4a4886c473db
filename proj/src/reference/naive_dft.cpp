#include <cmath>
#include <numbers>

#include "phaselab/reference.hpp"

namespace phaselab::reference {

namespace {

std::vector<Complex> naive_transform(std::span<const Complex> x, double sign) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc{};
    for (std::size_t j = 0; j < n; ++j) {
      // (k*j) mod n keeps the angle in [0, 2 pi).
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * j) % n) /
                           static_cast<double>(n);
      acc += x[j] * Complex{std::cos(angle), std::sin(angle)};
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

std::vector<Complex> naive_dft(std::span<const Complex> x) { return naive_transform(x, -1.0); }

std::vector<Complex> naive_idft(std::span<const Complex> spectrum) {
  auto out = naive_transform(spectrum, 1.0);
  for (auto& v : out) v /= static_cast<double>(spectrum.size());
  return out;
}

std::vector<double> naive_hilbert(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<Complex> spec = naive_dft(std::vector<Complex>(x.begin(), x.end()));
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || 2 * k == n) {
      spec[k] = 0.0;
    } else if (2 * k < n) {
      spec[k] *= Complex{0.0, -1.0};
    } else {
      spec[k] *= Complex{0.0, 1.0};
    }
  }
  const auto back = naive_idft(spec);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = back[i].real();
  return out;
}

std::vector<Complex> naive_hilbert_sign_flip(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<Complex> spec = naive_dft(std::vector<Complex>(x.begin(), x.end()));
  for (std::size_t k = 0; k < n; ++k) {
    if (2 * k > n) spec[k] = -spec[k];
  }
  return naive_idft(spec);
}

}  // namespace phaselab::reference
