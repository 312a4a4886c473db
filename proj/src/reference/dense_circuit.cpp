#include <cmath>

#include "phaselab/reference.hpp"

namespace phaselab::reference {

namespace {

using Gate2 = std::array<std::array<Complex, 2>, 2>;

Dense identity16() {
  Dense m{};
  for (std::size_t i = 0; i < 16; ++i) m[i][i] = 1.0;
  return m;
}

Dense multiply(const Dense& a, const Dense& b) {
  Dense out{};
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) {
      Complex acc{};
      for (std::size_t k = 0; k < 16; ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  }
  return out;
}

// Kronecker product over qubits 4 (most significant) .. 1 (least significant),
// with `g` on `qubit` and identity elsewhere.
Dense embed(const Gate2& g, int qubit) {
  Dense out{};
  for (std::size_t row = 0; row < 16; ++row) {
    for (std::size_t col = 0; col < 16; ++col) {
      Complex v = 1.0;
      for (int q = 1; q <= 4; ++q) {
        const std::size_t rb = (row >> (q - 1)) & 1U;
        const std::size_t cb = (col >> (q - 1)) & 1U;
        if (q == qubit) {
          v *= g[rb][cb];
        } else if (rb != cb) {
          v = 0.0;
        }
      }
      out[row][col] = v;
    }
  }
  return out;
}

Gate2 rx(double t) {
  const double c = std::cos(t / 2), s = std::sin(t / 2);
  return {{{Complex{c, 0}, Complex{0, -s}}, {Complex{0, -s}, Complex{c, 0}}}};
}

Gate2 ry(double t) {
  const double c = std::cos(t / 2), s = std::sin(t / 2);
  return {{{Complex{c, 0}, Complex{-s, 0}}, {Complex{s, 0}, Complex{c, 0}}}};
}

Dense cz(int a, int b) {
  Dense m{};
  for (std::size_t i = 0; i < 16; ++i) {
    const bool both = ((i >> (a - 1)) & 1U) && ((i >> (b - 1)) & 1U);
    m[i][i] = both ? -1.0 : 1.0;
  }
  return m;
}

Dense cnot(int control, int target) {
  Dense m{};
  for (std::size_t col = 0; col < 16; ++col) {
    std::size_t row = col;
    if ((col >> (control - 1)) & 1U) row ^= std::size_t{1} << (target - 1);
    m[row][col] = 1.0;
  }
  return m;
}

}  // namespace

Dense dense_circuit_unitary(std::span<const double> inputs, std::span<const double> params,
                            int repetitions) {
  // Gates are listed in time order; U = G_last ... G_first.
  std::vector<Dense> gates;
  for (int q = 1; q <= 4; ++q) gates.push_back(embed(rx(inputs[q - 1]), q));
  std::size_t p = 0;
  for (int rep = 0; rep < repetitions; ++rep) {
    for (int layer = 0; layer < 2; ++layer) {
      for (int q = 1; q <= 4; ++q) gates.push_back(embed(ry(params[p++]), q));
      gates.push_back(cz(1, 2));
      gates.push_back(cz(3, 4));
      gates.push_back(cz(2, 3));
      gates.push_back(cz(4, 1));
    }
    for (int q = 1; q <= 4; ++q) gates.push_back(embed(ry(params[p++]), q));
    gates.push_back(cnot(1, 2));
    gates.push_back(cnot(2, 3));
    gates.push_back(cnot(3, 4));
  }
  Dense u = identity16();
  for (const auto& g : gates) u = multiply(g, u);
  return u;
}

std::array<double, 4> dense_circuit_expectations(std::span<const double> inputs,
                                                 std::span<const double> params, int repetitions) {
  const Dense u = dense_circuit_unitary(inputs, params, repetitions);
  std::array<double, 4> z{};
  for (std::size_t i = 0; i < 16; ++i) {
    const double prob = std::norm(u[i][0]);  // column 0 = U|0000>
    for (int q = 1; q <= 4; ++q) z[q - 1] += ((i >> (q - 1)) & 1U) ? -prob : prob;
  }
  return z;
}

}  // namespace phaselab::reference
