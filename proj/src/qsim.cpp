#include "phaselab/qsim.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "phaselab/error.hpp"

namespace phaselab::qsim {

namespace {

std::size_t mask_of(int qubit) {
  if (qubit < 1 || qubit > kQubits) {
    throw IndexError("qubit index " + std::to_string(qubit) + " outside 1.." +
                     std::to_string(kQubits));
  }
  return std::size_t{1} << (qubit - 1);
}

void check_shapes(std::span<const double> inputs, std::span<const double> params,
                  const CircuitSpec& spec) {
  if (spec.repetitions < 1) throw ConfigError("circuit repetitions must be positive");
  if (inputs.size() != static_cast<std::size_t>(kQubits)) {
    throw ConfigError("circuit expects 4 input angles, got " + std::to_string(inputs.size()));
  }
  if (params.size() != spec.param_count()) {
    throw ConfigError("circuit with " + std::to_string(spec.repetitions) + " repetitions expects " +
                      std::to_string(spec.param_count()) + " angles, got " +
                      std::to_string(params.size()));
  }
}

void ry_layer(StateVector& s, const double* theta) {
  for (int q = 1; q <= kQubits; ++q) rotate_inplace(s, Axis::Y, q, theta[q - 1]);
}

void cyclic_cz(StateVector& s) {
  entangle_inplace(s, Entangler::CZ, 1, 2);
  entangle_inplace(s, Entangler::CZ, 3, 4);
  entangle_inplace(s, Entangler::CZ, 2, 3);
  entangle_inplace(s, Entangler::CZ, 4, 1);
}

QnnOutput run_unchecked(const double* inputs, const double* params, int repetitions) {
  StateVector s;
  for (int q = 1; q <= kQubits; ++q) rotate_inplace(s, Axis::X, q, inputs[q - 1]);
  for (int rep = 0; rep < repetitions; ++rep) {
    const double* block = params + rep * kAnglesPerBlock;
    ry_layer(s, block);
    cyclic_cz(s);
    ry_layer(s, block + 4);
    cyclic_cz(s);
    ry_layer(s, block + 8);
    entangle_inplace(s, Entangler::CNOT, 1, 2);
    entangle_inplace(s, Entangler::CNOT, 2, 3);
    entangle_inplace(s, Entangler::CNOT, 3, 4);
  }
  QnnOutput out;
  for (int q = 1; q <= kQubits; ++q) out.expectations[q - 1] = s.expectation_z(q);
  return out;
}

}  // namespace

StateVector::StateVector() { amp_.fill(Complex{}); amp_[0] = 1.0; }

StateVector StateVector::basis(std::size_t index) {
  if (index >= kDim) throw IndexError("basis index out of range");
  StateVector s;
  s.amp_[0] = 0.0;
  s.amp_[index] = 1.0;
  return s;
}

double StateVector::norm_squared() const noexcept {
  double acc = 0.0;
  for (const auto& a : amp_) acc += std::norm(a);
  return acc;
}

double StateVector::expectation_z(int qubit) const {
  const std::size_t m = mask_of(qubit);
  double acc = 0.0;
  for (std::size_t i = 0; i < kDim; ++i) acc += (i & m) ? -std::norm(amp_[i]) : std::norm(amp_[i]);
  return acc;
}

std::string to_string(Encoding e) { return e == Encoding::raw ? "raw" : "tanh_pi"; }

Encoding parse_encoding(const std::string& s) {
  if (s == "raw") return Encoding::raw;
  if (s == "tanh_pi") return Encoding::tanh_pi;
  throw ConfigError("unknown encoding '" + s + "' (expected raw or tanh_pi)");
}

void rotate_inplace(StateVector& state, Axis axis, int qubit, double theta) {
  const std::size_t m = mask_of(qubit);
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  for (std::size_t i = 0; i < kDim; ++i) {
    if (i & m) continue;
    const Complex a0 = state[i];
    const Complex a1 = state[i | m];
    if (axis == Axis::X) {
      // [[c, -is], [-is, c]]
      const Complex mis{0.0, -s};
      state[i] = c * a0 + mis * a1;
      state[i | m] = mis * a0 + c * a1;
    } else {
      // [[c, -s], [s, c]]
      state[i] = c * a0 - s * a1;
      state[i | m] = s * a0 + c * a1;
    }
  }
}

void entangle_inplace(StateVector& state, Entangler kind, int a, int b) {
  if (a == b) throw InvalidInput("two-qubit gate needs distinct qubits, got " + std::to_string(a) + " twice");
  const std::size_t ma = mask_of(a);
  const std::size_t mb = mask_of(b);
  if (kind == Entangler::CZ) {
    for (std::size_t i = 0; i < kDim; ++i) {
      if ((i & ma) && (i & mb)) state[i] = -state[i];
    }
  } else {
    // a controls, b is flipped.
    for (std::size_t i = 0; i < kDim; ++i) {
      if ((i & ma) && !(i & mb)) std::swap(state[i], state[i | mb]);
    }
  }
}

StateVector apply_rotation(StateVector state, Axis axis, int qubit, double theta) {
  rotate_inplace(state, axis, qubit, theta);
  return state;
}

StateVector apply_entangler(StateVector state, Entangler kind, int a, int b) {
  entangle_inplace(state, kind, a, b);
  return state;
}

QnnOutput run_qnn(std::span<const double> inputs, std::span<const double> params,
                  const CircuitSpec& spec) {
  check_shapes(inputs, params, spec);
  return run_unchecked(inputs.data(), params.data(), spec.repetitions);
}

QnnJacobian param_shift_grad(std::span<const double> inputs, std::span<const double> params,
                             const CircuitSpec& spec) {
  check_shapes(inputs, params, spec);
  const std::size_t n_in = inputs.size();
  const std::size_t n_par = params.size();
  const std::size_t n_angles = n_in + n_par;

  std::vector<QnnOutput> plus(n_angles);
  std::vector<QnnOutput> minus(n_angles);
  const auto total = static_cast<long>(2 * n_angles);
  constexpr double kShift = std::numbers::pi / 2.0;

#pragma omp parallel
  {
    std::vector<double> in(inputs.begin(), inputs.end());
    std::vector<double> par(params.begin(), params.end());
#pragma omp for schedule(static)
    for (long job = 0; job < total; ++job) {
      const auto angle = static_cast<std::size_t>(job) / 2;
      const double shift = (job % 2 == 0) ? kShift : -kShift;
      double& slot = angle < n_in ? in[angle] : par[angle - n_in];
      const double saved = slot;
      slot = saved + shift;
      const QnnOutput r = run_unchecked(in.data(), par.data(), spec.repetitions);
      slot = saved;
      (job % 2 == 0 ? plus : minus)[angle] = r;
    }
  }

  QnnJacobian jac{Matrix(kQubits, n_in), Matrix(kQubits, n_par)};
  for (std::size_t a = 0; a < n_angles; ++a) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(kQubits); ++i) {
      const double g = 0.5 * (plus[a].expectations[i] - minus[a].expectations[i]);
      if (a < n_in) {
        jac.d_inputs(i, a) = g;
      } else {
        jac.d_params(i, a - n_in) = g;
      }
    }
  }
  return jac;
}

}  // namespace phaselab::qsim
