#pragma once

// Exact statevector simulation of the four-qubit adapter circuit.
//
// Basis index bit (q-1) holds qubit q, so qubit 1 is the least significant
// bit. Circuit layout:
//
//   RX(input_q) on every qubit
//   repeat `repetitions` times:
//     2 x [ RY(theta) on every qubit, CZ(1,2) CZ(3,4), CZ(2,3) CZ(4,1) ]
//     RY(theta) on every qubit
//     CNOT(1->2) CNOT(2->3) CNOT(3->4)
//   read out <Z_q> for every qubit
//
// Trainable angles are ordered block by block, layer by layer, qubit 1..4.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>

#include "phaselab/matrix.hpp"

namespace phaselab::qsim {

using Complex = std::complex<double>;

inline constexpr int kQubits = 4;
inline constexpr std::size_t kDim = std::size_t{1} << kQubits;
inline constexpr int kAnglesPerBlock = 12;

class StateVector {
 public:
  // |0000>
  StateVector();
  explicit StateVector(const std::array<Complex, kDim>& amplitudes) : amp_(amplitudes) {}

  static StateVector basis(std::size_t index);

  const Complex& operator[](std::size_t i) const { return amp_[i]; }
  Complex& operator[](std::size_t i) { return amp_[i]; }
  const std::array<Complex, kDim>& amplitudes() const noexcept { return amp_; }

  double norm_squared() const noexcept;
  // <Z_q> for q = 1..4.
  double expectation_z(int qubit) const;

 private:
  std::array<Complex, kDim> amp_;
};

enum class Axis { X, Y };
enum class Entangler { CZ, CNOT };
enum class Encoding { raw, tanh_pi };

struct CircuitSpec {
  int repetitions = 2;
  Encoding encoding = Encoding::raw;

  std::size_t param_count() const noexcept {
    return static_cast<std::size_t>(repetitions) * kAnglesPerBlock;
  }

  // One block, 12 angles.
  static CircuitSpec single_block() { return {1, Encoding::raw}; }
  // Two blocks, 24 angles.
  static CircuitSpec double_block() { return {2, Encoding::raw}; }

  friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

std::string to_string(Encoding e);
Encoding parse_encoding(const std::string& s);

struct QnnOutput {
  std::array<double, kQubits> expectations{};
};

// Per-expectation gradients. d_inputs(i, k) = d<Z_i>/d input_k,
// d_params(i, p) = d<Z_i>/d theta_p.
struct QnnJacobian {
  Matrix d_inputs;  // 4 x 4
  Matrix d_params;  // 4 x P
};

StateVector apply_rotation(StateVector state, Axis axis, int qubit, double theta);
StateVector apply_entangler(StateVector state, Entangler kind, int a, int b);

void rotate_inplace(StateVector& state, Axis axis, int qubit, double theta);
void entangle_inplace(StateVector& state, Entangler kind, int a, int b);

QnnOutput run_qnn(std::span<const double> inputs, std::span<const double> params,
                  const CircuitSpec& spec);

// Two circuit runs per angle at theta +- pi/2. The shifted circuits are
// evaluated in parallel; the result does not depend on the thread count.
QnnJacobian param_shift_grad(std::span<const double> inputs, std::span<const double> params,
                             const CircuitSpec& spec);

}  // namespace phaselab::qsim
