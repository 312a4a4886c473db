#pragma once

// Serial, deliberately naive implementations kept as oracles for tests,
// selftest and the kernel benchmark. None of these share code with the fast
// paths they check.

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "phaselab/matrix.hpp"

namespace phaselab::reference {

using Complex = std::complex<double>;

// O(N^2) double-loop transforms.
std::vector<Complex> naive_dft(std::span<const Complex> x);
std::vector<Complex> naive_idft(std::span<const Complex> spectrum);
// Standard Hilbert transform: naive DFT, -j/+j multiplier, naive inverse.
std::vector<double> naive_hilbert(std::span<const double> x);
// Sign-flip variant, complex output.
std::vector<Complex> naive_hilbert_sign_flip(std::span<const double> x);

// Triple loop.
Matrix naive_matmul(const Matrix& a, const Matrix& b);

// Explicit 16 x 16 unitary of the adapter circuit, built from Kronecker
// products of 2 x 2 gates and permutation/diagonal two-qubit gates.
using Dense = std::array<std::array<Complex, 16>, 16>;
Dense dense_circuit_unitary(std::span<const double> inputs, std::span<const double> params,
                            int repetitions);
std::array<double, 4> dense_circuit_expectations(std::span<const double> inputs,
                                                 std::span<const double> params, int repetitions);

// O(n^2) pair counting with 1/2 credit for ties.
double brute_auc(std::span<const double> scores, std::span<const int> labels);

struct BruteCounts {
  double acc, pr, re, f1;
};
BruteCounts brute_threshold_metrics(std::span<const double> scores, std::span<const int> labels,
                                    double threshold);

// Evaluates FPR/FNR at every candidate threshold by direct counting and
// interpolates the first sign change of FPR - FNR.
double brute_eer(std::span<const double> scores, std::span<const int> labels);

}  // namespace phaselab::reference
