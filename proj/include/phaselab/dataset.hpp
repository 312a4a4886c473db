#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "phaselab/matrix.hpp"

namespace phaselab::fewshot {

struct Dataset {
  Matrix features;          // n x d
  std::vector<int> labels;  // 0 or 1

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  Dataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Binary task whose classes share an amplitude spectrum and differ only in the
// phase offsets of a few tones. Latent u[n] = sum_j cos(2 pi k_j n / d + phi_cj)
// + N(0, sigma^2); features are x = M u for a seeded orthogonal M.
struct DatasetSpec {
  std::size_t d = 64;
  std::size_t n_train = 200;
  std::size_t n_test = 1000;
  std::vector<int> tone_indices{3, 7, 11};
  double phase_gap = 0.8;
  double noise_sigma = 0.3;
  std::uint64_t mixing_seed = 7;
  std::uint64_t sample_seed = 11;

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(const DatasetSpec& spec);

  std::vector<double> latent(int label, std::mt19937_64& rng) const;
  // n samples, labels alternating 0,1,0,1,...
  Dataset sample(std::size_t n, std::mt19937_64& rng) const;

  const Matrix& mixing() const noexcept { return mixing_; }
  std::span<const double> base_phases() const noexcept { return phases_; }

 private:
  DatasetSpec spec_;
  std::vector<double> phases_;
  Matrix mixing_;
};

struct Splits {
  Dataset train;
  Dataset test;
};

// Train split from the sample seed, test split from an independent stream.
Splits gen_synthetic(const DatasetSpec& spec);
// Fresh training subset for one protocol trial; the test split stays fixed.
Dataset gen_train_subset(const DatasetSpec& spec, std::uint64_t trial_seed);
// Balanced draw of n rows (n/2 per class) without replacement.
Dataset subsample_balanced(const Dataset& pool, std::size_t n, std::uint64_t trial_seed);

// Header `label,f0,...,f{d-1}`, 17 significant digits.
void write_csv(const std::filesystem::path& path, const Dataset& data);
// Throws IoError / ParseError (with the 1-based line number).
Dataset load_csv(const std::filesystem::path& path);

}  // namespace phaselab::fewshot
