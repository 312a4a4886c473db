#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "phaselab/dataset.hpp"
#include "phaselab/error.hpp"
#include "phaselab/reference.hpp"

namespace {

using namespace phaselab;
using namespace phaselab::fewshot;
namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("phaselab_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

TEST(Synthetic, SameSpecSameData) {
  DatasetSpec spec;
  spec.n_train = 20;
  spec.n_test = 30;
  const Splits a = gen_synthetic(spec), b = gen_synthetic(spec);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train.features, a.test.features);
  spec.sample_seed = 12;
  EXPECT_NE(gen_synthetic(spec).train.features, a.train.features);
}

TEST(Synthetic, LabelsAreBalancedAndShapesMatch) {
  DatasetSpec spec;
  spec.n_train = 40;
  spec.n_test = 100;
  const Splits s = gen_synthetic(spec);
  EXPECT_EQ(s.train.size(), 40u);
  EXPECT_EQ(s.test.dim(), 64u);
  EXPECT_EQ(std::accumulate(s.train.labels.begin(), s.train.labels.end(), 0), 20);
  EXPECT_EQ(std::accumulate(s.test.labels.begin(), s.test.labels.end(), 0), 50);
}

TEST(Synthetic, MixingIsOrthogonal) {
  const SyntheticGenerator gen{DatasetSpec{}};
  const Matrix& m = gen.mixing();
  const Matrix mtm = reference::naive_matmul(m.transposed(), m);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) ASSERT_NEAR(mtm(r, c), r == c ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Synthetic, ClassesShareMagnitudeSpectrumButNotPhase) {
  DatasetSpec spec;
  spec.noise_sigma = 1.0;
  const SyntheticGenerator gen(spec);
  std::mt19937_64 rng(3);
  std::vector<double> mag[2], re[2], im[2];
  for (auto* v : {mag, re, im}) {
    for (int c = 0; c < 2; ++c) v[c].assign(spec.d, 0.0);
  }
  constexpr int samples = 1000;
  for (int i = 0; i < samples; ++i) {
    for (int c = 0; c < 2; ++c) {
      const auto u = gen.latent(c, rng);
      std::vector<reference::Complex> z(u.begin(), u.end());
      const auto spec_u = reference::naive_dft(z);
      for (std::size_t k = 0; k < spec.d; ++k) {
        mag[c][k] += std::abs(spec_u[k]) / samples;
        re[c][k] += spec_u[k].real() / samples;
        im[c][k] += spec_u[k].imag() / samples;
      }
    }
  }
  for (int k : spec.tone_indices) EXPECT_NEAR(mag[1][k], mag[0][k], 0.05 * mag[0][k]) << "tone " << k;
  // Noise-only bins of both classes sit at the Rayleigh mean sigma * sqrt(pi d) / 2.
  const double rayleigh = spec.noise_sigma * std::sqrt(std::numbers::pi * static_cast<double>(spec.d)) / 2;
  for (std::size_t k = 1; k < spec.d / 2; ++k) {
    if (std::find(spec.tone_indices.begin(), spec.tone_indices.end(), static_cast<int>(k)) !=
        spec.tone_indices.end()) {
      continue;
    }
    EXPECT_NEAR(0.5 * (mag[0][k] + mag[1][k]), rayleigh, 0.05 * rayleigh) << "bin " << k;
  }
  for (int k : spec.tone_indices) {
    const double gap = std::remainder(std::atan2(im[1][k], re[1][k]) - std::atan2(im[0][k], re[0][k]),
                                      2 * std::numbers::pi);
    EXPECT_NEAR(gap, spec.phase_gap, 0.05) << "tone " << k;
  }
}

TEST(Synthetic, InvalidSpecsAreConfigErrors) {
  DatasetSpec spec;
  spec.tone_indices = {32};
  EXPECT_THROW(gen_synthetic(spec), ConfigError);
  spec.tone_indices = {0};
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = {};
  spec.n_train = 7;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = {};
  spec.noise_sigma = -1;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = {};
  spec.d = 2;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Subsample, BalancedAndSeeded) {
  DatasetSpec spec;
  spec.n_train = 100;
  const Dataset pool = gen_synthetic(spec).train;
  const Dataset a = subsample_balanced(pool, 20, 4);
  EXPECT_EQ(a.size(), 20u);
  EXPECT_EQ(std::accumulate(a.labels.begin(), a.labels.end(), 0), 10);
  EXPECT_EQ(a, subsample_balanced(pool, 20, 4));
  EXPECT_NE(a, subsample_balanced(pool, 20, 5));
  EXPECT_THROW(subsample_balanced(pool, 120, 4), ConfigError);
}

TEST(Csv, RoundTripIsExact) {
  TempDir dir;
  DatasetSpec spec;
  spec.n_train = 10;
  spec.n_test = 4;
  const Dataset d = gen_synthetic(spec).train;
  write_csv(dir.path() / "d.csv", d);
  EXPECT_EQ(load_csv(dir.path() / "d.csv"), d);
}

TEST(Csv, SmallHandWrittenFile) {
  TempDir dir;
  write_text(dir.path() / "d.csv", "label,f0,f1\n1,0.5,-2\n0, 3e2 ,1\n");
  const Dataset d = load_csv(dir.path() / "d.csv");
  EXPECT_EQ(d.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(d.features, Matrix(2, 2, {0.5, -2, 300, 1}));
}

TEST(Csv, RaggedRowReportsItsLine) {
  TempDir dir;
  write_text(dir.path() / "d.csv", "label,f0,f1\n1,0.5,-2\n0,1\n");
  try {
    load_csv(dir.path() / "d.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Csv, BadFieldsAreParseErrors) {
  TempDir dir;
  write_text(dir.path() / "label.csv", "label,f0\n2,0.5\n");
  EXPECT_THROW(load_csv(dir.path() / "label.csv"), ParseError);
  write_text(dir.path() / "num.csv", "label,f0\n1,abc\n");
  EXPECT_THROW(load_csv(dir.path() / "num.csv"), ParseError);
  write_text(dir.path() / "nan.csv", "label,f0\n1,nan\n");
  EXPECT_THROW(load_csv(dir.path() / "nan.csv"), ParseError);
  write_text(dir.path() / "hdr.csv", "y,f0\n1,0\n");
  EXPECT_THROW(load_csv(dir.path() / "hdr.csv"), ParseError);
  write_text(dir.path() / "empty.csv", "");
  EXPECT_THROW(load_csv(dir.path() / "empty.csv"), ParseError);
}

TEST(Csv, MissingFileIsIoError) {
  EXPECT_THROW(load_csv("/nonexistent/phaselab/none.csv"), IoError);
  EXPECT_THROW(write_csv("/nonexistent/phaselab/none.csv", Dataset{Matrix(1, 1), {0}}), IoError);
}

}  // namespace
