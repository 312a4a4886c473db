#include "phaselab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "phaselab/error.hpp"
#include "phaselab/random.hpp"

namespace phaselab::fewshot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Modified Gram-Schmidt, applied twice for orthogonality to working precision.
Matrix random_orthogonal(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix q(d, d);
  for (double& v : q.data()) v = dist(rng);
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t prev = 0; prev < c; ++prev) {
        double dot = 0.0;
        for (std::size_t r = 0; r < d; ++r) dot += q(r, c) * q(r, prev);
        for (std::size_t r = 0; r < d; ++r) q(r, c) -= dot * q(r, prev);
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < d; ++r) norm += q(r, c) * q(r, c);
      norm = std::sqrt(norm);
      for (std::size_t r = 0; r < d; ++r) q(r, c) /= norm;
    }
  }
  return q;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out{Matrix(rows.size(), dim()), {}};
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = features.row_span(rows[i]);
    std::copy(src.begin(), src.end(), out.features.data().begin() + static_cast<long>(i * dim()));
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

void DatasetSpec::validate() const {
  if (d < 4) throw ConfigError("dataset.d must be at least 4");
  if (n_train % 2 != 0 || n_test % 2 != 0) {
    throw ConfigError("dataset.n_train and dataset.n_test must be even (balanced classes)");
  }
  if (n_test == 0) throw ConfigError("dataset.n_test must be positive");
  if (tone_indices.empty()) throw ConfigError("dataset.tone_indices must not be empty");
  for (int k : tone_indices) {
    if (k <= 0 || 2 * static_cast<std::size_t>(k) >= d) {
      throw ConfigError("tone index " + std::to_string(k) + " outside (0, d/2)");
    }
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("dataset.noise_sigma must be finite and >= 0");
  }
  if (!std::isfinite(phase_gap)) throw ConfigError("dataset.phase_gap must be finite");
}

SyntheticGenerator::SyntheticGenerator(const DatasetSpec& spec) : spec_(spec) {
  spec_.validate();
  auto rng = make_rng(spec.mixing_seed, streams::mixing);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (std::size_t j = 0; j < spec.tone_indices.size(); ++j) phases_.push_back(angle(rng));
  mixing_ = random_orthogonal(spec.d, rng);
}

std::vector<double> SyntheticGenerator::latent(int label, std::mt19937_64& rng) const {
  std::normal_distribution<double> noise(0.0, 1.0);
  const double d = static_cast<double>(spec_.d);
  std::vector<double> u(spec_.d, 0.0);
  for (std::size_t j = 0; j < spec_.tone_indices.size(); ++j) {
    const double phi = phases_[j] + (label == 1 ? spec_.phase_gap : 0.0);
    const double k = spec_.tone_indices[j];
    for (std::size_t n = 0; n < spec_.d; ++n) {
      u[n] += std::cos(kTwoPi * k * static_cast<double>(n) / d + phi);
    }
  }
  for (double& v : u) v += spec_.noise_sigma * noise(rng);
  return u;
}

Dataset SyntheticGenerator::sample(std::size_t n, std::mt19937_64& rng) const {
  Dataset out{Matrix(n, spec_.d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const std::vector<double> u = latent(label, rng);
    for (std::size_t r = 0; r < spec_.d; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < spec_.d; ++c) acc += mixing_(r, c) * u[c];
      out.features(i, r) = acc;
    }
    out.labels[i] = label;
  }
  return out;
}

Splits gen_synthetic(const DatasetSpec& spec) {
  const SyntheticGenerator gen(spec);
  auto train_rng = make_rng(spec.sample_seed, streams::train_set);
  auto test_rng = make_rng(spec.sample_seed, streams::test_set);
  Splits s;
  s.train = gen.sample(spec.n_train, train_rng);
  s.test = gen.sample(spec.n_test, test_rng);
  return s;
}

Dataset gen_train_subset(const DatasetSpec& spec, std::uint64_t trial_seed) {
  const SyntheticGenerator gen(spec);
  auto rng = make_rng(spec.sample_seed, streams::train_set ^ (trial_seed * 0x9E3779B97F4A7C15ULL));
  return gen.sample(spec.n_train, rng);
}

Dataset subsample_balanced(const Dataset& pool, std::size_t n, std::uint64_t trial_seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < pool.size(); ++i) by_class[pool.labels[i]].push_back(i);
  const std::size_t half = n / 2;
  if (by_class[0].size() < half || by_class[1].size() < half) {
    throw ConfigError("training pool has too few samples per class for n_train = " +
                      std::to_string(n));
  }
  auto rng = make_rng(trial_seed, streams::train_set);
  std::vector<std::size_t> rows;
  for (auto& idx : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    rows.insert(rows.end(), idx.begin(), idx.begin() + static_cast<long>(half));
  }
  std::sort(rows.begin(), rows.end());
  return pool.subset(rows);
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "label";
  for (std::size_t c = 0; c < data.dim(); ++c) out << ",f" << c;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i];
    for (double v : data.features.row_span(i)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = split_commas(line);
  if (trim(header[0]) != "label") throw ParseError(1, "first column must be 'label'");
  const std::size_t d = header.size() - 1;
  if (d == 0) throw ParseError(1, "no feature columns");
  for (std::size_t c = 0; c < d; ++c) {
    if (trim(header[c + 1]) != "f" + std::to_string(c)) {
      throw ParseError(1, "expected column f" + std::to_string(c));
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != d + 1) {
      throw ParseError(lineno, "expected " + std::to_string(d + 1) + " fields, found " +
                                   std::to_string(fields.size()));
    }
    const auto lab = trim(fields[0]);
    if (lab != "0" && lab != "1") throw ParseError(lineno, "label must be 0 or 1");
    labels.push_back(lab == "1" ? 1 : 0);
    for (std::size_t c = 1; c <= d; ++c) {
      const auto f = trim(fields[c]);
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw ParseError(lineno, "field " + std::to_string(c) + " is not a finite number");
      }
      values.push_back(v);
    }
  }
  const std::size_t n = labels.size();
  return Dataset{Matrix(n, d, std::move(values)), std::move(labels)};
}

}  // namespace phaselab::fewshot
