#pragma once

// Multi-seed evaluation protocol, ablation sweeps and the timing benchmark.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phaselab/train.hpp"

namespace phaselab::fewshot {

// Exactly one of the two sources is active.
struct DataSource {
  bool use_csv = false;
  DatasetSpec synthetic;
  std::string csv_train;
  std::string csv_test;
  std::size_t csv_n_train = 0;  // 0: use the whole training pool every trial

  friend bool operator==(const DataSource&, const DataSource&) = default;
};

struct ProtocolConfig {
  DataSource data;
  TrialConfig trial;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

// Keys aggregated over seeds, in output order.
inline const std::vector<std::string> kSummaryKeys{
    "auc", "acc", "pr", "re", "f1", "eer", "epoch_seconds", "inference_seconds", "trainable_params"};
inline const std::vector<std::string> kTimingKeys{"epoch_seconds", "inference_seconds"};

struct ProtocolSummary {
  std::vector<TrialResult> per_seed;
  std::map<std::string, double> mean;
  std::map<std::string, double> std;  // sample standard deviation, 0 for one seed
};

// Value of a summary key for one trial.
double summary_value(const TrialResult& r, const std::string& key);
ProtocolSummary summarize(std::vector<TrialResult> per_seed);

// Training set for one trial plus the fixed test set.
Splits trial_data(const DataSource& source, std::uint64_t trial_seed);

// Trials run concurrently (capped by PHASELAB_THREADS); results are collected
// in seed order. Trial errors are rethrown with the seed prepended.
ProtocolSummary run_protocol(const ProtocolConfig& config);

enum class Sweep { rank, samples, layers };
std::string to_string(Sweep s);
Sweep parse_sweep(const std::string& s);

struct AblationEntry {
  std::string variant;
  int r = 0;
  std::size_t n_train = 0;
  ProtocolSummary summary;
};

inline const std::vector<int> kRankSweep{2, 4, 6};
inline const std::vector<std::size_t> kSampleSweep{50, 100, 200, 400, 800};

// Each entry is `base` with one knob changed. Q-LoRA entries tile the
// bottleneck over 4-qubit groups when r != 4.
std::vector<AblationEntry> run_ablation(const ProtocolConfig& base, Sweep sweep);

struct TimingReport {
  std::string variant;
  double epoch_seconds = 0.0;      // median over timed epochs
  double inference_seconds = 0.0;  // median single-sample forward
  int timed_epochs = 0;
  int inference_calls = 0;
  std::size_t trainable_params = 0;
  std::size_t adapter_params = 0;
};

// One warm-up epoch, then `timed_epochs` (>= 3) timed epochs and
// `inference_calls` (>= 100) single-sample forwards. Uses the first seed.
TimingReport bench_timing(const ProtocolConfig& config, int timed_epochs = 3,
                          int inference_calls = 100);

}  // namespace phaselab::fewshot
