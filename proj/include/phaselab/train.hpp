#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "phaselab/adapters.hpp"
#include "phaselab/dataset.hpp"
#include "phaselab/metrics.hpp"

namespace phaselab::fewshot {

struct TrainConfig {
  int epochs = 20;
  std::size_t batch_size = 16;
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdapterSpec {
  adapters::Variant variant;
  int r = 8;
  double alpha = 1.0;
  adapters::AdapterOptions options;

  friend bool operator==(const AdapterSpec&, const AdapterSpec&) = default;
};

struct TrialConfig {
  AdapterSpec adapter;
  TrainConfig training;
  std::uint64_t backbone_seed = 1234;

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::vector<double> loss_trace;     // mean training loss per epoch
  Metrics metrics;
  std::vector<double> epoch_seconds;  // wall time per epoch
  double inference_seconds = 0.0;     // test-set forward time per sample
  std::size_t trainable_params = 0;   // adapter + head
  std::size_t adapter_params = 0;
};

struct TrainedModel {
  adapters::Backbone backbone{Matrix()};
  adapters::AdapterParams adapter;
  adapters::ClassifierHead head;
};

class Adam;

// Owns one model and its optimizer state; run_epoch() performs one shuffled
// pass of mini-batch Adam steps and returns the mean training loss.
class Trainer {
 public:
  Trainer(const TrialConfig& config, const Dataset& train, std::uint64_t seed);
  ~Trainer();
  Trainer(Trainer&&) noexcept;

  double run_epoch();
  int epochs_run() const noexcept { return epoch_; }
  const TrainedModel& model() const noexcept { return model_; }
  TrainedModel release() && { return std::move(model_); }

 private:
  struct State;
  const TrialConfig& config_;
  const Dataset& train_;
  TrainedModel model_;
  std::unique_ptr<State> state_;
  int epoch_ = 0;
};

// Adapter + head trained with Adam on mean BCE; the backbone stays frozen.
// Initialization and shuffling derive from `seed`. Throws DivergedError.
TrialResult train_trial(const TrialConfig& config, const Dataset& train, const Dataset& test,
                        std::uint64_t seed, TrainedModel* model = nullptr);

// Logits of the trained model for every row of `data`.
std::vector<double> predict_logits(const TrainedModel& model, const Matrix& features);

// Adam state for one parameter tensor.
class Adam {
 public:
  Adam(const TrainConfig& cfg, std::size_t size);
  void step(std::span<double> param, std::span<const double> grad);

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace phaselab::fewshot
