#include "phaselab/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "phaselab/error.hpp"
#include "phaselab/random.hpp"

namespace phaselab::fewshot {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix label_column(const Dataset& data, std::span<const std::size_t> rows) {
  Matrix y(rows.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) y(i, 0) = data.labels[rows[i]];
  return y;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row_span(rows[i]);
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<long>(i * m.cols()));
  }
  return out;
}

}  // namespace

Adam::Adam(const TrainConfig& cfg, std::size_t size)
    : lr_(cfg.learning_rate), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.adam_eps),
      m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> param, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < param.size(); ++i) {
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * grad[i];
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * grad[i] * grad[i];
    param[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

// One Adam state per trainable tensor.
struct Trainer::State {
  State(const TrainConfig& cfg, const TrainedModel& m, std::size_t n, std::uint64_t seed)
      : b_down(cfg, m.adapter.b_down.size()),
        a_up(cfg, m.adapter.a_up.size()),
        scale(cfg, 1),
        qnn(cfg, m.adapter.qnn_angles.size()),
        head_w(cfg, m.head.w.size()),
        head_b(cfg, 1),
        shuffle_rng(make_rng(seed, streams::shuffle)),
        order(n) {
    for (const auto& s : m.adapter.stacked) stacked.emplace_back(cfg, s.size());
    std::iota(order.begin(), order.end(), 0);
  }
  Adam b_down, a_up, scale, qnn, head_w, head_b;
  std::vector<Adam> stacked;
  std::mt19937_64 shuffle_rng;
  std::vector<std::size_t> order;
};

Trainer::Trainer(const TrialConfig& config, const Dataset& train, std::uint64_t seed)
    : config_(config), train_(train) {
  const TrainConfig& tc = config.training;
  if (tc.batch_size == 0) throw ConfigError("training.batch_size must be positive");
  if (!(tc.learning_rate > 0.0)) throw ConfigError("training.learning_rate must be positive");
  const std::size_t d = train.dim();
  model_.backbone = adapters::Backbone::generate(d, d, config.backbone_seed);
  model_.adapter = adapters::init_adapter(d, d, config.adapter.r, config.adapter.alpha,
                                          config.adapter.variant, seed, config.adapter.options);
  model_.head = adapters::ClassifierHead::init(d, seed);
  state_ = std::make_unique<State>(tc, model_, train.size(), seed);
}

Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;

double Trainer::run_epoch() {
  const std::size_t batch = config_.training.batch_size;
  auto& order = state_->order;
  std::shuffle(order.begin(), order.end(), state_->shuffle_rng);
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t stop = std::min(order.size(), start + batch);
    const std::span<const std::size_t> rows(order.data() + start, stop - start);

    Tape tape;
    const Var x = tape.constant(gather_rows(train_.features, rows));
    const auto ab = adapters::bind(tape, model_.adapter, true);
    const auto hb = adapters::bind(tape, model_.head, true);
    const auto trace = adapters::record_forward(tape, x, model_.backbone, model_.adapter, ab);
    const Var logits = adapters::record_logits(tape, trace.output, hb);
    const Var total = tape.sum(tape.bce_with_logits(logits, label_column(train_, rows)));
    const Var loss = tape.scale(total, 1.0 / static_cast<double>(rows.size()));
    const double batch_loss = tape.value(loss)(0, 0);
    if (!std::isfinite(batch_loss)) throw DivergedError(epoch_);
    loss_sum += batch_loss * static_cast<double>(rows.size());

    const Gradients g = tape.backward(loss);
    auto& p = model_.adapter;
    auto& s = *state_;
    s.b_down.step(p.b_down.data(), g[ab.b_down].data());
    s.a_up.step(p.a_up.data(), g[ab.a_up].data());
    if (p.variant.kind == adapters::VariantKind::hlora) {
      s.scale.step(std::span<double>(&p.hlora_scale, 1), g[ab.hlora_scale].data());
    }
    if (p.variant.kind == adapters::VariantKind::qlora) {
      s.qnn.step(p.qnn_angles.data(), g[ab.qnn_angles].data());
    }
    for (std::size_t i = 0; i < p.stacked.size(); ++i) {
      s.stacked[i].step(p.stacked[i].data(), g[ab.stacked[i]].data());
    }
    s.head_w.step(model_.head.w.data(), g[hb.w].data());
    s.head_b.step(std::span<double>(&model_.head.b, 1), g[hb.b].data());
  }
  const double mean = order.empty() ? 0.0 : loss_sum / static_cast<double>(order.size());
  if (!std::isfinite(mean)) throw DivergedError(epoch_);
  ++epoch_;
  return mean;
}

std::vector<double> predict_logits(const TrainedModel& model, const Matrix& features) {
  Tape tape;
  const Var x = tape.constant(features);
  const auto bound = adapters::bind(tape, model.adapter, false);
  const auto trace = adapters::record_forward(tape, x, model.backbone, model.adapter, bound);
  const Var logits = adapters::record_logits(tape, trace.output, adapters::bind(tape, model.head, false));
  const auto v = tape.value(logits).data();
  return {v.begin(), v.end()};
}

TrialResult train_trial(const TrialConfig& config, const Dataset& train, const Dataset& test,
                        std::uint64_t seed, TrainedModel* model_out) {
  if (config.training.epochs < 0) throw ConfigError("training.epochs must be >= 0");
  if (train.dim() != test.dim()) throw ShapeError("train and test feature dimensions differ");

  Trainer trainer(config, train, seed);
  const Matrix frozen_w0 = trainer.model().backbone.weights();

  TrialResult result;
  result.seed = seed;
  result.adapter_params = trainer.model().adapter.trainable_count();
  result.trainable_params = result.adapter_params + trainer.model().head.trainable_count();

  for (int epoch = 0; epoch < config.training.epochs; ++epoch) {
    const auto t0 = Clock::now();
    result.loss_trace.push_back(trainer.run_epoch());
    result.epoch_seconds.push_back(seconds_since(t0));
  }
  if (!(trainer.model().backbone.weights() == frozen_w0)) {
    throw ContractError("backbone was modified in training");
  }

  const auto t0 = Clock::now();
  const std::vector<double> logits = predict_logits(trainer.model(), test.features);
  result.inference_seconds =
      seconds_since(t0) / static_cast<double>(std::max<std::size_t>(1, test.size()));
  for (double z : logits) {
    if (!std::isfinite(z)) throw DivergedError(config.training.epochs);
  }
  result.metrics = evaluate_logits(logits, test.labels);
  if (model_out) *model_out = std::move(trainer).release();
  return result;
}

}  // namespace phaselab::fewshot
