#include "phaselab/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>

#include <omp.h>

#include "phaselab/error.hpp"

namespace phaselab::fewshot {

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int trial_threads(std::size_t seeds) {
  int cap = static_cast<int>(seeds);
  if (const char* env = std::getenv("PHASELAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) cap = std::min(cap, v);
  }
  return std::max(cap, 1);
}

// Re-throws a trial failure with the seed in the message, keeping its type.
[[noreturn]] void rethrow_with_seed(std::exception_ptr e, std::uint64_t seed) {
  const std::string prefix = "seed " + std::to_string(seed) + ": ";
  try {
    std::rethrow_exception(e);
  } catch (const DivergedError& err) {
    throw DivergedError(err.epoch(), prefix);
  } catch (const ConfigError& err) {
    throw ConfigError(prefix + err.what());
  } catch (const IoError& err) {
    throw IoError(prefix + err.what());
  } catch (const Error& err) {
    throw Error(prefix + err.what());
  } catch (const std::exception& err) {
    throw Error(prefix + err.what());
  }
}

}  // namespace

double summary_value(const TrialResult& r, const std::string& key) {
  if (key == "auc") return r.metrics.auc;
  if (key == "acc") return r.metrics.acc;
  if (key == "pr") return r.metrics.pr;
  if (key == "re") return r.metrics.re;
  if (key == "f1") return r.metrics.f1;
  if (key == "eer") return r.metrics.eer;
  if (key == "epoch_seconds") return mean_of(r.epoch_seconds);
  if (key == "inference_seconds") return r.inference_seconds;
  if (key == "trainable_params") return static_cast<double>(r.trainable_params);
  throw InvalidInput("unknown summary key '" + key + "'");
}

ProtocolSummary summarize(std::vector<TrialResult> per_seed) {
  ProtocolSummary s;
  s.per_seed = std::move(per_seed);
  const auto n = static_cast<double>(s.per_seed.size());
  for (const auto& key : kSummaryKeys) {
    double sum = 0.0;
    for (const auto& r : s.per_seed) sum += summary_value(r, key);
    const double mean = s.per_seed.empty() ? 0.0 : sum / n;
    double ss = 0.0;
    for (const auto& r : s.per_seed) {
      const double dv = summary_value(r, key) - mean;
      ss += dv * dv;
    }
    s.mean[key] = mean;
    s.std[key] = s.per_seed.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return s;
}

Splits trial_data(const DataSource& source, std::uint64_t trial_seed) {
  Splits s;
  if (source.use_csv) {
    const Dataset pool = load_csv(source.csv_train);
    s.test = load_csv(source.csv_test);
    s.train = (source.csv_n_train == 0 || source.csv_n_train >= pool.size())
                  ? pool
                  : subsample_balanced(pool, source.csv_n_train, trial_seed);
  } else {
    DatasetSpec spec = source.synthetic;
    const std::size_t n_train = spec.n_train;
    spec.n_train = 0;
    s.test = gen_synthetic(spec).test;
    spec.n_train = n_train;
    s.train = gen_train_subset(spec, trial_seed);
  }
  return s;
}

ProtocolSummary run_protocol(const ProtocolConfig& config) {
  if (config.seeds.empty()) throw ConfigError("protocol.seeds must not be empty");
  const std::size_t n = config.seeds.size();
  std::vector<TrialResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long>(n);

#pragma omp parallel for schedule(dynamic, 1) num_threads(trial_threads(n))
  for (long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const Splits data = trial_data(config.data, config.seeds[idx]);
      results[idx] = train_trial(config.trial, data.train, data.test, config.seeds[idx]);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) rethrow_with_seed(errors[i], config.seeds[i]);
  }
  return summarize(std::move(results));
}

std::string to_string(Sweep s) {
  switch (s) {
    case Sweep::rank:
      return "rank";
    case Sweep::samples:
      return "samples";
    case Sweep::layers:
      return "layers";
  }
  return "rank";
}

Sweep parse_sweep(const std::string& s) {
  if (s == "rank") return Sweep::rank;
  if (s == "samples") return Sweep::samples;
  if (s == "layers") return Sweep::layers;
  throw ConfigError("unknown sweep '" + s + "' (expected rank, samples or layers)");
}

std::vector<AblationEntry> run_ablation(const ProtocolConfig& base, Sweep sweep) {
  using adapters::Variant;
  auto with_variant = [&](const Variant& v, int r, std::size_t n_train) {
    ProtocolConfig c = base;
    c.trial.adapter.variant = v;
    c.trial.adapter.r = r;
    if (v.kind == adapters::VariantKind::qlora) c.trial.adapter.options.qubit_tiling = true;
    if (c.data.use_csv) {
      c.data.csv_n_train = n_train;
    } else {
      c.data.synthetic.n_train = n_train;
    }
    return c;
  };
  const std::size_t base_n = base.data.use_csv ? base.data.csv_n_train : base.data.synthetic.n_train;
  const int base_r = base.trial.adapter.r;
  const std::vector<Variant> trio{Variant::lora(), Variant::hlora(), Variant::qlora()};

  std::vector<AblationEntry> out;
  auto run = [&](const Variant& v, int r, std::size_t n_train) {
    out.push_back({adapters::to_string(v), r, n_train, run_protocol(with_variant(v, r, n_train))});
  };
  switch (sweep) {
    case Sweep::rank:
      for (int r : kRankSweep) {
        for (const auto& v : trio) run(v, r, base_n);
      }
      break;
    case Sweep::samples:
      for (std::size_t n : kSampleSweep) {
        for (const auto& v : trio) run(v, base_r, n);
      }
      break;
    case Sweep::layers: {
      std::vector<Variant> vs{Variant::hlora(), Variant::lora()};
      for (int layers = 1; layers <= 5; ++layers) vs.push_back(Variant::stacked_linear(layers));
      for (auto a : {adapters::Activation::tanh, adapters::Activation::sigmoid, adapters::Activation::silu}) {
        vs.push_back(Variant::act(a));
      }
      for (const auto& v : vs) run(v, base_r, base_n);
      break;
    }
  }
  return out;
}

TimingReport bench_timing(const ProtocolConfig& config, int timed_epochs, int inference_calls) {
  using Clock = std::chrono::steady_clock;
  if (config.seeds.empty()) throw ConfigError("protocol.seeds must not be empty");
  timed_epochs = std::max(timed_epochs, 3);
  inference_calls = std::max(inference_calls, 100);
  const Splits data = trial_data(config.data, config.seeds.front());

  Trainer trainer(config.trial, data.train, config.seeds.front());
  trainer.run_epoch();  // warm-up
  std::vector<double> epochs;
  for (int i = 0; i < timed_epochs; ++i) {
    const auto t0 = Clock::now();
    trainer.run_epoch();
    epochs.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }

  std::vector<double> calls;
  volatile double sink = 0.0;
  for (int i = 0; i < inference_calls; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) % data.test.size();
    const Matrix x = Matrix::row(data.test.features.row_span(row));
    const auto t0 = Clock::now();
    sink = sink + predict_logits(trainer.model(), x).front();
    calls.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }

  TimingReport r;
  r.variant = adapters::to_string(config.trial.adapter.variant);
  r.epoch_seconds = median_of(epochs);
  r.inference_seconds = median_of(calls);
  r.timed_epochs = timed_epochs;
  r.inference_calls = inference_calls;
  r.adapter_params = trainer.model().adapter.trainable_count();
  r.trainable_params = r.adapter_params + trainer.model().head.trainable_count();
  return r;
}

}  // namespace phaselab::fewshot
