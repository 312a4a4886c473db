#include "phaselab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "phaselab/error.hpp"

namespace phaselab::cli {

using nlohmann::json;

namespace {

// Strict view of one JSON object: every key must be consumed by a getter
// before finish(), so misspelled keys surface as errors.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config key '" + path_ + "': expected object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) type_error(key, "boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) type_error(key, "non-negative integer");
      out = v.get<T>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) type_error(key, "integer");
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) type_error(key, "number");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) type_error(key, "string");
      out = v.get<std::string>();
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

  template <class T>
  void get_list(const std::string& key, std::vector<T>& out, const char* element) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) type_error(key, std::string("array of ") + element);
    std::vector<T> tmp;
    for (const auto& e : v) {
      if constexpr (std::is_unsigned_v<T>) {
        if (!e.is_number_unsigned()) type_error(key, std::string("array of ") + element);
      } else {
        if (!e.is_number_integer()) type_error(key, std::string("array of ") + element);
      }
      tmp.push_back(e.get<T>());
    }
    out = std::move(tmp);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(has(key) ? j_.at(key) : empty, key_path(key));
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + key_path(key) + "'");
    }
  }

 private:
  [[noreturn]] void type_error(const std::string& key, const std::string& expected) const {
    throw ConfigError("config key '" + key_path(key) + "': expected " + expected);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

int preset_repetitions(const std::string& preset) {
  if (preset == "table3") return qsim::CircuitSpec::double_block().repetitions;
  if (preset == "paper-literal") return qsim::CircuitSpec::single_block().repetitions;
  throw ConfigError("config key 'adapter.qnn.preset': expected table3, paper-literal or custom");
}

std::string preset_name(const qsim::CircuitSpec& spec) {
  if (spec.repetitions == qsim::CircuitSpec::double_block().repetitions) return "table3";
  if (spec.repetitions == qsim::CircuitSpec::single_block().repetitions) return "paper-literal";
  return "custom";
}

}  // namespace

json to_json(const qsim::CircuitSpec& spec) {
  return json{{"repetitions", spec.repetitions}, {"encoding", qsim::to_string(spec.encoding)}};
}

qsim::CircuitSpec circuit_from_json(const json& j) {
  Section s(j, "qnn");
  qsim::CircuitSpec spec;
  std::string enc = "raw";
  s.get("repetitions", spec.repetitions);
  s.get("encoding", enc);
  s.finish();
  spec.encoding = qsim::parse_encoding(enc);
  if (spec.repetitions < 1) throw ConfigError("config key 'qnn.repetitions': must be >= 1");
  return spec;
}

ExperimentConfig parse_config_json(const json& doc) {
  ExperimentConfig cfg;
  auto& pc = cfg.protocol;
  Section root(doc, "");

  {
    Section ds = root.child("dataset");
    auto& spec = pc.data.synthetic;
    const bool csv = ds.has("csv_train") || ds.has("csv_test");
    if (csv) {
      for (const char* k : {"d", "n_test", "tone_indices", "phase_gap", "noise_sigma", "mixing_seed", "sample_seed"}) {
        if (ds.has(k)) {
          throw ConfigError("config key 'dataset." + std::string(k) +
                            "' conflicts with csv input: exactly one dataset source is allowed");
        }
      }
      pc.data.use_csv = true;
      ds.get("csv_train", pc.data.csv_train);
      ds.get("csv_test", pc.data.csv_test);
      if (pc.data.csv_train.empty() || pc.data.csv_test.empty()) {
        throw ConfigError("config keys 'dataset.csv_train' and 'dataset.csv_test' must both be set");
      }
      ds.get("n_train", pc.data.csv_n_train);
      if (pc.data.csv_n_train % 2 != 0) throw ConfigError("config key 'dataset.n_train': must be even");
    } else {
      ds.get("csv_train", pc.data.csv_train);
      ds.get("csv_test", pc.data.csv_test);
      ds.get("d", spec.d);
      ds.get("n_train", spec.n_train);
      ds.get("n_test", spec.n_test);
      ds.get_list("tone_indices", spec.tone_indices, "integers");
      ds.get("phase_gap", spec.phase_gap);
      ds.get("noise_sigma", spec.noise_sigma);
      ds.get("mixing_seed", spec.mixing_seed);
      ds.get("sample_seed", spec.sample_seed);
      spec.validate();
    }
    ds.finish();
  }

  {
    Section bb = root.child("backbone");
    bb.get("seed", pc.trial.backbone_seed);
    bb.finish();
  }

  {
    Section ad = root.child("adapter");
    auto& a = pc.trial.adapter;
    std::string variant = "lora";
    std::string axis = "bottleneck";
    ad.get("variant", variant);
    ad.get("r", a.r);
    ad.get("alpha", a.alpha);
    ad.get("hilbert_axis", axis);
    ad.get("residual", a.options.qlora_residual);
    ad.get("qubit_tiling", a.options.qubit_tiling);
    a.variant = adapters::parse_variant(variant);
    a.options.hilbert_axis = adapters::parse_axis(axis);
    if (a.r < 1) throw ConfigError("config key 'adapter.r': must be >= 1");

    Section q = ad.child("qnn");
    std::string preset = "table3";
    std::string enc = "raw";
    int reps = 0;
    q.get("preset", preset);
    q.get("encoding", enc);
    q.get("repetitions", reps);
    q.finish();
    if (preset == "custom") {
      if (reps < 1) throw ConfigError("config key 'adapter.qnn.repetitions': must be >= 1 for the custom preset");
      a.options.qnn.repetitions = reps;
    } else {
      a.options.qnn.repetitions = preset_repetitions(preset);
      if (reps != 0 && reps != a.options.qnn.repetitions) {
        throw ConfigError("config key 'adapter.qnn.repetitions': conflicts with preset '" + preset + "'");
      }
    }
    a.options.qnn.encoding = qsim::parse_encoding(enc);
    ad.finish();
  }

  {
    Section tr = root.child("training");
    auto& t = pc.trial.training;
    tr.get("epochs", t.epochs);
    tr.get("batch_size", t.batch_size);
    tr.get("learning_rate", t.learning_rate);
    tr.get("beta1", t.beta1);
    tr.get("beta2", t.beta2);
    tr.get("adam_eps", t.adam_eps);
    tr.finish();
    if (t.epochs < 0) throw ConfigError("config key 'training.epochs': must be >= 0");
    if (t.batch_size == 0) throw ConfigError("config key 'training.batch_size': must be positive");
    if (!(t.learning_rate > 0.0)) throw ConfigError("config key 'training.learning_rate': must be positive");
  }

  {
    Section pr = root.child("protocol");
    pr.get_list("seeds", pc.seeds, "non-negative integers");
    pr.finish();
    if (pc.seeds.empty()) throw ConfigError("config key 'protocol.seeds': must not be empty");
  }

  root.get("output", cfg.output_dir);
  root.finish();
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  ExperimentConfig cfg = parse_config_json(doc);
  if (cfg.protocol.data.use_csv) {
    for (const auto& p : {cfg.protocol.data.csv_train, cfg.protocol.data.csv_test}) {
      if (!std::filesystem::exists(p)) throw IoError("dataset file not found: " + p);
    }
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& pc = cfg.protocol;
  json ds;
  if (pc.data.use_csv) {
    ds = {{"csv_train", pc.data.csv_train}, {"csv_test", pc.data.csv_test}, {"n_train", pc.data.csv_n_train}};
  } else {
    const auto& s = pc.data.synthetic;
    ds = {{"d", s.d},
          {"n_train", s.n_train},
          {"n_test", s.n_test},
          {"tone_indices", s.tone_indices},
          {"phase_gap", s.phase_gap},
          {"noise_sigma", s.noise_sigma},
          {"mixing_seed", s.mixing_seed},
          {"sample_seed", s.sample_seed}};
  }
  const auto& a = pc.trial.adapter;
  json qnn = to_json(a.options.qnn);
  qnn["preset"] = preset_name(a.options.qnn);
  const auto& t = pc.trial.training;
  return json{{"dataset", ds},
              {"backbone", {{"seed", pc.trial.backbone_seed}}},
              {"adapter",
               {{"variant", adapters::to_string(a.variant)},
                {"r", a.r},
                {"alpha", a.alpha},
                {"hilbert_axis", adapters::to_string(a.options.hilbert_axis)},
                {"residual", a.options.qlora_residual},
                {"qubit_tiling", a.options.qubit_tiling},
                {"qnn", qnn}}},
              {"training",
               {{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"learning_rate", t.learning_rate},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"adam_eps", t.adam_eps}}},
              {"protocol", {{"seeds", pc.seeds}}},
              {"output", cfg.output_dir}};
}

std::string config_reference() {
  return R"(Configuration file (JSON). Unknown keys are rejected. Defaults:
  dataset.d             64        feature dimension (synthetic)
  dataset.n_train       200       training samples per trial (even)
  dataset.n_test        1000      fixed test samples (even)
  dataset.tone_indices  [3,7,11]  tone frequency indices, each in (0, d/2)
  dataset.phase_gap     0.8       class-1 phase offset in radians
  dataset.noise_sigma   0.3       latent Gaussian noise
  dataset.mixing_seed   7         seeds tone phases and the orthogonal mixing
  dataset.sample_seed   11        seeds sample draws
  dataset.csv_train/csv_test      CSV files (label,f0,...) instead of synthetic
                                  data; n_train then subsamples the pool (0 = all)
  backbone.seed         1234      frozen d x d backbone
  adapter.variant       lora      lora | hlora | qlora | act:<identity|tanh|sigmoid|silu>
                                  | stacked_linear:<n>
  adapter.r             8         rank
  adapter.alpha         1.0       scaling (alpha / r)
  adapter.hilbert_axis  bottleneck  bottleneck | input_feature
  adapter.residual      false     Q-LoRA adds x_l to the measurements
  adapter.qubit_tiling  false     Q-LoRA with r != 4 via 4-qubit tiles
  adapter.qnn.preset    table3    table3 (24 angles) | paper-literal (12) | custom
  adapter.qnn.repetitions         only with preset custom
  adapter.qnn.encoding  raw       raw | tanh_pi
  training.epochs       20
  training.batch_size   16
  training.learning_rate 5e-4
  training.beta1        0.9
  training.beta2        0.999
  training.adam_eps     1e-8
  protocol.seeds        [0..9]
  output                results   output directory
Environment: PHASELAB_THREADS caps concurrent trials (default: number of seeds).
)";
}

}  // namespace phaselab::cli
