#include "phaselab/results.hpp"

#include <charconv>
#include <algorithm>
#include <fstream>

#include "phaselab/error.hpp"

namespace phaselab::cli {

using nlohmann::json;

json trial_to_json(const fewshot::TrialResult& r) {
  json j;
  j["seed"] = r.seed;
  for (const auto& key : fewshot::kSummaryKeys) {
    if (key == "trainable_params") {
      j[key] = r.trainable_params;
    } else {
      j[key] = fewshot::summary_value(r, key);
    }
  }
  j["adapter_params"] = r.adapter_params;
  j["pr_undefined"] = r.metrics.pr_undefined;
  j["loss"] = r.loss_trace;
  return j;
}

json summary_to_json(const fewshot::ProtocolSummary& s, const json& config_echo) {
  json per_seed = json::array();
  for (const auto& r : s.per_seed) per_seed.push_back(trial_to_json(r));
  json mean = json::object();
  json std = json::object();
  for (const auto& key : fewshot::kSummaryKeys) {
    mean[key] = s.mean.at(key);
    std[key] = s.std.at(key);
  }
  return json{{"config_echo", config_echo}, {"per_seed", per_seed}, {"mean", mean}, {"std", std}};
}

json timing_to_json(const fewshot::TimingReport& r) {
  return json{{"variant", r.variant},
              {"epoch_seconds", r.epoch_seconds},
              {"inference_seconds", r.inference_seconds},
              {"timed_epochs", r.timed_epochs},
              {"inference_calls", r.inference_calls},
              {"trainable_params", r.trainable_params},
              {"adapter_params", r.adapter_params}};
}

json without_timing(const json& doc) {
  if (doc.is_object()) {
    json out = json::object();
    for (const auto& [key, value] : doc.items()) {
      bool timing = false;
      for (const auto& t : fewshot::kTimingKeys) timing = timing || key == t;
      if (!timing) out[key] = without_timing(value);
    }
    return out;
  }
  if (doc.is_array()) {
    json out = json::array();
    for (const auto& v : doc) out.push_back(without_timing(v));
    return out;
  }
  return doc;
}

namespace {

struct Tensor {
  std::string name;
  std::size_t rows, cols;
  std::span<double> values;
};

std::vector<Tensor> tensors_of(fewshot::TrainedModel& m) {
  auto& a = m.adapter;
  std::vector<Tensor> t{{"b_down", a.b_down.rows(), a.b_down.cols(), a.b_down.data()},
                        {"a_up", a.a_up.rows(), a.a_up.cols(), a.a_up.data()}};
  if (a.variant.kind == adapters::VariantKind::hlora) {
    t.push_back({"hlora_scale", 1, 1, std::span<double>(&a.hlora_scale, 1)});
  }
  if (a.variant.kind == adapters::VariantKind::qlora) {
    t.push_back({"qnn_angles", 1, a.qnn_angles.size(), a.qnn_angles.data()});
  }
  for (std::size_t i = 0; i < a.stacked.size(); ++i) {
    t.push_back({"stacked_" + std::to_string(i), a.stacked[i].rows(), a.stacked[i].cols(),
                 a.stacked[i].data()});
  }
  t.push_back({"head_w", m.head.w.rows(), m.head.w.cols(), m.head.w.data()});
  t.push_back({"head_b", 1, 1, std::span<double>(&m.head.b, 1)});
  return t;
}

}  // namespace

json model_to_json(const fewshot::TrainedModel& model) {
  fewshot::TrainedModel m = model;
  json manifest = json::array();
  std::vector<double> flat;
  for (const auto& t : tensors_of(m)) {
    manifest.push_back(json{{"name", t.name}, {"shape", {t.rows, t.cols}}, {"offset", flat.size()}});
    flat.insert(flat.end(), t.values.begin(), t.values.end());
  }
  return json{{"variant", adapters::to_string(model.adapter.variant)},
              {"r", model.adapter.r},
              {"alpha", model.adapter.alpha},
              {"backbone_seed", model.backbone.seed()},
              {"manifest", manifest},
              {"values", flat}};
}

void model_from_json(const json& doc, fewshot::TrainedModel& into) {
  try {
    const auto& manifest = doc.at("manifest");
    const auto flat = doc.at("values").get<std::vector<double>>();
    auto tensors = tensors_of(into);
    if (manifest.size() != tensors.size()) throw ConfigError("model manifest has the wrong tensor count");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const auto& entry = manifest[i];
      const auto& t = tensors[i];
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (entry.at("name").get<std::string>() != t.name || shape.size() != 2 || shape[0] != t.rows ||
          shape[1] != t.cols || offset + t.values.size() > flat.size()) {
        throw ConfigError("model manifest entry '" + t.name + "' does not match the model");
      }
      std::copy_n(flat.begin() + static_cast<long>(offset), t.values.size(), t.values.begin());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model JSON: ") + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

void write_loss_csv(const std::filesystem::path& path, std::span<const double> trace) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "epoch,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto res = std::to_chars(buf, buf + sizeof buf, trace[i], std::chars_format::general, 17);
    out << (i + 1) << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace phaselab::cli
