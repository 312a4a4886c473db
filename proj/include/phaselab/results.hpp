#pragma once

// Results JSON and loss-trace CSV emission.

#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"

#include "phaselab/protocol.hpp"

namespace phaselab::cli {

nlohmann::json trial_to_json(const fewshot::TrialResult& r);
// {config_echo, per_seed, mean, std}
nlohmann::json summary_to_json(const fewshot::ProtocolSummary& s, const nlohmann::json& config_echo);
nlohmann::json timing_to_json(const fewshot::TimingReport& r);

// Copy of `doc` with every epoch_seconds / inference_seconds field removed.
nlohmann::json without_timing(const nlohmann::json& doc);

// Trained adapter + head as one flat array of values and a manifest of
// {name, shape, offset} entries describing how to slice it.
nlohmann::json model_to_json(const fewshot::TrainedModel& model);
// Restores the trainable tensors of `into` (whose structure must match).
void model_from_json(const nlohmann::json& doc, fewshot::TrainedModel& into);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
// `epoch,loss` rows, epochs counted from 1.
void write_loss_csv(const std::filesystem::path& path, std::span<const double> trace);

}  // namespace phaselab::cli
