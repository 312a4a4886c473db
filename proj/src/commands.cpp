#include "phaselab/commands.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"

#include "phaselab/config.hpp"
#include "phaselab/error.hpp"
#include "phaselab/results.hpp"
#include "phaselab/selftest.hpp"

namespace phaselab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string sweep = "rank";
};

struct Context {
  ExperimentConfig config;
  fs::path out;
  std::ostream& log;
};

Context load(const Options& opt, std::ostream& log) {
  ExperimentConfig cfg = opt.config_path.empty() ? ExperimentConfig{} : parse_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
  fs::path out = cfg.output_dir;
  return {std::move(cfg), std::move(out), log};
}

std::uint64_t pick_seed(const Options& opt, const Context& ctx) {
  if (opt.seed) return *opt.seed;
  const auto& seeds = ctx.config.protocol.seeds;
  if (seeds.empty()) throw ConfigError("protocol.seeds must not be empty");
  return seeds.front();
}

fs::path loss_path(const fs::path& dir, std::uint64_t seed) {
  return dir / ("loss_seed" + std::to_string(seed) + ".csv");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

int cmd_gen_data(const Context& ctx) {
  const auto& data = ctx.config.protocol.data;
  if (data.use_csv) throw ConfigError("gen-data needs a synthetic dataset section, not CSV inputs");
  const fewshot::Splits s = fewshot::gen_synthetic(data.synthetic);
  ensure_dir(ctx.out);
  fewshot::write_csv(ctx.out / "train.csv", s.train);
  fewshot::write_csv(ctx.out / "test.csv", s.test);
  ctx.log << "wrote " << s.train.size() << " train and " << s.test.size() << " test rows to "
          << ctx.out.string() << '\n';
  return 0;
}

int cmd_train(const Context& ctx, std::uint64_t seed) {
  const auto& pc = ctx.config.protocol;
  const fewshot::Splits data = fewshot::trial_data(pc.data, seed);
  fewshot::TrainedModel model;
  const fewshot::TrialResult r = fewshot::train_trial(pc.trial, data.train, data.test, seed, &model);
  ensure_dir(ctx.out);
  write_json(ctx.out / ("model_seed" + std::to_string(seed) + ".json"), model_to_json(model));
  write_json(ctx.out / "train_result.json", json{{"config_echo", to_json(ctx.config)},
                                                 {"trial", trial_to_json(r)}});
  write_loss_csv(loss_path(ctx.out, seed), r.loss_trace);
  ctx.log << "seed " << seed << ": acc " << r.metrics.acc << " auc " << r.metrics.auc << '\n';
  return 0;
}

int cmd_protocol(const Context& ctx) {
  const fewshot::ProtocolSummary s = fewshot::run_protocol(ctx.config.protocol);
  ensure_dir(ctx.out);
  write_json(ctx.out / "protocol.json", summary_to_json(s, to_json(ctx.config)));
  for (const auto& r : s.per_seed) write_loss_csv(loss_path(ctx.out, r.seed), r.loss_trace);
  ctx.log << "mean acc " << s.mean.at("acc") << " (std " << s.std.at("acc") << ") over "
          << s.per_seed.size() << " seeds\n";
  return 0;
}

int cmd_ablate(const Context& ctx, const std::string& sweep_name) {
  const fewshot::Sweep sweep = fewshot::parse_sweep(sweep_name);
  const auto entries = fewshot::run_ablation(ctx.config.protocol, sweep);
  json list = json::array();
  for (const auto& e : entries) {
    json mean = json::object();
    json std = json::object();
    for (const auto& key : fewshot::kSummaryKeys) {
      mean[key] = e.summary.mean.at(key);
      std[key] = e.summary.std.at(key);
    }
    list.push_back(json{{"variant", e.variant}, {"r", e.r}, {"n_train", e.n_train},
                        {"mean", mean}, {"std", std}});
    ctx.log << e.variant << " r=" << e.r << " n_train=" << e.n_train << ": acc "
            << e.summary.mean.at("acc") << '\n';
  }
  ensure_dir(ctx.out);
  write_json(ctx.out / ("ablate_" + sweep_name + ".json"),
             json{{"config_echo", to_json(ctx.config)}, {"sweep", sweep_name}, {"entries", list}});
  return 0;
}

int cmd_bench(const Context& ctx, std::uint64_t seed) {
  using adapters::Variant;
  fewshot::ProtocolConfig base = ctx.config.protocol;
  base.seeds = {seed};
  json reports = json::array();
  std::map<std::string, fewshot::TimingReport> by_name;
  for (const auto& v : {Variant::lora(), Variant::hlora(), Variant::qlora()}) {
    fewshot::ProtocolConfig c = base;
    c.trial.adapter.variant = v;
    if (v.kind == adapters::VariantKind::qlora && c.trial.adapter.r != 4) {
      c.trial.adapter.options.qubit_tiling = true;
    }
    const auto report = fewshot::bench_timing(c);
    by_name[report.variant] = report;
    reports.push_back(timing_to_json(report));
    ctx.log << report.variant << ": epoch " << report.epoch_seconds << " s, inference "
            << report.inference_seconds << " s, params " << report.trainable_params << '\n';
  }
  const auto delta = [&](const std::string& v) {
    return static_cast<long long>(by_name.at(v).trainable_params) -
           static_cast<long long>(by_name.at("lora").trainable_params);
  };

  // Circuit angle counts per preset, independent of the timed runs.
  json presets = json::object();
  for (const auto& [name, spec] : {std::pair{"table3", qsim::CircuitSpec::double_block()},
                                   std::pair{"paper-literal", qsim::CircuitSpec::single_block()}}) {
    presets[name] = spec.param_count();
  }

  const auto& lora = by_name.at("lora");
  const auto& hlora = by_name.at("hlora");
  const auto& qlora = by_name.at("qlora");
  json doc{{"config_echo", to_json(ctx.config)},
           {"seed", seed},
           {"reports", reports},
           {"param_delta_vs_lora", {{"hlora", delta("hlora")}, {"qlora", delta("qlora")}}},
           {"qnn_angles_per_preset", presets},
           {"epoch_ratio", {{"qlora_over_hlora", qlora.epoch_seconds / hlora.epoch_seconds},
                            {"hlora_over_lora", hlora.epoch_seconds / lora.epoch_seconds}}},
           {"notes",
            json::array({"hlora trains one scalar output scale on top of the lora factors, so its "
                         "count exceeds lora by 1. Counts that list 0 additional parameters for "
                         "hlora leave that scalar out."})}};
  ensure_dir(ctx.out);
  write_json(ctx.out / "bench.json", doc);
  return 0;
}

int cmd_embed(const Context& ctx, std::uint64_t seed) {
  const auto& pc = ctx.config.protocol;
  const fewshot::Splits data = fewshot::trial_data(pc.data, seed);
  fewshot::TrainedModel model;
  fewshot::train_trial(pc.trial, data.train, data.test, seed, &model);
  const auto e = adapters::embed(data.test.features, model.backbone, model.adapter);
  ensure_dir(ctx.out);
  fewshot::write_csv(ctx.out / "embed_bottleneck.csv", {e.bottleneck, data.test.labels});
  fewshot::write_csv(ctx.out / "embed_output.csv", {e.output, data.test.labels});
  ctx.log << "embedded " << data.test.size() << " test rows\n";
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"phaselab: low-rank adapter experiments on phase-structured data"};
  app.footer(config_reference());
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub, bool seeded) {
    sub->add_option("-c,--config", opt.config_path, "JSON experiment config (defaults if omitted)");
    sub->add_option("-o,--out", opt.out_dir, "output directory (overrides config 'output')");
    if (seeded) sub->add_option("-s,--seed", opt.seed, "trial seed (default: first protocol seed)");
  };
  auto* gen = app.add_subcommand("gen-data", "write synthetic train.csv and test.csv");
  add_common(gen, false);
  auto* train = app.add_subcommand("train", "run a single trial");
  add_common(train, true);
  auto* protocol = app.add_subcommand("protocol", "run every protocol seed and summarize");
  add_common(protocol, false);
  auto* ablate = app.add_subcommand("ablate", "sweep rank, training size or adapter layer type");
  add_common(ablate, false);
  ablate->add_option("--sweep", opt.sweep, "rank | samples | layers")
      ->check(CLI::IsMember({"rank", "samples", "layers"}));
  auto* bench = app.add_subcommand("bench", "time lora, hlora and qlora on one config");
  add_common(bench, true);
  auto* embed = app.add_subcommand("embed", "train one trial and dump test-set embeddings");
  add_common(embed, true);
  auto* selftest = app.add_subcommand("selftest", "run the fast property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return 2;
  }

  try {
    if (selftest->parsed()) return run_selftest(out) == 0 ? 0 : 1;
    const Context ctx = load(opt, out);
    if (gen->parsed()) return cmd_gen_data(ctx);
    if (train->parsed()) return cmd_train(ctx, pick_seed(opt, ctx));
    if (protocol->parsed()) return cmd_protocol(ctx);
    if (ablate->parsed()) return cmd_ablate(ctx, opt.sweep);
    if (bench->parsed()) return cmd_bench(ctx, pick_seed(opt, ctx));
    if (embed->parsed()) return cmd_embed(ctx, pick_seed(opt, ctx));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace phaselab::cli
