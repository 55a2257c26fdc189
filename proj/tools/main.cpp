#include "handover/config.hpp"
#include "handover/pipeline.hpp"
#include "handover/svg.hpp"

#include <CLI11.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace handover;

namespace {

struct CliFlags {
  bool plot = false;
  bool shuffle_frames = false;
  std::string pred_dir;
  int stream_index = 0;
  int window_ordinal = 0;
  int ig_steps = 64;
  std::string target = "det";
};

std::string indexed_name(const char* prefix, int i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%04d%s", prefix, i, suffix);
  return buf;
}

std::string stream_suffix(const std::string& format) {
  return format == "csv" ? ".csv" : ".jsonl";
}

void run_synth(RunConfig& cfg) {
  cfg.apply_seed();
  cfg.validate();
  fs::create_directories(cfg.data_dir);
  Manifest manifest;
  manifest.seed = cfg.synth.seed;
  manifest.stream_format = cfg.stream_format;
  for (int s = 0; s < cfg.synth.num_streams; ++s) {
    auto [stream, events] = generate_stream(cfg.synth, s);
    ManifestEntry entry;
    entry.stream_file = indexed_name("stream_", s, stream_suffix(cfg.stream_format).c_str());
    entry.events_file = indexed_name("stream_", s, ".events.json");
    entry.num_frames = stream.num_frames;
    entry.num_events = static_cast<int>(events.size());
    write_stream(fs::path(cfg.data_dir) / entry.stream_file, stream, cfg.stream_format);
    write_events_json(fs::path(cfg.data_dir) / entry.events_file, events);
    manifest.total_events += entry.num_events;
    manifest.entries.push_back(std::move(entry));
  }
  write_manifest_json(fs::path(cfg.data_dir) / "manifest.json", manifest);
  std::cout << "wrote " << manifest.entries.size() << " streams, " << manifest.total_events
            << " events to " << cfg.data_dir << "\n";
}

std::vector<LabeledFrameStream> load_streams(const RunConfig& cfg, const Manifest& manifest) {
  std::vector<LabeledFrameStream> streams;
  streams.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries)
    streams.push_back(
        read_stream(fs::path(cfg.data_dir) / entry.stream_file, manifest.stream_format));
  return streams;
}

void run_train(RunConfig& cfg) {
  cfg.apply_seed();
  cfg.validate();
  const Manifest manifest = read_manifest_json(fs::path(cfg.data_dir) / "manifest.json");
  if (manifest.entries.empty()) throw ConfigError("dataset is empty: " + cfg.data_dir);
  const auto streams = load_streams(cfg, manifest);

  ModelDims dims = cfg.dims;
  dims.feature_dim = streams[0].feature_dim();
  const auto ds = WindowedDataset::build(streams, cfg.synth.window, cfg.train.val_fraction);
  const auto result = train(ds, dims, cfg.train);

  fs::create_directories(cfg.out_dir);
  save_checkpoint(cfg.resolved_checkpoint(), {result.params, cfg.train.seed});
  write_history_csv((fs::path(cfg.out_dir) / "history.csv").string(), result.history);
  std::cout << "trained " << result.history.size() << " epochs (best epoch "
            << result.best_epoch << "); checkpoint: " << cfg.resolved_checkpoint() << "\n";
}

void run_eval(RunConfig& cfg, const CliFlags& flags) {
  cfg.apply_seed();
  cfg.validate();
  const Manifest manifest = read_manifest_json(fs::path(cfg.data_dir) / "manifest.json");
  const auto streams = load_streams(cfg, manifest);
  fs::create_directories(cfg.out_dir);

  std::optional<Checkpoint> ckpt;
  if (flags.pred_dir.empty()) ckpt = load_checkpoint(cfg.resolved_checkpoint());
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x5bf0a8f1e3c2d401ULL);

  std::vector<StreamEval> evals;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    ConfidenceSignal signal;
    if (!flags.pred_dir.empty()) {
      signal = read_predictions_csv(fs::path(flags.pred_dir) /
                                    indexed_name("pred_", static_cast<int>(s), ".csv"));
    } else if (flags.shuffle_frames) {
      signal = infer_signal_shuffled(streams[s], ckpt->params, cfg.synth.window, shuffle_rng);
    } else {
      signal = infer_signal(streams[s], ckpt->params, cfg.synth.window);
    }
    write_predictions_csv(
        fs::path(cfg.out_dir) / indexed_name("pred_", static_cast<int>(s), ".csv"), signal);
    evals.push_back(evaluate_stream(signal, streams[s].labels, cfg.synth.window, cfg.eval));
    if (flags.plot)
      write_signal_svg(
          fs::path(cfg.out_dir) / indexed_name("trace_", static_cast<int>(s), ".svg"),
          evals.back(), cfg.eval.peak_min_height);
  }
  const EvalSummary summary = summarize(evals);
  write_metrics_json(fs::path(cfg.out_dir) / "metrics.json", summary);
  std::cout << "detection F1 " << summary.detection.f1 << " (P " << summary.detection.precision
            << ", R " << summary.detection.recall << "); direction mean F1 "
            << summary.direction.mean_f1 << " over " << summary.num_events << " events\n";
}

std::string sanitize(std::string name) {
  for (char& c : name)
    if (c == ':') c = '-';
  return name;
}

// The config file must be applied before CLI11 parses the flags (flags win),
// so the --config argument is picked out of argv up front.
std::string config_path_from_args(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      path = argv[++i];
    else if (arg.rfind("--config=", 0) == 0)
      path = arg.substr(9);
  }
  return path;
}

std::uint64_t seed_from_env(const char* text) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text, &end, 10);
  if (errno != 0 || end == text || *end != '\0' || *text == '-')
    throw ConfigError(std::string("bad HANDOVER_EVENTS_SEED value: ") + text);
  return v;
}

AttributionTarget parse_target(const std::string& s) {
  AttributionTarget t;
  if (s == "det") return t;
  t.head = AttributionTarget::Head::Direction;
  if (s == "dir:receives") {
    t.direction = FrameLabel::Receives;
    return t;
  }
  if (s == "dir:gives") {
    t.direction = FrameLabel::Gives;
    return t;
  }
  throw ConfigError("unknown attribution target: " + s +
                    " (expected det, dir:receives, or dir:gives)");
}

void run_attribute(RunConfig& cfg, const CliFlags& flags) {
  cfg.apply_seed();
  cfg.validate();
  if (flags.ig_steps < 8) throw ConfigError("attribution needs at least 8 path steps");
  const Manifest manifest = read_manifest_json(fs::path(cfg.data_dir) / "manifest.json");
  if (flags.stream_index < 0 ||
      flags.stream_index >= static_cast<int>(manifest.entries.size()))
    throw ConfigError("stream index out of range: " + std::to_string(flags.stream_index));
  const auto stream =
      read_stream(fs::path(cfg.data_dir) / manifest.entries[flags.stream_index].stream_file,
                  manifest.stream_format);
  const Checkpoint ckpt = load_checkpoint(cfg.resolved_checkpoint());

  const auto starts = enumerate_windows(stream.num_frames, cfg.synth.window);
  if (flags.window_ordinal < 0 || flags.window_ordinal >= static_cast<int>(starts.size()))
    throw ConfigError("window ordinal out of range: " + std::to_string(flags.window_ordinal));
  const AttributionTarget target = parse_target(flags.target);

  const Eigen::MatrixXd features =
      gather_window_features(stream, starts[flags.window_ordinal], cfg.synth.window);
  const Mat<double> embeddings = project(features, ckpt.params, 0.0, nullptr);
  const AttributionMap map =
      integrated_gradients(ckpt.params, embeddings, flags.ig_steps, target);

  const Mat<double> baseline = Mat<double>::Zero(embeddings.rows(), embeddings.cols());
  const double delta = target_logit(ckpt.params, embeddings, target) -
                       target_logit(ckpt.params, baseline, target);
  const double total = map.relevance.sum();

  fs::create_directories(cfg.out_dir);
  char stem[96];
  std::snprintf(stem, sizeof(stem), "attr_s%04d_w%04d_%s", flags.stream_index,
                flags.window_ordinal, sanitize(flags.target).c_str());
  write_attribution_csv(fs::path(cfg.out_dir) / (std::string(stem) + ".csv"), map,
                        std::make_pair(total, delta));
  write_heatstrip_svg(fs::path(cfg.out_dir) / (std::string(stem) + ".svg"), map);
  std::cout << "attribution " << stem << ": relevance sum " << total << ", target delta "
            << delta << "\n";
}

void run_plot(RunConfig& cfg, const CliFlags& flags) {
  cfg.apply_seed();
  cfg.validate();
  const Manifest manifest = read_manifest_json(fs::path(cfg.data_dir) / "manifest.json");
  const auto streams = load_streams(cfg, manifest);
  const std::string pred_dir = flags.pred_dir.empty() ? cfg.out_dir : flags.pred_dir;
  fs::create_directories(cfg.out_dir);
  for (std::size_t s = 0; s < streams.size(); ++s) {
    const auto signal = read_predictions_csv(fs::path(pred_dir) /
                                             indexed_name("pred_", static_cast<int>(s), ".csv"));
    const auto ev = evaluate_stream(signal, streams[s].labels, cfg.synth.window, cfg.eval);
    write_signal_svg(fs::path(cfg.out_dir) / indexed_name("trace_", static_cast<int>(s), ".svg"),
                     ev, cfg.eval.peak_min_height);
  }
  std::cout << "wrote " << streams.size() << " trace figures to " << cfg.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CliFlags flags;
  CLI::App app{"instrument-handover event detection: synthesize, train, evaluate, explain"};
  app.require_subcommand(1);

  // --config is handled before flag parsing (see config_path_from_args);
  // registering it here keeps it in --help and out of the unknown-flag path.
  std::string config_display;
  auto add_common = [&cfg, &config_display](CLI::App* sub) {
    register_options(*sub, cfg);
    sub->add_option("--config", config_display, "key=value config file (# comments allowed)");
  };

  auto* sub_synth = app.add_subcommand("synth", "synthesize a labeled event dataset");
  add_common(sub_synth);
  sub_synth->callback([&]() { run_synth(cfg); });

  auto* sub_train = app.add_subcommand("train", "train the detector on a dataset");
  add_common(sub_train);
  sub_train->callback([&]() { run_train(cfg); });

  auto* sub_eval = app.add_subcommand("eval", "run event-level evaluation");
  add_common(sub_eval);
  sub_eval->add_flag("--plot", flags.plot, "also write per-stream trace figures");
  sub_eval->add_flag("--shuffle-frames", flags.shuffle_frames,
                     "ablation: permute frames within each window before inference");
  sub_eval->add_option("--pred-dir", flags.pred_dir,
                       "evaluate stored prediction CSVs instead of running the model");
  sub_eval->callback([&]() { run_eval(cfg, flags); });

  auto* sub_attr = app.add_subcommand("attribute", "per-frame relevance for one window");
  add_common(sub_attr);
  sub_attr->add_option("--stream", flags.stream_index, "stream index in the manifest")
      ->capture_default_str();
  sub_attr->add_option("--window", flags.window_ordinal, "window ordinal within the stream")
      ->capture_default_str();
  sub_attr->add_option("--steps", flags.ig_steps, "integration path steps")
      ->capture_default_str();
  sub_attr->add_option("--target", flags.target, "det, dir:receives, or dir:gives")
      ->capture_default_str();
  sub_attr->callback([&]() { run_attribute(cfg, flags); });

  auto* sub_plot = app.add_subcommand("plot", "trace figures from stored predictions");
  add_common(sub_plot);
  sub_plot->add_option("--pred-dir", flags.pred_dir,
                       "directory holding pred_*.csv (default: out_dir)");
  sub_plot->callback([&]() { run_plot(cfg, flags); });

  try {
    // Precedence, lowest to highest: built-in defaults, config file,
    // HANDOVER_EVENTS_SEED, command-line flags.
    const std::string config_path = config_path_from_args(argc, argv);
    if (!config_path.empty()) apply_config_file(config_path, cfg);
    if (const char* env_seed = std::getenv("HANDOVER_EVENTS_SEED"))
      cfg.seed = seed_from_env(env_seed);
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
