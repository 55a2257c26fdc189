#pragma once

#include "handover/events.hpp"
#include "handover/net.hpp"
#include "handover/synth.hpp"
#include "handover/train.hpp"

#include <string>

namespace CLI {
class App;
}

namespace handover {

/// Everything a run needs, parseable from one key=value config file with
/// command-line flag overrides.
struct RunConfig {
  SynthConfig synth;   // includes the WindowSpec
  ModelDims dims = {0, 64, 64};  // feature_dim filled from data at use
  TrainConfig train;
  EvalParams eval;

  std::string data_dir = "data";
  std::string out_dir = "out";
  std::string checkpoint_path;   // defaults to <out_dir>/model.ckpt
  std::string stream_format = "jsonl";  // jsonl | csv
  std::uint64_t seed = 42;       // propagated to synth.seed and train.seed

  void apply_seed() {
    synth.seed = seed;
    train.seed = seed;
  }
  std::string resolved_checkpoint() const {
    return checkpoint_path.empty() ? out_dir + "/model.ckpt" : checkpoint_path;
  }
  void validate() const;
};

/// Registers every RunConfig key on the app (or subcommand) with its default
/// captured for --help.
void register_options(CLI::App& app, RunConfig& cfg);

/// Applies `key=value` lines from a config file onto cfg. `#` starts a
/// comment, blank lines are skipped, and keys are the option names without
/// the leading dashes. Unknown keys and unparseable values are rejected.
/// Call before parsing command-line flags so flags win.
void apply_config_file(const std::string& path, RunConfig& cfg);

}  // namespace handover
