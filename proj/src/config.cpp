#include "handover/config.hpp"

#include "handover/stream.hpp"

#include <CLI11.hpp>

namespace handover {

void RunConfig::validate() const {
  synth.validate();
  train.validate();
  eval.validate();
  if (dims.embedding_dim < 1 || dims.hidden_dim < 1)
    throw ConfigError("embedding_dim and hidden_dim must be positive");
  if (stream_format != "jsonl" && stream_format != "csv")
    throw ConfigError("stream_format must be jsonl or csv");
}

void register_options(CLI::App& app, RunConfig& cfg) {
  auto opt = [&app](const std::string& name, auto& field, const std::string& desc) {
    return app.add_option(name, field, desc)->capture_default_str();
  };

  // Windowing.
  opt("--frames_per_window", cfg.synth.window.frames_per_window,
      "frames sampled per window (T)");
  opt("--frame_stride", cfg.synth.window.frame_stride, "stride between sampled frames (s_f)");
  opt("--sequence_stride", cfg.synth.window.sequence_stride,
      "stride between window starts (s_s)");

  // Synthetic data.
  opt("--num_streams", cfg.synth.num_streams, "streams to synthesize");
  opt("--frames_per_stream", cfg.synth.frames_per_stream, "frames per synthetic stream");
  opt("--feature_dim", cfg.synth.feature_dim, "per-frame feature dimension (F)");
  opt("--event_rate", cfg.synth.event_rate, "planted events per 1000 frames");
  opt("--event_min_duration", cfg.synth.event_min_duration, "shortest event, frames");
  opt("--event_max_duration", cfg.synth.event_max_duration, "longest event, frames");
  opt("--direction_ratio", cfg.synth.direction_ratio, "fraction of events labeled Receives");
  opt("--noise_sigma", cfg.synth.noise_sigma, "feature noise standard deviation");

  // Model.
  opt("--embedding_dim", cfg.dims.embedding_dim, "projection output dimension (D)");
  opt("--hidden_dim", cfg.dims.hidden_dim, "LSTM hidden size (H)");

  // Training.
  opt("--lr_projection", cfg.train.lr_projection, "projection-group learning rate");
  opt("--lr_temporal", cfg.train.lr_temporal, "LSTM+head-group learning rate");
  opt("--weight_decay_projection", cfg.train.weight_decay_projection,
      "projection-group weight decay");
  opt("--weight_decay_temporal", cfg.train.weight_decay_temporal,
      "LSTM+head-group weight decay");
  opt("--batch_size", cfg.train.batch_size, "windows per micro-batch");
  opt("--accumulation_steps", cfg.train.accumulation_steps,
      "micro-batches per optimizer update");
  opt("--max_grad_norm", cfg.train.max_grad_norm, "global gradient-norm clip");
  opt("--warmup_fraction", cfg.train.warmup_fraction, "linear warmup fraction of total steps");
  opt("--epochs", cfg.train.epochs, "training epochs");
  opt("--sampler_receives", cfg.train.sampler_probs[0], "sampling probability of Receives");
  opt("--sampler_gives", cfg.train.sampler_probs[1], "sampling probability of Gives");
  opt("--sampler_idle", cfg.train.sampler_probs[2], "sampling probability of Idle");
  opt("--early_stop_patience", cfg.train.early_stop_patience,
      "epochs without validation improvement before stopping");
  opt("--val_fraction", cfg.train.val_fraction, "trailing fraction of streams held out");
  opt("--dropout_projection", cfg.train.dropout.projection, "projection dropout rate");
  opt("--dropout_lstm_output", cfg.train.dropout.lstm_output, "LSTM-output dropout rate");
  opt("--w_pos", cfg.train.loss.w_pos, "positive-class weight of the detection loss");
  opt("--lambda_det", cfg.train.loss.lambda_det, "detection loss weight");
  opt("--lambda_dir", cfg.train.loss.lambda_dir, "direction loss weight");
  opt("--auto_dir_weights", cfg.train.auto_dir_weights,
      "derive direction class weights from training frequencies");

  // Event evaluation.
  opt("--smooth_sigma", cfg.eval.smooth_sigma, "Gaussian smoothing sigma");
  opt("--smooth_kernel_size", cfg.eval.smooth_kernel_size, "Gaussian kernel taps (odd)");
  opt("--peak_min_height", cfg.eval.peak_min_height, "minimum peak height");
  opt("--peak_prominence_frac", cfg.eval.peak_prominence_frac,
      "prominence threshold as fraction of the segment range");
  opt("--match_tolerance", cfg.eval.match_tolerance, "matching tolerance, window ordinals");
  opt("--direction_sigma_floor", cfg.eval.direction_sigma_floor,
      "minimum direction-aggregation sigma");
  opt("--direction_sigma_fraction", cfg.eval.direction_sigma_fraction,
      "direction-aggregation sigma as fraction of interval length");

  // I/O and seeding.
  opt("--data_dir", cfg.data_dir, "dataset directory");
  opt("--out_dir", cfg.out_dir, "output directory");
  opt("--checkpoint", cfg.checkpoint_path, "checkpoint path (default <out_dir>/model.ckpt)");
  opt("--stream_format", cfg.stream_format, "stream file format: jsonl or csv");
  opt("--seed", cfg.seed, "master seed for synthesis and training");
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
  auto in = open_input(path);
  const auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  // Each value is pushed through the same option table the flags use, so the
  // key set, conversions, and rejection of unknown keys stay in one place.
  CLI::App probe;
  register_options(probe, cfg);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = [&] { return path + ":" + std::to_string(line_no); };
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where() + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where() + ": empty config key");
    try {
      // CLI11's vector parse consumes tokens back to front.
      probe.parse(std::vector<std::string>{value, "--" + key});
    } catch (const CLI::ParseError&) {
      throw ConfigError(where() + ": unknown or invalid config key '" + key + "'");
    }
  }
}

}  // namespace handover
