#pragma once

#include "handover/checkpoint.hpp"
#include "handover/events.hpp"
#include "handover/stream.hpp"
#include "handover/synth.hpp"

#include <filesystem>

namespace handover {

/// Eval-mode inference over every window of a stream: per-window detection
/// probability and p(Gives).
ConfidenceSignal infer_signal(const LabeledFrameStream& stream, const ModelParams& params,
                              const WindowSpec& spec);

/// Ablation variant: the sampled frames of each window are permuted before
/// the forward pass, destroying within-window temporal order.
ConfidenceSignal infer_signal_shuffled(const LabeledFrameStream& stream,
                                       const ModelParams& params, const WindowSpec& spec,
                                       std::mt19937_64& rng);

/// Everything the events pipeline derives from one stream.
struct StreamEval {
  ConfidenceSignal signal;
  Vec<double> smoothed;
  std::vector<Peak> peaks;
  std::vector<GtEventInterval> intervals;
  EventMatchResult match;
  std::vector<FrameLabel> dir_predicted;  // per interval
  std::vector<FrameLabel> dir_truth;
};

/// Runs smoothing, peak detection, matching, and direction aggregation on one
/// stream's confidence signal against its frame labels.
StreamEval evaluate_stream(const ConfidenceSignal& signal,
                           const std::vector<FrameLabel>& frame_labels, const WindowSpec& spec,
                           const EvalParams& params);

struct EvalSummary {
  DetectionMetrics detection;
  DirectionResult direction;
  int tp = 0, fp = 0, fn = 0;
  int num_streams = 0;
  int num_windows = 0;
  int num_events = 0;
};

/// Pools match counts and per-event directions over all streams.
EvalSummary summarize(const std::vector<StreamEval>& streams);

void write_metrics_json(const std::filesystem::path& path, const EvalSummary& summary);

// Per-stream prediction files: CSV window_start,det_score,dir_score_gives.
void write_predictions_csv(const std::filesystem::path& path, const ConfidenceSignal& signal);
ConfidenceSignal read_predictions_csv(const std::filesystem::path& path);

// Ground-truth sidecar: {"events":[{"start":..,"end":..,"direction":".."}]}.
void write_events_json(const std::filesystem::path& path, const std::vector<PlantedEvent>& events);
std::vector<PlantedEvent> read_events_json(const std::filesystem::path& path);

/// Dataset manifest entry: one synthesized stream and its sidecar.
struct ManifestEntry {
  std::string stream_file;
  std::string events_file;
  int num_frames = 0;
  int num_events = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::string stream_format;
  std::vector<ManifestEntry> entries;
  int total_events = 0;
};

void write_manifest_json(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest_json(const std::filesystem::path& path);

/// Loads one stream in the named format ("jsonl" or "csv").
LabeledFrameStream read_stream(const std::filesystem::path& path, const std::string& format);
void write_stream(const std::filesystem::path& path, const LabeledFrameStream& s,
                  const std::string& format);

}  // namespace handover
