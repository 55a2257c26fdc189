#include "handover/pipeline.hpp"

#include "handover/windowing.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace handover {

namespace {

ConfidenceSignal infer_impl(const LabeledFrameStream& stream, const ModelParams& params,
                            const WindowSpec& spec, std::mt19937_64* shuffle_rng) {
  stream.validate();
  if (stream.feature_dim() != static_cast<int>(params.proj_w.cols()))
    throw ConfigError("stream feature dimension does not match the checkpoint");
  const auto starts = enumerate_windows(stream.num_frames, spec);
  ConfidenceSignal sig;
  sig.window_starts = starts;
  sig.det_scores.resize(starts.size());
  sig.dir_scores.resize(starts.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t w = 0; w < starts.size(); ++w) {
    Eigen::MatrixXd features = gather_window_features(stream, starts[w], spec);
    if (shuffle_rng) {
      for (Eigen::Index i = features.rows() - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(unit(*shuffle_rng) * double(i + 1));
        features.row(i).swap(features.row(std::min(j, i)));
      }
    }
    const auto cache = forward(features, params);
    sig.det_scores[w] = cache.p_det;
    sig.dir_scores[w] = cache.p_dir[to_index(FrameLabel::Gives)];
  }
  return sig;
}

}  // namespace

ConfidenceSignal infer_signal(const LabeledFrameStream& stream, const ModelParams& params,
                              const WindowSpec& spec) {
  return infer_impl(stream, params, spec, nullptr);
}

ConfidenceSignal infer_signal_shuffled(const LabeledFrameStream& stream,
                                       const ModelParams& params, const WindowSpec& spec,
                                       std::mt19937_64& rng) {
  return infer_impl(stream, params, spec, &rng);
}

StreamEval evaluate_stream(const ConfidenceSignal& signal,
                           const std::vector<FrameLabel>& frame_labels, const WindowSpec& spec,
                           const EvalParams& params) {
  params.validate();
  signal.validate();
  StreamEval ev;
  ev.signal = signal;
  ev.smoothed = smooth(signal.det_scores, params.smooth_sigma, params.smooth_kernel_size);
  ev.peaks = find_peaks(ev.smoothed, params.peak_min_height, params.peak_prominence_frac);
  ev.intervals = gt_intervals(frame_labels, signal.window_starts, spec);
  ev.match = match_events(ev.peaks, ev.intervals, params.match_tolerance);
  for (const auto& interval : ev.intervals) {
    const double sigma = direction_sigma(params, interval.last - interval.first + 1);
    const auto agg = aggregate_direction(signal.dir_scores, interval, sigma);
    ev.dir_predicted.push_back(agg.predicted);
    ev.dir_truth.push_back(interval.direction);
  }
  return ev;
}

EvalSummary summarize(const std::vector<StreamEval>& streams) {
  EvalSummary s;
  std::vector<FrameLabel> pred, truth;
  for (const auto& ev : streams) {
    s.tp += ev.match.tp;
    s.fp += ev.match.fp;
    s.fn += ev.match.fn;
    s.num_windows += ev.signal.size();
    s.num_events += static_cast<int>(ev.intervals.size());
    pred.insert(pred.end(), ev.dir_predicted.begin(), ev.dir_predicted.end());
    truth.insert(truth.end(), ev.dir_truth.begin(), ev.dir_truth.end());
  }
  s.num_streams = static_cast<int>(streams.size());
  EventMatchResult pooled;
  pooled.tp = s.tp;
  pooled.fp = s.fp;
  pooled.fn = s.fn;
  s.detection = detection_metrics(pooled);
  s.direction = direction_metrics(pred, truth);
  return s;
}

namespace {

nlohmann::ordered_json matrix2_json(const Eigen::Matrix2d& m) {
  return nlohmann::ordered_json::array(
      {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}});
}

}  // namespace

void write_metrics_json(const std::filesystem::path& path, const EvalSummary& s) {
  nlohmann::ordered_json j;
  j["detection"] = {{"precision", s.detection.precision},
                    {"recall", s.detection.recall},
                    {"f1", s.detection.f1},
                    {"tp", s.tp},
                    {"fp", s.fp},
                    {"fn", s.fn}};
  j["direction"] = {{"f1_receives", s.direction.f1_receives},
                    {"f1_gives", s.direction.f1_gives},
                    {"mean_f1", s.direction.mean_f1},
                    {"confusion", matrix2_json(s.direction.confusion)},
                    {"normalized_confusion", matrix2_json(s.direction.normalized_confusion)},
                    {"num_events", s.num_events}};
  j["num_streams"] = s.num_streams;
  j["num_windows"] = s.num_windows;
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing metrics: " + path.string());
}

void write_predictions_csv(const std::filesystem::path& path, const ConfidenceSignal& signal) {
  signal.validate();
  std::ofstream out = open_output(path);
  out << "window_start,det_score,dir_score_gives\n";
  for (int w = 0; w < signal.size(); ++w)
    out << signal.window_starts[w] << ',' << format_double(signal.det_scores[w]) << ','
        << format_double(signal.dir_scores[w]) << '\n';
  if (!out) throw IoError("failed writing predictions: " + path.string());
}

ConfidenceSignal read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line != "window_start,det_score,dir_score_gives")
    throw IoError("bad predictions header in " + path.string());
  ConfidenceSignal sig;
  std::vector<double> det, dir;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    int start;
    double d, g;
    try {
      if (!std::getline(ss, cell, ',')) throw std::invalid_argument("missing window_start");
      start = std::stoi(cell);
      if (!std::getline(ss, cell, ',')) throw std::invalid_argument("missing det_score");
      d = std::stod(cell);
      if (!std::getline(ss, cell, ',')) throw std::invalid_argument("missing dir_score");
      g = std::stod(cell);
    } catch (const std::exception& e) {
      throw IoError("bad predictions row at " + path.string() + ":" + std::to_string(line_no) +
                    ": " + e.what());
    }
    sig.window_starts.push_back(start);
    det.push_back(d);
    dir.push_back(g);
  }
  sig.det_scores = Eigen::Map<Vec<double>>(det.data(), det.size());
  sig.dir_scores = Eigen::Map<Vec<double>>(dir.data(), dir.size());
  try {
    sig.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError("bad predictions file " + path.string() + ": " + e.what());
  }
  return sig;
}

void write_events_json(const std::filesystem::path& path, const std::vector<PlantedEvent>& events) {
  nlohmann::ordered_json j;
  j["events"] = nlohmann::ordered_json::array();
  for (const auto& ev : events)
    j["events"].push_back(
        {{"start", ev.start}, {"end", ev.end}, {"direction", label_name(ev.direction)}});
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing events: " + path.string());
}

std::vector<PlantedEvent> read_events_json(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
    std::vector<PlantedEvent> events;
    for (const auto& e : j.at("events")) {
      PlantedEvent ev;
      ev.start = e.at("start").get<int>();
      ev.end = e.at("end").get<int>();
      ev.direction = label_from_name(e.at("direction").get<std::string>());
      events.push_back(ev);
    }
    return events;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad events file " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError("bad events file " + path.string() + ": " + e.what());
  }
}

void write_manifest_json(const std::filesystem::path& path, const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["seed"] = manifest.seed;
  j["stream_format"] = manifest.stream_format;
  j["streams"] = nlohmann::ordered_json::array();
  for (const auto& e : manifest.entries)
    j["streams"].push_back({{"stream_file", e.stream_file},
                            {"events_file", e.events_file},
                            {"num_frames", e.num_frames},
                            {"num_events", e.num_events}});
  j["total_events"] = manifest.total_events;
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest: " + path.string());
}

Manifest read_manifest_json(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
    Manifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.stream_format = j.at("stream_format").get<std::string>();
    for (const auto& e : j.at("streams")) {
      ManifestEntry entry;
      entry.stream_file = e.at("stream_file").get<std::string>();
      entry.events_file = e.at("events_file").get<std::string>();
      entry.num_frames = e.at("num_frames").get<int>();
      entry.num_events = e.at("num_events").get<int>();
      m.entries.push_back(entry);
    }
    m.total_events = j.at("total_events").get<int>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad manifest " + path.string() + ": " + e.what());
  }
}

LabeledFrameStream read_stream(const std::filesystem::path& path, const std::string& format) {
  if (format == "jsonl") return read_stream_jsonl(path);
  if (format == "csv") return read_stream_csv(path);
  throw ConfigError("unknown stream format: " + format);
}

void write_stream(const std::filesystem::path& path, const LabeledFrameStream& s,
                  const std::string& format) {
  if (format == "jsonl") return write_stream_jsonl(path, s);
  if (format == "csv") return write_stream_csv(path, s);
  throw ConfigError("unknown stream format: " + format);
}

}  // namespace handover
