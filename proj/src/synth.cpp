#include "handover/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace handover {

void SynthConfig::validate() const {
  window.validate();
  if (num_streams < 0) throw ConfigError("num_streams must be >= 0");
  if (frames_per_stream < window.extent())
    throw ConfigError("frames_per_stream must cover at least one window extent");
  if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (event_rate < 0) throw ConfigError("event_rate must be >= 0");
  if (event_min_duration < 1 || event_max_duration < event_min_duration)
    throw ConfigError("event durations must satisfy 1 <= min <= max");
  if (direction_ratio < 0 || direction_ratio > 1)
    throw ConfigError("direction_ratio must be in [0,1]");
  if (noise_sigma < 0) throw ConfigError("noise_sigma must be >= 0");
}

void direction_patterns(int feature_dim, Eigen::VectorXd& u, Eigen::VectorXd& v) {
  u.resize(feature_dim);
  v.resize(feature_dim);
  for (int j = 0; j < feature_dim; ++j) {
    const double phase = 2.0 * std::numbers::pi * (j + 0.5) / feature_dim;
    u[j] = std::cos(phase);
    v[j] = std::sin(phase);
  }
  u.normalize();
  v.normalize();
}

std::pair<LabeledFrameStream, std::vector<PlantedEvent>> generate_stream(const SynthConfig& cfg,
                                                                         std::mt19937_64& rng) {
  cfg.validate();
  const int n = cfg.frames_per_stream;
  const int num_events =
      static_cast<int>(std::llround(cfg.event_rate * n / 1000.0));

  // Draw order is fixed: durations, directions, placement, then noise.
  std::vector<int> durations(num_events);
  {
    std::uniform_int_distribution<int> dur(cfg.event_min_duration, cfg.event_max_duration);
    for (int& d : durations) d = dur(rng);
  }
  std::vector<FrameLabel> directions(num_events);
  {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (FrameLabel& d : directions)
      d = unit(rng) < cfg.direction_ratio ? FrameLabel::Receives : FrameLabel::Gives;
  }

  // Events are kept one full window extent apart so every evaluation interval
  // holds exactly one event.
  const int gap = cfg.window.extent();
  long total_needed = 0;
  for (int d : durations) total_needed += d;
  if (num_events > 1) total_needed += static_cast<long>(gap) * (num_events - 1);
  const long slack = static_cast<long>(n) - total_needed;
  if (slack < 0) throw ConfigError("infeasible event density");

  std::vector<long> cuts(num_events);
  {
    std::uniform_int_distribution<long> cut(0, slack);
    for (long& c : cuts) c = cut(rng);
    std::sort(cuts.begin(), cuts.end());
  }

  std::vector<PlantedEvent> events;
  events.reserve(num_events);
  long pos = 0;
  long prev_cut = 0;
  for (int i = 0; i < num_events; ++i) {
    pos += cuts[i] - prev_cut;
    prev_cut = cuts[i];
    PlantedEvent ev;
    ev.start = static_cast<int>(pos);
    ev.end = ev.start + durations[i] - 1;
    ev.direction = directions[i];
    events.push_back(ev);
    pos = ev.end + 1 + gap;
  }

  LabeledFrameStream s;
  s.num_frames = n;
  s.labels.assign(n, FrameLabel::Idle);
  s.features.resize(n, cfg.feature_dim);
  {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (int t = 0; t < n; ++t)
      for (int f = 0; f < cfg.feature_dim; ++f) s.features(t, f) = noise(rng);
  }

  Eigen::VectorXd u, v;
  direction_patterns(cfg.feature_dim, u, v);
  for (const PlantedEvent& ev : events) {
    const int len = ev.end - ev.start + 1;
    for (int t = ev.start; t <= ev.end; ++t) {
      s.labels[t] = ev.direction;
      const double p = len == 1 ? 0.5 : static_cast<double>(t - ev.start) / (len - 1);
      const double env = 1.0 - std::abs(2.0 * p - 1.0);
      // Receives fades u -> v over the event; Gives is the time reversal.
      const double wu = ev.direction == FrameLabel::Receives ? 1.0 - p : p;
      s.features.row(t) += env * (wu * u + (1.0 - wu) * v).transpose();
    }
  }
  return {std::move(s), std::move(events)};
}

std::pair<LabeledFrameStream, std::vector<PlantedEvent>> generate_stream(const SynthConfig& cfg,
                                                                         int stream_index) {
  std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(stream_index));
  return generate_stream(cfg, rng);
}

LabeledFrameStream jitter_embeddings(const LabeledFrameStream& s, double strength,
                                     std::mt19937_64& rng) {
  if (strength < 0) throw std::invalid_argument("jitter strength must be >= 0");
  LabeledFrameStream out = s;
  if (strength == 0) return out;
  std::normal_distribution<double> noise(0.0, strength);
  for (int t = 0; t < out.num_frames; ++t)
    for (int f = 0; f < out.feature_dim(); ++f) out.features(t, f) += noise(rng);
  return out;
}

}  // namespace handover
