#pragma once

#include "handover/stream.hpp"

#include <random>
#include <utility>

namespace handover {

/// Synthetic dataset generator configuration. Events carry a direction signal
/// that is decodable only from temporal order: both directions traverse the
/// same set of feature vectors, one being the time reversal of the other.
struct SynthConfig {
  int num_streams = 24;
  int frames_per_stream = 900;
  int feature_dim = 16;
  double event_rate = 12.0;  // planted events per 1000 frames
  int event_min_duration = 12;
  int event_max_duration = 24;
  double direction_ratio = 334.0 / 484.0;  // fraction of events that are Receives
  double noise_sigma = 0.3;
  std::uint64_t seed = 42;
  WindowSpec window;  // sets the minimum inter-event gap (one full extent)

  void validate() const;
};

struct PlantedEvent {
  int start = 0;  // first frame of the event
  int end = 0;    // last frame, inclusive
  FrameLabel direction = FrameLabel::Receives;
};

/// The two fixed feature-space patterns the event signal cross-fades between.
/// They depend only on the feature dimension, so independently generated
/// datasets share the same signal structure.
void direction_patterns(int feature_dim, Eigen::VectorXd& u, Eigen::VectorXd& v);

/// Generate one labeled stream with planted events, consuming `rng`.
/// Event features: Gaussian noise plus a triangular envelope (peak at the
/// event midpoint) cross-fading between the two direction patterns; Gives is
/// the time reversal of Receives.
std::pair<LabeledFrameStream, std::vector<PlantedEvent>> generate_stream(const SynthConfig& cfg,
                                                                         std::mt19937_64& rng);

/// Stream index i uses a derived seed (cfg.seed + i), so streams can be
/// generated independently in any order.
std::pair<LabeledFrameStream, std::vector<PlantedEvent>> generate_stream(const SynthConfig& cfg,
                                                                         int stream_index);

/// Add i.i.d. Gaussian noise of the given std to every feature value.
/// Labels and metadata are unchanged.
LabeledFrameStream jitter_embeddings(const LabeledFrameStream& s, double strength,
                                     std::mt19937_64& rng);

}  // namespace handover
