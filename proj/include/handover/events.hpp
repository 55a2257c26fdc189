#pragma once

#include "handover/types.hpp"

#include <cmath>

namespace handover {

/// Knobs of the event extraction and scoring pipeline.
struct EvalParams {
  double smooth_sigma = 3.0;
  int smooth_kernel_size = 15;
  double peak_min_height = 0.1;
  double peak_prominence_frac = 0.01;  // fraction of the per-segment range
  int match_tolerance = 2;             // window ordinals
  // Direction aggregation sigma: max(floor, fraction * interval_length).
  double direction_sigma_floor = 1.0;
  double direction_sigma_fraction = 0.25;

  void validate() const {
    if (smooth_sigma <= 0) throw ConfigError("smooth_sigma must be positive");
    if (smooth_kernel_size < 1 || smooth_kernel_size % 2 == 0)
      throw ConfigError("smooth_kernel_size must be odd and positive");
    if (peak_min_height < 0 || peak_prominence_frac < 0)
      throw ConfigError("peak thresholds must be non-negative");
    if (match_tolerance < 0) throw ConfigError("match_tolerance must be non-negative");
    if (direction_sigma_floor <= 0 || direction_sigma_fraction < 0)
      throw ConfigError("direction sigma parameters must be positive");
  }
};

/// Per-window model outputs along one stream, in window order.
struct ConfidenceSignal {
  std::vector<int> window_starts;  // ascending, spacing = sequence_stride
  Vec<double> det_scores;          // p(handover) per window
  Vec<double> dir_scores;          // p(Gives) per window

  int size() const { return static_cast<int>(window_starts.size()); }
  void validate() const;
};

/// Normalized Gaussian taps w_k ∝ exp(-k^2 / 2 sigma^2), k in [-size/2, size/2].
template <typename Scalar>
Vec<Scalar> gaussian_kernel(Scalar sigma, int size) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("kernel size must be odd");
  if (!(sigma > Scalar(0))) throw std::invalid_argument("sigma must be positive");
  const int half = size / 2;
  Vec<Scalar> w(size);
  for (int k = -half; k <= half; ++k)
    w[k + half] = std::exp(-Scalar(k) * Scalar(k) / (Scalar(2) * sigma * sigma));
  return w / w.sum();
}

/// Reflects an out-of-range index about the signal boundaries (the boundary
/// sample itself is the mirror axis and is not repeated).
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  Eigen::Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

/// Gaussian smoothing with reflective padding of max(size/2, round(3 sigma))
/// samples per side; output length equals input length.
template <typename Scalar>
Vec<Scalar> smooth(const Vec<Scalar>& signal, Scalar sigma = Scalar(3), int size = 15) {
  const Eigen::Index n = signal.size();
  if (n < 1) throw std::invalid_argument("smooth: empty signal");
  const Vec<Scalar> kernel = gaussian_kernel(sigma, size);
  const int half = size / 2;
  const Eigen::Index pad =
      std::max<Eigen::Index>(half, static_cast<Eigen::Index>(std::llround(3.0 * double(sigma))));
  Vec<Scalar> padded(n + 2 * pad);
  for (Eigen::Index i = 0; i < padded.size(); ++i)
    padded[i] = signal[reflect_index(i - pad, n)];
  Vec<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar acc = Scalar(0);
    for (int k = 0; k < size; ++k) acc += kernel[k] * padded[i + pad - half + k];
    out[i] = acc;
  }
  return out;
}

struct Peak {
  int index = 0;  // plateau midpoint, rounded down
  double height = 0.0;
  double prominence = 0.0;
};

/// Prominence-based peak detection. A peak is a strict local maximum
/// (plateaus collapse to their midpoint); its prominence is height minus the
/// higher of the two base minima, each taken between the peak and the nearest
/// strictly higher sample on that side (or the signal end). Retained peaks
/// satisfy height >= min_height and prominence >= prominence_frac * range,
/// where range is max - min of this signal (one extracted segment).
std::vector<Peak> find_peaks(const Vec<double>& signal, double min_height = 0.1,
                             double prominence_frac = 0.01);

/// Ground-truth event as a window-ordinal interval [first, last], inclusive.
struct GtEventInterval {
  int first = 0;
  int last = 0;
  FrameLabel direction = FrameLabel::Idle;
};

/// Builds ground-truth intervals from frame labels: maximal runs of windows
/// whose temporal extent contains at least one handover frame. The interval
/// direction is the label of the earliest handover frame its windows cover.
std::vector<GtEventInterval> gt_intervals(const std::vector<FrameLabel>& frame_labels,
                                          const std::vector<int>& window_starts,
                                          const WindowSpec& spec);

struct EventMatchResult {
  std::vector<std::pair<int, int>> pairs;  // (peak index in list, interval index)
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

/// Greedy one-to-one matching in ascending peak order: each peak takes the
/// first unmatched interval [a,b] with a - tol <= peak_index <= b + tol.
EventMatchResult match_events(const std::vector<Peak>& peaks,
                              const std::vector<GtEventInterval>& intervals, int tol = 2);

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision/recall/F1 with the 0/0 -> 0 convention.
DetectionMetrics detection_metrics(const EventMatchResult& result);

struct DirectionAggregate {
  FrameLabel predicted = FrameLabel::Idle;
  double p_gives = 0.0;
};

/// Gaussian-weighted aggregation of p(Gives) over the interval's windows,
/// centered at the interval midpoint; predicts Gives iff the aggregate >= 0.5.
DirectionAggregate aggregate_direction(const Vec<double>& dir_scores,
                                       const GtEventInterval& interval, double sigma_dir);

inline double direction_sigma(const EvalParams& params, int interval_length) {
  return std::max(params.direction_sigma_floor,
                  params.direction_sigma_fraction * interval_length);
}

struct DirectionResult {
  std::vector<FrameLabel> predicted;        // aligned with truths
  Eigen::Matrix2d confusion;                // rows = truth [R,G], cols = prediction
  Eigen::Matrix2d normalized_confusion;     // rows sum to 1 (all-zero if class absent)
  double f1_receives = 0.0;
  double f1_gives = 0.0;
  double mean_f1 = 0.0;
};

/// Confusion matrix, row-normalized recalls, and class-wise F1 over aligned
/// per-event direction predictions and truths.
DirectionResult direction_metrics(const std::vector<FrameLabel>& predicted,
                                  const std::vector<FrameLabel>& truths);

}  // namespace handover
