#include "handover/events.hpp"

#include "handover/windowing.hpp"

#include <algorithm>

namespace handover {

void ConfidenceSignal::validate() const {
  const int n = size();
  if (det_scores.size() != n || dir_scores.size() != n)
    throw std::invalid_argument("confidence signal arrays must have equal length");
  for (int i = 1; i < n; ++i)
    if (window_starts[i] <= window_starts[i - 1])
      throw std::invalid_argument("window starts must be strictly ascending");
  auto in_unit = [](const Vec<double>& v) {
    return (v.array() >= 0.0).all() && (v.array() <= 1.0).all();
  };
  if (!in_unit(det_scores) || !in_unit(dir_scores))
    throw std::invalid_argument("confidence scores must lie in [0,1]");
}

std::vector<Peak> find_peaks(const Vec<double>& signal, double min_height,
                             double prominence_frac) {
  const int n = static_cast<int>(signal.size());
  std::vector<Peak> peaks;
  if (n < 3) return peaks;

  // Candidate local maxima, plateaus collapsed to their floor midpoint.
  std::vector<int> candidates;
  int i = 1;
  while (i < n - 1) {
    if (signal[i] > signal[i - 1]) {
      int j = i;
      while (j < n - 1 && signal[j + 1] == signal[i]) ++j;
      if (j < n - 1 && signal[j + 1] < signal[i]) candidates.push_back((i + j) / 2);
      i = j + 1;
    } else {
      ++i;
    }
  }

  const double range = signal.maxCoeff() - signal.minCoeff();
  const double min_prominence = prominence_frac * range;
  for (int c : candidates) {
    const double h = signal[c];
    double left_base = h;
    for (int k = c - 1; k >= 0; --k) {
      if (signal[k] > h) break;
      left_base = std::min(left_base, signal[k]);
    }
    double right_base = h;
    for (int k = c + 1; k < n; ++k) {
      if (signal[k] > h) break;
      right_base = std::min(right_base, signal[k]);
    }
    const double prominence = h - std::max(left_base, right_base);
    if (h >= min_height && prominence >= min_prominence)
      peaks.push_back({c, h, prominence});
  }
  return peaks;
}

std::vector<GtEventInterval> gt_intervals(const std::vector<FrameLabel>& frame_labels,
                                          const std::vector<int>& window_starts,
                                          const WindowSpec& spec) {
  spec.validate();
  const int extent = spec.extent();
  const int W = static_cast<int>(window_starts.size());
  std::vector<GtEventInterval> intervals;
  int run_start = -1;
  auto close_run = [&](int run_end) {
    GtEventInterval iv;
    iv.first = run_start;
    iv.last = run_end;
    iv.direction = FrameLabel::Idle;
    const int lo = window_starts[run_start];
    const int hi = std::min(window_starts[run_end] + extent,
                            static_cast<int>(frame_labels.size()));
    for (int t = lo; t < hi; ++t) {
      if (is_handover(frame_labels[t])) {
        iv.direction = frame_labels[t];
        break;
      }
    }
    intervals.push_back(iv);
    run_start = -1;
  };
  for (int w = 0; w < W; ++w) {
    const bool positive = window_eval_positive(frame_labels, window_starts[w], spec) == 1;
    if (positive && run_start < 0) run_start = w;
    if (!positive && run_start >= 0) close_run(w - 1);
  }
  if (run_start >= 0) close_run(W - 1);
  return intervals;
}

EventMatchResult match_events(const std::vector<Peak>& peaks,
                              const std::vector<GtEventInterval>& intervals, int tol) {
  if (tol < 0) throw std::invalid_argument("match tolerance must be non-negative");
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].first > intervals[i].last)
      throw std::invalid_argument("event interval is empty");
    if (i > 0 && intervals[i].first <= intervals[i - 1].last)
      throw std::invalid_argument("event intervals must be sorted and disjoint");
  }
  std::vector<Peak> ordered = peaks;
  std::sort(ordered.begin(), ordered.end(),
            [](const Peak& a, const Peak& b) { return a.index < b.index; });

  EventMatchResult result;
  std::vector<bool> taken(intervals.size(), false);
  for (std::size_t p = 0; p < ordered.size(); ++p) {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (taken[i]) continue;
      if (ordered[p].index >= intervals[i].first - tol &&
          ordered[p].index <= intervals[i].last + tol) {
        taken[i] = true;
        result.pairs.emplace_back(static_cast<int>(p), static_cast<int>(i));
        break;
      }
    }
  }
  result.tp = static_cast<int>(result.pairs.size());
  result.fp = static_cast<int>(peaks.size()) - result.tp;
  result.fn = static_cast<int>(intervals.size()) - result.tp;
  return result;
}

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_from_counts(double tp, double fp, double fn) {
  const double precision = safe_ratio(tp, tp + fp);
  const double recall = safe_ratio(tp, tp + fn);
  return safe_ratio(2.0 * precision * recall, precision + recall);
}

}  // namespace

DetectionMetrics detection_metrics(const EventMatchResult& result) {
  DetectionMetrics m;
  m.precision = safe_ratio(result.tp, result.tp + result.fp);
  m.recall = safe_ratio(result.tp, result.tp + result.fn);
  m.f1 = safe_ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

DirectionAggregate aggregate_direction(const Vec<double>& dir_scores,
                                       const GtEventInterval& interval, double sigma_dir) {
  if (interval.first > interval.last) throw std::invalid_argument("empty event interval");
  if (interval.first < 0 || interval.last >= dir_scores.size())
    throw std::invalid_argument("event interval outside the signal");
  if (!(sigma_dir > 0)) throw std::invalid_argument("sigma_dir must be positive");

  const double mid = 0.5 * (interval.first + interval.last);
  double weight_sum = 0.0;
  double acc = 0.0;
  for (int w = interval.first; w <= interval.last; ++w) {
    const double d = (w - mid) / sigma_dir;
    const double weight = std::exp(-0.5 * d * d);
    weight_sum += weight;
    acc += weight * dir_scores[w];
  }
  DirectionAggregate out;
  out.p_gives = acc / weight_sum;
  out.predicted = out.p_gives >= 0.5 ? FrameLabel::Gives : FrameLabel::Receives;
  return out;
}

DirectionResult direction_metrics(const std::vector<FrameLabel>& predicted,
                                  const std::vector<FrameLabel>& truths) {
  if (predicted.size() != truths.size())
    throw std::invalid_argument("direction metrics need aligned prediction/truth lists");
  DirectionResult r;
  r.predicted = predicted;
  r.confusion.setZero();
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!is_handover(truths[i]) || !is_handover(predicted[i]))
      throw std::invalid_argument("direction metrics accept only Receives/Gives labels");
    r.confusion(to_index(truths[i]), to_index(predicted[i])) += 1.0;
  }
  r.normalized_confusion.setZero();
  for (int row = 0; row < 2; ++row) {
    const double row_sum = r.confusion.row(row).sum();
    if (row_sum > 0) r.normalized_confusion.row(row) = r.confusion.row(row) / row_sum;
  }
  const int ri = to_index(FrameLabel::Receives);
  const int gi = to_index(FrameLabel::Gives);
  r.f1_receives = f1_from_counts(r.confusion(ri, ri), r.confusion(gi, ri), r.confusion(ri, gi));
  r.f1_gives = f1_from_counts(r.confusion(gi, gi), r.confusion(ri, gi), r.confusion(gi, ri));
  r.mean_f1 = 0.5 * (r.f1_receives + r.f1_gives);
  return r;
}

}  // namespace handover
