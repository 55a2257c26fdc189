#include "handover/windowing.hpp"

#include <array>

namespace handover {

std::vector<int> enumerate_windows(int num_frames, const WindowSpec& spec) {
  spec.validate();
  std::vector<int> starts;
  const int last_start = num_frames - spec.extent();
  for (int t = 0; t <= last_start; t += spec.sequence_stride) starts.push_back(t);
  return starts;
}

std::vector<int> central_vote_positions(int frames_per_window) {
  std::vector<int> pos;
  if (frames_per_window <= 5) {
    for (int k = 0; k < frames_per_window; ++k) pos.push_back(k);
    return pos;
  }
  // T=8 yields {2,3,4,5,6}: two sampled frames of context before the vote
  // window, one after.
  const int first = (frames_per_window - 4) / 2;
  for (int k = first; k < first + 5; ++k) pos.push_back(k);
  return pos;
}

FrameLabel window_train_label(const std::vector<FrameLabel>& labels, int start,
                              const WindowSpec& spec) {
  std::array<int, kNumClasses> counts{};
  std::array<int, kNumClasses> first_seen{};
  first_seen.fill(-1);
  int order = 0;
  for (int k : central_vote_positions(spec.frames_per_window)) {
    const int idx = start + k * spec.frame_stride;
    if (idx < 0 || idx >= static_cast<int>(labels.size()))
      throw std::out_of_range("window frame index outside stream");
    const int c = to_index(labels[idx]);
    ++counts[c];
    if (first_seen[c] < 0) first_seen[c] = order;
    ++order;
  }
  int best = to_index(FrameLabel::Idle);
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0) continue;
    if (counts[c] > counts[best]) {
      best = c;
      continue;
    }
    if (counts[c] < counts[best] || c == best) continue;
    // Tied count: handover beats Idle, earliest occurrence breaks R/G ties.
    const FrameLabel cand = label_from_index(c);
    const FrameLabel cur = label_from_index(best);
    if (is_handover(cand) && !is_handover(cur)) {
      best = c;
    } else if (is_handover(cand) && is_handover(cur) && first_seen[c] < first_seen[best]) {
      best = c;
    }
  }
  return label_from_index(best);
}

int window_eval_positive(const std::vector<FrameLabel>& labels, int start,
                         const WindowSpec& spec) {
  const int last = start + spec.extent() - 1;
  if (start < 0 || last >= static_cast<int>(labels.size()))
    throw std::out_of_range("window extent outside stream");
  for (int t = start; t <= last; ++t)
    if (is_handover(labels[t])) return 1;
  return 0;
}

Window make_window(const std::vector<FrameLabel>& labels, int start, const WindowSpec& spec) {
  Window w;
  w.start = start;
  w.sampled_indices.reserve(spec.frames_per_window);
  for (int k = 0; k < spec.frames_per_window; ++k)
    w.sampled_indices.push_back(start + k * spec.frame_stride);
  w.train_label = window_train_label(labels, start, spec);
  w.det_label = derive_detection_label(w.train_label);
  w.eval_positive = window_eval_positive(labels, start, spec);
  return w;
}

}  // namespace handover
