#pragma once

#include "handover/types.hpp"

namespace handover {

/// All window start indices that fit into a stream of num_frames frames:
/// multiples of the sequence stride whose full extent stays inside the stream.
/// A stream shorter than one window yields an empty list.
std::vector<int> enumerate_windows(int num_frames, const WindowSpec& spec);

/// Sampled positions (0-based, within the T sampled frames) that take part in
/// the majority vote. Five central positions for T >= 5, slightly biased so
/// that more context precedes the vote than follows it; all positions for
/// smaller T.
std::vector<int> central_vote_positions(int frames_per_window);

/// Majority class over the central sampled frames of the window starting at
/// `start`. Ties: a handover class beats Idle; between Receives and Gives the
/// class seen earliest among the voted frames wins.
FrameLabel window_train_label(const std::vector<FrameLabel>& labels, int start,
                              const WindowSpec& spec);

/// Binary detection target: 1 for Receives/Gives, 0 for Idle.
constexpr int derive_detection_label(FrameLabel y) { return is_handover(y) ? 1 : 0; }

/// 1 iff any raw frame in the window's full temporal extent carries a
/// handover label. This is the evaluation-side notion of a positive window.
int window_eval_positive(const std::vector<FrameLabel>& labels, int start,
                         const WindowSpec& spec);

/// Assemble a Window with sampled indices and all derived labels.
Window make_window(const std::vector<FrameLabel>& labels, int start, const WindowSpec& spec);

}  // namespace handover
