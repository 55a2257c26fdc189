#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace handover {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Per-frame annotation. Receives and Gives are the two handover directions,
/// Idle is everything else.
enum class FrameLabel : int { Receives = 0, Gives = 1, Idle = 2 };

constexpr int kNumClasses = 3;
constexpr int kNumDirections = 2;

constexpr int to_index(FrameLabel y) { return static_cast<int>(y); }

inline FrameLabel label_from_index(int v) {
  if (v < 0 || v >= kNumClasses)
    throw std::invalid_argument("frame label out of range: " + std::to_string(v));
  return static_cast<FrameLabel>(v);
}

constexpr bool is_handover(FrameLabel y) { return y != FrameLabel::Idle; }

inline const char* label_name(FrameLabel y) {
  switch (y) {
    case FrameLabel::Receives: return "receives";
    case FrameLabel::Gives: return "gives";
    case FrameLabel::Idle: return "idle";
  }
  throw std::invalid_argument("invalid frame label");
}

inline FrameLabel label_from_name(const std::string& s) {
  if (s == "receives") return FrameLabel::Receives;
  if (s == "gives") return FrameLabel::Gives;
  if (s == "idle") return FrameLabel::Idle;
  throw std::invalid_argument("unknown frame label name: " + s);
}

/// Temporal sampling geometry of one input window: T frames taken at stride
/// s_f, consecutive windows offset by s_s.
struct WindowSpec {
  int frames_per_window = 8;  // T
  int frame_stride = 4;       // s_f
  int sequence_stride = 2;    // s_s

  /// Raw frames one window spans: (T-1)*s_f + 1.
  int extent() const { return (frames_per_window - 1) * frame_stride + 1; }

  void validate() const {
    if (frames_per_window < 2) throw std::invalid_argument("frames_per_window must be >= 2");
    if (frame_stride < 1) throw std::invalid_argument("frame_stride must be >= 1");
    if (sequence_stride < 1) throw std::invalid_argument("sequence_stride must be >= 1");
  }
};

struct Window {
  int start = 0;
  std::vector<int> sampled_indices;
  FrameLabel train_label = FrameLabel::Idle;
  int det_label = 0;
  int eval_positive = 0;
};

// Error taxonomy; the CLI maps these onto its exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace handover
