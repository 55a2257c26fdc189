#pragma once

#include "handover/types.hpp"

#include <filesystem>
#include <fstream>

namespace handover {

// Shared file helpers: open-or-throw plus the round-trip-exact double
// rendering (17 significant digits) used by every text emitter in the library.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);
std::string format_double(double v);

/// One video segment after feature extraction: a per-frame class label and a
/// per-frame feature vector. Frame pixel dimensions are carried as provenance
/// metadata only; the pixels themselves never enter this library.
struct LabeledFrameStream {
  int num_frames = 0;
  std::vector<FrameLabel> labels;
  Eigen::MatrixXd features;  // num_frames x feature_dim
  int frame_height = 0;
  int frame_width = 0;

  int feature_dim() const { return static_cast<int>(features.cols()); }
  void validate() const;
};

// On-disk stream formats. JSONL: one frame per line with fields
// frame_index, label, features. CSV: header row frame_index,label,f0..f{F-1}.
// Frames must appear in order 0..N-1 in both formats.
LabeledFrameStream read_stream_jsonl(const std::filesystem::path& path);
void write_stream_jsonl(const std::filesystem::path& path, const LabeledFrameStream& s);
LabeledFrameStream read_stream_csv(const std::filesystem::path& path);
void write_stream_csv(const std::filesystem::path& path, const LabeledFrameStream& s);

/// Gather the sampled frame features of the window starting at `start` into a
/// T x F matrix (one row per sampled frame).
Eigen::MatrixXd gather_window_features(const LabeledFrameStream& s, int start,
                                       const WindowSpec& spec);

}  // namespace handover
