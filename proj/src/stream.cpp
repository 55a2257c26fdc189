#include "handover/stream.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace handover {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

void LabeledFrameStream::validate() const {
  if (static_cast<int>(labels.size()) != num_frames)
    throw IoError("stream labels length does not match num_frames");
  if (static_cast<int>(features.rows()) != num_frames)
    throw IoError("stream feature rows do not match num_frames");
}

LabeledFrameStream read_stream_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  LabeledFrameStream s;
  std::vector<std::vector<double>> rows;
  std::string line;
  int expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int idx = 0;
    int label = 0;
    std::vector<double> feats;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      idx = j.at("frame_index").get<int>();
      label = j.at("label").get<int>();
      feats = j.at("features").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ": bad JSONL line " + std::to_string(expect) + ": " + e.what());
    }
    if (idx != expect)
      throw IoError(path.string() + ": frame_index " + std::to_string(idx) +
                    " out of order, expected " + std::to_string(expect));
    try {
      s.labels.push_back(label_from_index(label));
    } catch (const std::invalid_argument& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    rows.push_back(std::move(feats));
    if (rows.back().size() != rows.front().size())
      throw IoError(path.string() + ": inconsistent feature dimension");
    ++expect;
  }
  s.num_frames = expect;
  const int dim = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  s.features.resize(s.num_frames, dim);
  for (int i = 0; i < s.num_frames; ++i)
    for (int f = 0; f < dim; ++f) s.features(i, f) = rows[i][f];
  return s;
}

void write_stream_jsonl(const std::filesystem::path& path, const LabeledFrameStream& s) {
  s.validate();
  auto out = open_output(path);
  for (int i = 0; i < s.num_frames; ++i) {
    nlohmann::ordered_json j;
    j["frame_index"] = i;
    j["label"] = to_index(s.labels[i]);
    auto& feats = j["features"] = nlohmann::json::array();
    for (int f = 0; f < s.feature_dim(); ++f) feats.push_back(s.features(i, f));
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

LabeledFrameStream read_stream_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  LabeledFrameStream s;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing CSV header");
  int dim = -1;
  {
    std::stringstream hs(line);
    std::string col;
    int ncols = 0;
    while (std::getline(hs, col, ',')) ++ncols;
    if (ncols < 2) throw IoError(path.string() + ": CSV header too short");
    dim = ncols - 2;
  }
  std::vector<std::vector<double>> rows;
  int expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path.string() + ": bad CSV value '" + cell + "'");
      }
    }
    if (static_cast<int>(vals.size()) != dim + 2)
      throw IoError(path.string() + ": CSV row width mismatch at frame " + std::to_string(expect));
    if (static_cast<int>(vals[0]) != expect)
      throw IoError(path.string() + ": frame_index out of order at row " + std::to_string(expect));
    try {
      s.labels.push_back(label_from_index(static_cast<int>(vals[1])));
    } catch (const std::invalid_argument& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    rows.emplace_back(vals.begin() + 2, vals.end());
    ++expect;
  }
  s.num_frames = expect;
  s.features.resize(s.num_frames, dim);
  for (int i = 0; i < s.num_frames; ++i)
    for (int f = 0; f < dim; ++f) s.features(i, f) = rows[i][f];
  return s;
}

void write_stream_csv(const std::filesystem::path& path, const LabeledFrameStream& s) {
  s.validate();
  auto out = open_output(path);
  out << "frame_index,label";
  for (int f = 0; f < s.feature_dim(); ++f) out << ",f" << f;
  out << '\n';
  for (int i = 0; i < s.num_frames; ++i) {
    out << i << ',' << to_index(s.labels[i]);
    for (int f = 0; f < s.feature_dim(); ++f) out << ',' << format_double(s.features(i, f));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Eigen::MatrixXd gather_window_features(const LabeledFrameStream& s, int start,
                                       const WindowSpec& spec) {
  Eigen::MatrixXd out(spec.frames_per_window, s.features.cols());
  for (int k = 0; k < spec.frames_per_window; ++k) {
    const int idx = start + k * spec.frame_stride;
    if (idx < 0 || idx >= s.num_frames) throw std::out_of_range("window frame outside stream");
    out.row(k) = s.features.row(idx);
  }
  return out;
}

}  // namespace handover
