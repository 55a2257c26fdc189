#include "handover/svg.hpp"

#include "handover/stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace handover {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string polyline_points(const Vec<double>& values, double x0, double y0, double plot_w,
                            double plot_h, double x_scale) {
  std::string pts;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double x = x0 + double(i) * x_scale;
    const double y = y0 + plot_h - std::clamp(values[i], 0.0, 1.0) * plot_h;
    pts += fmt(x) + "," + fmt(y) + " ";
    (void)plot_w;
  }
  if (!pts.empty()) pts.pop_back();
  return pts;
}

std::string heat_color(double v) {
  // v in [-1, 1]: blue for negative, red for positive, white at zero.
  const double a = std::clamp(std::abs(v), 0.0, 1.0);
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - a)));
  char buf[16];
  if (v >= 0)
    std::snprintf(buf, sizeof(buf), "#ff%02x%02x", fade, fade);
  else
    std::snprintf(buf, sizeof(buf), "#%02x%02xff", fade, fade);
  return buf;
}

}  // namespace

void write_signal_svg(const std::filesystem::path& path, const StreamEval& ev,
                      double min_height) {
  const int n = ev.signal.size();
  const double margin = 40.0, plot_w = 900.0, plot_h = 220.0;
  const double width = plot_w + 2 * margin, height = plot_h + 2 * margin;
  const double x_scale = n > 1 ? plot_w / double(n - 1) : 0.0;
  auto x_of = [&](double ordinal) { return margin + ordinal * x_scale; };
  auto y_of = [&](double v) { return margin + plot_h - std::clamp(v, 0.0, 1.0) * plot_h; };

  std::ofstream out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& interval : ev.intervals) {
    const double x = x_of(interval.first - 0.5);
    const double w = x_of(interval.last + 0.5) - x;
    const char* tone = interval.direction == FrameLabel::Gives ? "#d9ecd9" : "#fbe3d5";
    out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(w)
        << "\" height=\"" << fmt(plot_h) << "\" fill=\"" << tone << "\"/>\n";
  }

  out << "<line x1=\"" << fmt(margin) << "\" y1=\"" << fmt(y_of(min_height)) << "\" x2=\""
      << fmt(margin + plot_w) << "\" y2=\"" << fmt(y_of(min_height))
      << "\" stroke=\"#999999\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";

  out << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(plot_w)
      << "\" height=\"" << fmt(plot_h)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  out << "<polyline fill=\"none\" stroke=\"#b8cbe4\" stroke-width=\"1\" points=\""
      << polyline_points(ev.signal.det_scores, margin, margin, plot_w, plot_h, x_scale)
      << "\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#2c5f9e\" stroke-width=\"2\" points=\""
      << polyline_points(ev.smoothed, margin, margin, plot_w, plot_h, x_scale) << "\"/>\n";

  for (const auto& peak : ev.peaks)
    out << "<circle cx=\"" << fmt(x_of(peak.index)) << "\" cy=\"" << fmt(y_of(peak.height))
        << "\" r=\"4\" fill=\"#c23b22\"/>\n";

  out << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(margin - 10)
      << "\" font-family=\"sans-serif\" font-size=\"13\">detection confidence (windows: " << n
      << ", events: " << ev.intervals.size() << ", peaks: " << ev.peaks.size() << ")</text>\n";
  out << "</svg>\n";
  if (!out) throw IoError("failed writing figure: " + path.string());
}

void write_heatstrip_svg(const std::filesystem::path& path, const AttributionMap& map) {
  const int T = static_cast<int>(map.relevance.rows());
  const int D = static_cast<int>(map.relevance.cols());
  const double cell = 18.0, margin = 40.0, gap = 12.0;
  const double grid_w = T * cell, grid_h = D * cell;
  const double width = grid_w + 2 * margin;
  const double height = grid_h + cell + gap + 2 * margin + 20.0;
  const double peak = std::max(map.relevance.cwiseAbs().maxCoeff(), 1e-300);

  std::ofstream out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(margin - 12)
      << "\" font-family=\"sans-serif\" font-size=\"13\">relevance, target " << map.target
      << " (rows: embedding dims, bottom strip: per-frame sum)</text>\n";

  for (int t = 0; t < T; ++t)
    for (int d = 0; d < D; ++d)
      out << "<rect x=\"" << fmt(margin + t * cell) << "\" y=\"" << fmt(margin + d * cell)
          << "\" width=\"" << fmt(cell) << "\" height=\"" << fmt(cell) << "\" fill=\""
          << heat_color(map.relevance(t, d) / peak) << "\"/>\n";

  const double strip_peak = std::max(map.frame_scores.cwiseAbs().maxCoeff(), 1e-300);
  for (int t = 0; t < T; ++t)
    out << "<rect x=\"" << fmt(margin + t * cell) << "\" y=\"" << fmt(margin + grid_h + gap)
        << "\" width=\"" << fmt(cell) << "\" height=\"" << fmt(cell) << "\" fill=\""
        << heat_color(map.frame_scores[t] / strip_peak) << "\" stroke=\"#333333\""
        << " stroke-width=\"0.5\"/>\n";

  out << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(grid_w)
      << "\" height=\"" << fmt(grid_h)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  out << "</svg>\n";
  if (!out) throw IoError("failed writing figure: " + path.string());
}

}  // namespace handover
