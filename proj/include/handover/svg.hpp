#pragma once

#include "handover/attribution.hpp"
#include "handover/pipeline.hpp"

#include <filesystem>

namespace handover {

/// Confidence-trace figure for one stream: raw and smoothed detection scores
/// over window ordinals, ground-truth intervals as shaded bands, detected
/// peaks as markers, and the minimum-height threshold as a dashed rule.
void write_signal_svg(const std::filesystem::path& path, const StreamEval& ev,
                      double min_height);

/// Frame-by-dimension relevance heat strip for one attribution map, with a
/// per-frame summary row. Positive relevance renders red, negative blue.
void write_heatstrip_svg(const std::filesystem::path& path, const AttributionMap& map);

}  // namespace handover
