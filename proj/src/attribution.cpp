#include "handover/attribution.hpp"

#include "handover/stream.hpp"

namespace handover {

double target_logit(const ModelParams& params, const Mat<double>& embeddings,
                    const AttributionTarget& target, Mat<double>* grad) {
  auto cache = forward_from_embeddings(embeddings, params);
  double value;
  double g_det = 0.0;
  Vec<double> g_dir = Vec<double>::Zero(kNumDirections);
  if (target.head == AttributionTarget::Head::Detection) {
    value = cache.det_logit;
    g_det = 1.0;
  } else {
    if (!is_handover(target.direction))
      throw std::invalid_argument("direction target must be Receives or Gives");
    const int cls = to_index(target.direction);
    value = cache.dir_logits[cls];
    g_dir[cls] = 1.0;
  }
  if (grad) {
    auto back = backward_from_logits(cache, params, g_det, g_dir);
    *grad = std::move(back.d_embeddings);
  }
  return value;
}

ValueGradFn<double> make_logit_fn(const ModelParams& params, const AttributionTarget& target) {
  return [&params, target](const Mat<double>& x, Mat<double>& grad) {
    return target_logit(params, x, target, &grad);
  };
}

namespace {

AttributionMap finish_map(Mat<double> relevance, const AttributionTarget& target,
                          std::string baseline, int steps) {
  AttributionMap map;
  map.frame_scores = relevance.rowwise().sum();
  map.relevance = std::move(relevance);
  map.target = target.name();
  map.baseline = std::move(baseline);
  map.steps = steps;
  return map;
}

}  // namespace

AttributionMap integrated_gradients(const ModelParams& params, const Mat<double>& embeddings,
                                    const Mat<double>& baseline, int steps,
                                    const AttributionTarget& target) {
  auto fn = make_logit_fn(params, target);
  Mat<double> rel = integrated_gradients_fn<double>(fn, embeddings, baseline, steps);
  const bool zero_baseline = baseline.isZero(0.0);
  return finish_map(std::move(rel), target, zero_baseline ? "zero" : "custom", steps);
}

AttributionMap integrated_gradients(const ModelParams& params, const Mat<double>& embeddings,
                                    int steps, const AttributionTarget& target) {
  return integrated_gradients(
      params, embeddings, Mat<double>::Zero(embeddings.rows(), embeddings.cols()), steps, target);
}

AttributionMap grad_x_input(const ModelParams& params, const Mat<double>& embeddings,
                            const AttributionTarget& target) {
  Mat<double> grad;
  target_logit(params, embeddings, target, &grad);
  return finish_map(embeddings.cwiseProduct(grad), target, "none", 0);
}

Vec<double> frame_relevance(const AttributionMap& map) { return map.frame_scores; }

Vec<double> frame_relevance_abs(const AttributionMap& map) {
  return map.relevance.cwiseAbs().rowwise().sum();
}

void write_attribution_csv(const std::filesystem::path& path, const AttributionMap& map,
                           const std::optional<std::pair<double, double>>& completeness) {
  std::ofstream out = open_output(path);
  out << "frame,dim,relevance\n";
  for (Eigen::Index t = 0; t < map.relevance.rows(); ++t)
    for (Eigen::Index d = 0; d < map.relevance.cols(); ++d)
      out << t << ',' << d << ',' << format_double(map.relevance(t, d)) << '\n';
  if (completeness) {
    out << "# relevance_sum," << format_double(completeness->first) << '\n';
    out << "# target_delta," << format_double(completeness->second) << '\n';
  }
  if (!out) throw IoError("failed writing attribution: " + path.string());
}

}  // namespace handover
