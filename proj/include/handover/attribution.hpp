#pragma once

#include "handover/net.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace handover {

struct AttributionTarget {
  enum class Head { Detection, Direction };
  Head head = Head::Detection;
  FrameLabel direction = FrameLabel::Gives;  // consulted when head == Direction

  std::string name() const {
    if (head == Head::Detection) return "det";
    return std::string("dir:") + label_name(direction);
  }
};

/// Signed per-frame, per-dimension relevance for one window and target.
struct AttributionMap {
  Mat<double> relevance;      // T x D
  Vec<double> frame_scores;   // per-frame sum of signed relevance
  std::string target;
  std::string baseline;       // human-readable description
  int steps = 0;              // path steps (0 for gradient-times-input)
};

/// Scalar-valued differentiable function of a T x D input: returns the value
/// and fills the gradient (same shape as the input).
template <typename Scalar>
using ValueGradFn = std::function<Scalar(const Mat<Scalar>&, Mat<Scalar>&)>;

/// Pre-nonlinearity logit of the chosen head at an embedding sequence, with
/// its gradient w.r.t. the embeddings.
double target_logit(const ModelParams& params, const Mat<double>& embeddings,
                    const AttributionTarget& target, Mat<double>* grad = nullptr);

/// Wraps (params, target) as a ValueGradFn over embedding sequences.
ValueGradFn<double> make_logit_fn(const ModelParams& params, const AttributionTarget& target);

/// Integrated gradients of a generic scalar function along the straight path
/// from `baseline` to `input`, midpoint-rule quadrature with `steps` points:
///   IG = (input - baseline) .* mean_k grad F(baseline + alpha_k (input - baseline)),
///   alpha_k = (k + 0.5) / steps.
template <typename Scalar>
Mat<Scalar> integrated_gradients_fn(const ValueGradFn<Scalar>& fn, const Mat<Scalar>& input,
                                    const Mat<Scalar>& baseline, int steps) {
  if (steps < 1) throw std::invalid_argument("integrated gradients need at least one step");
  if (input.rows() != baseline.rows() || input.cols() != baseline.cols())
    throw std::invalid_argument("input and baseline shapes differ");
  const Mat<Scalar> delta = input - baseline;
  Mat<Scalar> grad_sum = Mat<Scalar>::Zero(input.rows(), input.cols());
  Mat<Scalar> grad(input.rows(), input.cols());
  for (int k = 0; k < steps; ++k) {
    const Scalar alpha = (Scalar(k) + Scalar(0.5)) / Scalar(steps);
    const Mat<Scalar> point = baseline + alpha * delta;
    fn(point, grad);
    grad_sum += grad;
  }
  return delta.cwiseProduct(grad_sum / Scalar(steps));
}

/// Integrated gradients of the target head's logit over an embedding
/// sequence; baseline defaults to the all-zero sequence.
AttributionMap integrated_gradients(const ModelParams& params, const Mat<double>& embeddings,
                                    const Mat<double>& baseline, int steps,
                                    const AttributionTarget& target);
AttributionMap integrated_gradients(const ModelParams& params, const Mat<double>& embeddings,
                                    int steps, const AttributionTarget& target);

/// Fast single-evaluation map: relevance = embeddings .* grad logit.
AttributionMap grad_x_input(const ModelParams& params, const Mat<double>& embeddings,
                            const AttributionTarget& target);

/// Per-frame signed relevance sums (equals map.frame_scores).
Vec<double> frame_relevance(const AttributionMap& map);
/// Per-frame sums of |relevance|.
Vec<double> frame_relevance_abs(const AttributionMap& map);

/// CSV rows frame,dim,relevance with a header line. When `completeness` is
/// given as (sum of relevance, F(input) - F(baseline)), both values are
/// appended as comment footer lines.
void write_attribution_csv(const std::filesystem::path& path, const AttributionMap& map,
                           const std::optional<std::pair<double, double>>& completeness = {});

}  // namespace handover
