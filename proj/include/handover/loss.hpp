#pragma once

#include "handover/types.hpp"

#include <cmath>

namespace handover {

inline constexpr double kLogEps = 1e-7;

template <typename Scalar>
struct LossWeightsT {
  Scalar w_pos = Scalar(1.5);
  Vec<Scalar> dir_class_weights = Vec<Scalar>::Ones(kNumDirections);
  Scalar lambda_det = Scalar(2.5);
  Scalar lambda_dir = Scalar(1.0);

  void validate() const {
    if (w_pos < Scalar(0) || lambda_det < Scalar(0) || lambda_dir < Scalar(0))
      throw std::invalid_argument("loss weights must be non-negative");
    if (dir_class_weights.size() != kNumDirections || (dir_class_weights.array() < Scalar(0)).any())
      throw std::invalid_argument("need two non-negative direction class weights");
  }
};

using LossWeights = LossWeightsT<double>;

template <typename Scalar>
struct ScalarLossGrad {
  Scalar loss;
  Scalar grad;
};

/// Weighted binary cross-entropy on a single detection probability.
/// Probabilities are clamped to [eps, 1-eps] before the logarithms; the
/// gradient is the analytic derivative at the clamped point.
template <typename Scalar>
ScalarLossGrad<Scalar> wbce(Scalar p, int y, Scalar w_pos) {
  if (y != 0 && y != 1) throw std::invalid_argument("wbce: label must be 0 or 1");
  const Scalar eps = Scalar(kLogEps);
  const Scalar pc = std::min(std::max(p, eps), Scalar(1) - eps);
  ScalarLossGrad<Scalar> out;
  if (y == 1) {
    out.loss = -w_pos * std::log(pc);
    out.grad = -w_pos / pc;
  } else {
    out.loss = -std::log(Scalar(1) - pc);
    out.grad = Scalar(1) / (Scalar(1) - pc);
  }
  return out;
}

template <typename Scalar>
struct DirLossGrad {
  Scalar loss;
  Vec<Scalar> logit_grad;  // weights[y] * (p_dir - onehot(y))
};

/// Weighted cross-entropy over the two direction classes. The returned
/// gradient lives in logit space, where the softmax Jacobian collapses to
/// the familiar p - onehot form.
template <typename Scalar>
DirLossGrad<Scalar> wce_dir(const Vec<Scalar>& p_dir, FrameLabel y_dir,
                            const Vec<Scalar>& weights) {
  if (!is_handover(y_dir)) throw std::invalid_argument("wce_dir: label must be a direction");
  if (p_dir.size() != kNumDirections || weights.size() != kNumDirections)
    throw std::invalid_argument("wce_dir: need 2-vectors");
  const int cls = to_index(y_dir);
  const Scalar w = weights[cls];
  const Scalar eps = Scalar(kLogEps);
  const Scalar pc = std::min(std::max(p_dir[cls], eps), Scalar(1) - eps);
  DirLossGrad<Scalar> out;
  out.loss = -w * std::log(pc);
  out.logit_grad = w * p_dir;
  out.logit_grad[cls] -= w;
  return out;
}

/// One window's ground truth for the loss: detection target plus the
/// direction class (only consulted when det_label == 1).
struct SampleTarget {
  int det_label = 0;
  FrameLabel direction = FrameLabel::Idle;
};

template <typename Scalar>
struct BatchLoss {
  Scalar total = Scalar(0);
  Scalar detection = Scalar(0);           // mean wbce over the batch
  Scalar direction = Scalar(0);           // mean wce over positive samples (0 if none)
  int num_positive = 0;
  // Per-sample upstream gradients of `total`, ready for net backward:
  // grad_p_det[i] = d total / d p_det_i, grad_dir_logits[i] in logit space.
  std::vector<Scalar> grad_p_det;
  std::vector<Vec<Scalar>> grad_dir_logits;
};

/// Multi-task objective over a batch:
///   L = lambda_det * mean_i wbce_i + lambda_dir * mean_{i: y_i=1} wce_i
/// with the direction term defined as 0 when the batch has no positives.
template <typename Scalar>
BatchLoss<Scalar> total_loss(const std::vector<Scalar>& p_det,
                             const std::vector<Vec<Scalar>>& p_dir,
                             const std::vector<SampleTarget>& targets,
                             const LossWeightsT<Scalar>& lw) {
  const size_t B = targets.size();
  if (B == 0) throw std::invalid_argument("total_loss: empty batch");
  if (p_det.size() != B || p_dir.size() != B)
    throw std::invalid_argument("total_loss: prediction/label count mismatch");
  lw.validate();

  BatchLoss<Scalar> out;
  out.grad_p_det.resize(B);
  out.grad_dir_logits.assign(B, Vec<Scalar>::Zero(kNumDirections));
  for (const auto& t : targets)
    if (t.det_label == 1) ++out.num_positive;
  const Scalar det_scale = lw.lambda_det / Scalar(B);
  const Scalar dir_scale =
      out.num_positive > 0 ? lw.lambda_dir / Scalar(out.num_positive) : Scalar(0);

  for (size_t i = 0; i < B; ++i) {
    const auto det = wbce(p_det[i], targets[i].det_label, lw.w_pos);
    out.detection += det.loss / Scalar(B);
    out.grad_p_det[i] = det_scale * det.grad;
    if (targets[i].det_label == 1) {
      const auto dir = wce_dir(p_dir[i], targets[i].direction, lw.dir_class_weights);
      out.direction += dir.loss / Scalar(out.num_positive);
      out.grad_dir_logits[i] = dir_scale * dir.logit_grad;
    }
  }
  out.total = lw.lambda_det * out.detection + lw.lambda_dir * out.direction;
  return out;
}

/// Inverse-frequency direction weights from training labels, scaled so the
/// frequency-weighted mean weight is 1 (a balanced dataset gets unit
/// weights). Falls back to unit weights when a class is absent.
template <typename Scalar>
Vec<Scalar> inverse_frequency_weights(long receives_count, long gives_count) {
  Vec<Scalar> w = Vec<Scalar>::Ones(kNumDirections);
  if (receives_count <= 0 || gives_count <= 0) return w;
  const Scalar total = Scalar(receives_count + gives_count);
  w[to_index(FrameLabel::Receives)] = total / (Scalar(2) * Scalar(receives_count));
  w[to_index(FrameLabel::Gives)] = total / (Scalar(2) * Scalar(gives_count));
  return w;
}

}  // namespace handover
