#pragma once

#include "handover/net.hpp"

#include <cmath>
#include <numbers>

namespace handover {

/// Warmup + cosine schedule. Linear 0 -> base_lr over the first
/// ceil(warmup_fraction * total_steps) steps, then cosine decay that reaches
/// exactly 0 at step total_steps - 1.
template <typename Scalar>
Scalar lr_at(long step, long total_steps, double warmup_fraction, Scalar base_lr) {
  if (step < 0 || step >= total_steps) throw std::invalid_argument("lr_at: step out of range");
  const long warmup = static_cast<long>(
      std::ceil(warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) return base_lr * Scalar(step) / Scalar(warmup);
  const long span = total_steps - 1 - warmup;
  if (span <= 0) return base_lr;
  const double progress = static_cast<double>(step - warmup) / static_cast<double>(span);
  return base_lr * Scalar(0.5) * Scalar(1.0 + std::cos(std::numbers::pi * progress));
}

template <typename Scalar>
Scalar global_grad_norm(const ModelParamsT<Scalar>& grads) {
  Scalar sq = Scalar(0);
  auto refs = tensor_refs(const_cast<ModelParamsT<Scalar>&>(grads));
  for (const auto& ref : refs)
    sq += Eigen::Map<const Vec<Scalar>>(ref.data, ref.size()).squaredNorm();
  return std::sqrt(sq);
}

/// Global-L2 clipping: if the norm exceeds max_norm, every tensor is scaled
/// by max_norm / norm. Returns the pre-clip norm.
template <typename Scalar>
Scalar clip_grad_norm(ModelParamsT<Scalar>& grads, Scalar max_norm) {
  if (max_norm <= Scalar(0)) throw std::invalid_argument("clip_grad_norm: max_norm must be > 0");
  const Scalar norm = global_grad_norm(grads);
  if (norm > max_norm) scale_params(grads, max_norm / norm);
  return norm;
}

struct AdamwHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Scalar>
struct OptimizerStateT {
  ModelParamsT<Scalar> m;  // first moments
  ModelParamsT<Scalar> v;  // second moments
  long step = 0;           // completed updates

  static OptimizerStateT zero(const ModelDims& dims) {
    OptimizerStateT s;
    s.m.set_zero(dims);
    s.v.set_zero(dims);
    return s;
  }
};

using OptimizerState = OptimizerStateT<double>;

namespace detail {

/// Core AdamW update on one flat tensor. Decoupled weight decay is applied
/// to the parameters before the Adam delta; moments use the raw gradient.
template <typename Scalar>
void adamw_update_tensor(Scalar* theta, const Scalar* grad, Scalar* m, Scalar* v, Eigen::Index n,
                         Scalar lr, Scalar weight_decay, const AdamwHyper& h, long step_count) {
  const Scalar b1 = Scalar(h.beta1), b2 = Scalar(h.beta2), eps = Scalar(h.eps);
  const Scalar bc1 = Scalar(1) - std::pow(b1, Scalar(step_count));
  const Scalar bc2 = Scalar(1) - std::pow(b2, Scalar(step_count));
  for (Eigen::Index i = 0; i < n; ++i) {
    theta[i] -= lr * weight_decay * theta[i];
    m[i] = b1 * m[i] + (Scalar(1) - b1) * grad[i];
    v[i] = b2 * v[i] + (Scalar(1) - b2) * grad[i] * grad[i];
    const Scalar m_hat = m[i] / bc1;
    const Scalar v_hat = v[i] / bc2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace detail

/// Single-group AdamW step: one learning rate and decay for every tensor.
template <typename Scalar>
void adamw_step(ModelParamsT<Scalar>& params, const ModelParamsT<Scalar>& grads,
                OptimizerStateT<Scalar>& state, Scalar lr, Scalar weight_decay,
                const AdamwHyper& hyper = {}) {
  state.step += 1;
  auto tp = tensor_refs(params);
  auto tg = tensor_refs(const_cast<ModelParamsT<Scalar>&>(grads));
  auto tm = tensor_refs(state.m);
  auto tv = tensor_refs(state.v);
  for (size_t i = 0; i < tp.size(); ++i)
    detail::adamw_update_tensor(tp[i].data, tg[i].data, tm[i].data, tv[i].data, tp[i].size(), lr,
                                weight_decay, hyper, state.step);
}

template <typename Scalar>
struct GroupHyper {
  Scalar lr_projection;
  Scalar lr_temporal;
  Scalar wd_projection;
  Scalar wd_temporal;
};

/// Two-group AdamW step: the projection tensors use one (lr, decay) pair and
/// the LSTM + head tensors another, sharing a single step counter.
template <typename Scalar>
void adamw_step_grouped(ModelParamsT<Scalar>& params, const ModelParamsT<Scalar>& grads,
                        OptimizerStateT<Scalar>& state, const GroupHyper<Scalar>& g,
                        const AdamwHyper& hyper = {}) {
  state.step += 1;
  auto tp = tensor_refs(params);
  auto tg = tensor_refs(const_cast<ModelParamsT<Scalar>&>(grads));
  auto tm = tensor_refs(state.m);
  auto tv = tensor_refs(state.v);
  for (size_t i = 0; i < tp.size(); ++i) {
    const bool proj = tp[i].group == ParamGroup::Projection;
    detail::adamw_update_tensor(tp[i].data, tg[i].data, tm[i].data, tv[i].data, tp[i].size(),
                                proj ? g.lr_projection : g.lr_temporal,
                                proj ? g.wd_projection : g.wd_temporal, hyper, state.step);
  }
}

}  // namespace handover
