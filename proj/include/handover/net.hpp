#pragma once

#include "handover/types.hpp"

#include <cmath>
#include <random>

namespace handover {

struct ModelDims {
  int feature_dim = 0;    // F
  int embedding_dim = 64; // D
  int hidden_dim = 64;    // H
  static constexpr int num_directions = kNumDirections;

  void validate() const {
    if (feature_dim < 1 || embedding_dim < 1 || hidden_dim < 1)
      throw std::invalid_argument("model dimensions must be positive");
  }
  bool operator==(const ModelDims&) const = default;
};

enum class ParamGroup { Projection, Temporal };

/// All trainable tensors. The stacked LSTM gate rows are ordered
/// (input, forget, candidate, output); rows [H,2H) are the forget gate.
template <typename Scalar>
struct ModelParamsT {
  Mat<Scalar> proj_w;     // D x F
  Vec<Scalar> proj_b;     // D
  Mat<Scalar> lstm_w_in;  // 4H x D
  Mat<Scalar> lstm_w_rec; // 4H x H
  Vec<Scalar> lstm_b;     // 4H
  RowVec<Scalar> det_w;   // 1 x H
  Vec<Scalar> det_b;      // 1
  Mat<Scalar> dir_w;      // 2 x H
  Vec<Scalar> dir_b;      // 2

  ModelDims dims() const {
    ModelDims d;
    d.feature_dim = static_cast<int>(proj_w.cols());
    d.embedding_dim = static_cast<int>(proj_w.rows());
    d.hidden_dim = static_cast<int>(lstm_w_rec.cols());
    return d;
  }

  void set_zero(const ModelDims& d) {
    proj_w = Mat<Scalar>::Zero(d.embedding_dim, d.feature_dim);
    proj_b = Vec<Scalar>::Zero(d.embedding_dim);
    lstm_w_in = Mat<Scalar>::Zero(4 * d.hidden_dim, d.embedding_dim);
    lstm_w_rec = Mat<Scalar>::Zero(4 * d.hidden_dim, d.hidden_dim);
    lstm_b = Vec<Scalar>::Zero(4 * d.hidden_dim);
    det_w = RowVec<Scalar>::Zero(d.hidden_dim);
    det_b = Vec<Scalar>::Zero(1);
    dir_w = Mat<Scalar>::Zero(kNumDirections, d.hidden_dim);
    dir_b = Vec<Scalar>::Zero(kNumDirections);
  }
};

using ModelParams = ModelParamsT<double>;

/// Flat view over every tensor, in checkpoint order.
template <typename Scalar>
struct TensorRef {
  const char* name;
  Scalar* data;
  Eigen::Index rows;
  Eigen::Index cols;  // 1 for vectors
  ParamGroup group;
  Eigen::Index size() const { return rows * cols; }
};

template <typename Scalar>
std::vector<TensorRef<Scalar>> tensor_refs(ModelParamsT<Scalar>& p) {
  using R = TensorRef<Scalar>;
  return {
      R{"proj_w", p.proj_w.data(), p.proj_w.rows(), p.proj_w.cols(), ParamGroup::Projection},
      R{"proj_b", p.proj_b.data(), p.proj_b.size(), 1, ParamGroup::Projection},
      R{"lstm_w_in", p.lstm_w_in.data(), p.lstm_w_in.rows(), p.lstm_w_in.cols(),
        ParamGroup::Temporal},
      R{"lstm_w_rec", p.lstm_w_rec.data(), p.lstm_w_rec.rows(), p.lstm_w_rec.cols(),
        ParamGroup::Temporal},
      R{"lstm_b", p.lstm_b.data(), p.lstm_b.size(), 1, ParamGroup::Temporal},
      R{"det_w", p.det_w.data(), 1, p.det_w.size(), ParamGroup::Temporal},
      R{"det_b", p.det_b.data(), 1, 1, ParamGroup::Temporal},
      R{"dir_w", p.dir_w.data(), p.dir_w.rows(), p.dir_w.cols(), ParamGroup::Temporal},
      R{"dir_b", p.dir_b.data(), p.dir_b.size(), 1, ParamGroup::Temporal},
  };
}

/// Weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)); biases zero except the LSTM
/// forget-gate bias, which starts at 1. Draws are made in double and cast, so
/// the same seed gives the same parameters for every scalar type.
template <typename Scalar>
ModelParamsT<Scalar> init_params(const ModelDims& dims, std::uint64_t seed) {
  dims.validate();
  ModelParamsT<Scalar> p;
  p.set_zero(dims);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](auto& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = static_cast<Scalar>(dist(rng));
  };
  fill(p.proj_w, dims.feature_dim);
  fill(p.lstm_w_in, dims.embedding_dim);
  fill(p.lstm_w_rec, dims.hidden_dim);
  fill(p.det_w, dims.hidden_dim);
  fill(p.dir_w, dims.hidden_dim);
  p.lstm_b.segment(dims.hidden_dim, dims.hidden_dim).setConstant(Scalar(1));
  return p;
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  // Clamped-exponent form: never exponentiates a positive argument.
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

/// Softmax with max subtraction; components in (0,1), summing to 1.
template <typename Scalar>
Vec<Scalar> stable_softmax(const Vec<Scalar>& logits) {
  const Scalar m = logits.maxCoeff();
  Vec<Scalar> e = (logits.array() - m).exp();
  return e / e.sum();
}

/// Everything the backward pass needs from one forward pass.
template <typename Scalar>
struct ForwardCacheT {
  bool has_features = false;
  Mat<Scalar> features;    // T x F (absent when the pass started from embeddings)
  Mat<Scalar> proj_mask;   // T x D inverted-dropout mask (ones in eval mode)
  Mat<Scalar> embeddings;  // T x D, post-dropout input to the LSTM
  Mat<Scalar> preact;      // T x 4H gate pre-activations
  Mat<Scalar> gate_in;     // T x H
  Mat<Scalar> gate_forget; // T x H
  Mat<Scalar> gate_cand;   // T x H
  Mat<Scalar> gate_out;    // T x H
  Mat<Scalar> cell;        // T x H
  Mat<Scalar> cell_tanh;   // T x H
  Mat<Scalar> hidden;      // T x H
  Vec<Scalar> z;           // final hidden state
  Vec<Scalar> z_mask;      // H, LSTM-output dropout mask (ones in eval mode)
  Vec<Scalar> z_dropped;   // input to the heads
  Scalar det_logit = Scalar(0);
  Vec<Scalar> dir_logits;
  Scalar p_det = Scalar(0);
  Vec<Scalar> p_dir;

  int steps() const { return static_cast<int>(embeddings.rows()); }
};

using ForwardCache = ForwardCacheT<double>;

/// Training-mode dropout rates. Passing rng == nullptr to the forward
/// functions selects eval mode and both rates are ignored.
struct DropoutSpec {
  double projection = 0.0;
  double lstm_output = 0.0;
};

template <typename Scalar>
Mat<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64* rng) {
  if (rng == nullptr || rate <= 0.0) return Mat<Scalar>::Ones(rows, cols);
  if (rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0,1)");
  Mat<Scalar> mask(rows, cols);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Scalar keep_scale = Scalar(1.0 / (1.0 - rate));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      mask(r, c) = unit(rng[0]) < rate ? Scalar(0) : keep_scale;
  return mask;
}

/// Linear projection of per-frame features into embedding space, with
/// inverted dropout in training mode (rng != nullptr).
template <typename Scalar>
Mat<Scalar> project(const Mat<Scalar>& features, const ModelParamsT<Scalar>& p,
                    double dropout_rate, std::mt19937_64* rng,
                    Mat<Scalar>* mask_out = nullptr) {
  if (features.cols() != p.proj_w.cols())
    throw std::invalid_argument("project: feature dimension mismatch");
  Mat<Scalar> e = features * p.proj_w.transpose();
  e.rowwise() += p.proj_b.transpose();
  Mat<Scalar> mask = dropout_mask<Scalar>(e.rows(), e.cols(), dropout_rate, rng);
  e = e.cwiseProduct(mask);
  if (mask_out) *mask_out = std::move(mask);
  return e;
}

/// Unidirectional LSTM over the embedding sequence; h_0 = c_0 = 0. Returns
/// the final hidden state z = h_T and fills `cache` when given.
template <typename Scalar>
Vec<Scalar> lstm_forward(const Mat<Scalar>& embeddings, const ModelParamsT<Scalar>& p,
                         ForwardCacheT<Scalar>* cache = nullptr) {
  const int T = static_cast<int>(embeddings.rows());
  const int H = static_cast<int>(p.lstm_w_rec.cols());
  if (T < 1) throw std::invalid_argument("lstm_forward: need at least one step");
  if (embeddings.cols() != p.lstm_w_in.cols())
    throw std::invalid_argument("lstm_forward: embedding dimension mismatch");

  Mat<Scalar> preact(T, 4 * H), gi(T, H), gf(T, H), gc(T, H), go(T, H);
  Mat<Scalar> cell(T, H), cell_tanh(T, H), hidden(T, H);
  Vec<Scalar> h = Vec<Scalar>::Zero(H);
  Vec<Scalar> c = Vec<Scalar>::Zero(H);
  for (int t = 0; t < T; ++t) {
    Vec<Scalar> a = p.lstm_w_in * embeddings.row(t).transpose() + p.lstm_w_rec * h + p.lstm_b;
    preact.row(t) = a.transpose();
    for (int j = 0; j < H; ++j) {
      const Scalar i_g = sigmoid(a[j]);
      const Scalar f_g = sigmoid(a[H + j]);
      const Scalar g_c = std::tanh(a[2 * H + j]);
      const Scalar o_g = sigmoid(a[3 * H + j]);
      const Scalar c_new = f_g * c[j] + i_g * g_c;
      const Scalar ct = std::tanh(c_new);
      gi(t, j) = i_g;
      gf(t, j) = f_g;
      gc(t, j) = g_c;
      go(t, j) = o_g;
      cell(t, j) = c_new;
      cell_tanh(t, j) = ct;
      hidden(t, j) = o_g * ct;
      c[j] = c_new;
      h[j] = hidden(t, j);
    }
    if (!h.allFinite() || !c.allFinite()) throw NumericError("numeric overflow in lstm_forward");
  }
  if (cache) {
    cache->embeddings = embeddings;
    cache->preact = std::move(preact);
    cache->gate_in = std::move(gi);
    cache->gate_forget = std::move(gf);
    cache->gate_cand = std::move(gc);
    cache->gate_out = std::move(go);
    cache->cell = std::move(cell);
    cache->cell_tanh = std::move(cell_tanh);
    cache->hidden = std::move(hidden);
    cache->z = h;
  }
  return h;
}

template <typename Scalar>
struct HeadsOutT {
  Scalar det_logit;
  Vec<Scalar> dir_logits;
  Scalar p_det;
  Vec<Scalar> p_dir;
};

/// Detection probability and direction distribution, order [Receives, Gives].
template <typename Scalar>
HeadsOutT<Scalar> heads_forward(const Vec<Scalar>& z, const ModelParamsT<Scalar>& p) {
  if (z.size() != p.det_w.size()) throw std::invalid_argument("heads_forward: hidden size mismatch");
  HeadsOutT<Scalar> out;
  out.det_logit = p.det_w.dot(z) + p.det_b[0];
  out.dir_logits = p.dir_w * z + p.dir_b;
  out.p_det = sigmoid(out.det_logit);
  out.p_dir = stable_softmax(out.dir_logits);
  return out;
}

/// Full forward pass from frame features: projection (+dropout), LSTM,
/// LSTM-output dropout, then both heads. rng == nullptr selects eval mode.
template <typename Scalar>
ForwardCacheT<Scalar> forward(const Mat<Scalar>& features, const ModelParamsT<Scalar>& p,
                              const DropoutSpec& drop = {}, std::mt19937_64* rng = nullptr) {
  ForwardCacheT<Scalar> cache;
  cache.has_features = true;
  cache.features = features;
  Mat<Scalar> e = project(features, p, drop.projection, rng, &cache.proj_mask);
  lstm_forward(e, p, &cache);
  cache.z_mask = dropout_mask<Scalar>(cache.z.size(), 1, drop.lstm_output, rng).col(0);
  cache.z_dropped = cache.z.cwiseProduct(cache.z_mask);
  auto heads = heads_forward(cache.z_dropped, p);
  cache.det_logit = heads.det_logit;
  cache.dir_logits = std::move(heads.dir_logits);
  cache.p_det = heads.p_det;
  cache.p_dir = std::move(heads.p_dir);
  return cache;
}

/// Forward pass that starts from an embedding sequence (used by attribution;
/// always eval mode for the dropout stages).
template <typename Scalar>
ForwardCacheT<Scalar> forward_from_embeddings(const Mat<Scalar>& embeddings,
                                              const ModelParamsT<Scalar>& p) {
  ForwardCacheT<Scalar> cache;
  cache.has_features = false;
  cache.proj_mask = Mat<Scalar>::Ones(embeddings.rows(), embeddings.cols());
  lstm_forward(embeddings, p, &cache);
  cache.z_mask = Vec<Scalar>::Ones(cache.z.size());
  cache.z_dropped = cache.z;
  auto heads = heads_forward(cache.z_dropped, p);
  cache.det_logit = heads.det_logit;
  cache.dir_logits = std::move(heads.dir_logits);
  cache.p_det = heads.p_det;
  cache.p_dir = std::move(heads.p_dir);
  return cache;
}

template <typename Scalar>
struct BackwardResultT {
  ModelParamsT<Scalar> grads;
  Mat<Scalar> d_embeddings;  // gradient w.r.t. the LSTM input sequence
  Mat<Scalar> d_features;    // empty when the cache has no features
};

using BackwardResult = BackwardResultT<double>;

/// Reverse-mode pass with upstream gradients given in logit space:
/// g_det_logit = dL/d(det logit), g_dir_logits = dL/d(direction logits).
template <typename Scalar>
BackwardResultT<Scalar> backward_from_logits(const ForwardCacheT<Scalar>& cache,
                                             const ModelParamsT<Scalar>& p, Scalar g_det_logit,
                                             const Vec<Scalar>& g_dir_logits) {
  const int T = cache.steps();
  const int H = static_cast<int>(p.lstm_w_rec.cols());
  if (cache.hidden.cols() != H || cache.embeddings.cols() != p.lstm_w_in.cols())
    throw std::invalid_argument("backward: cache does not match params");
  if (g_dir_logits.size() != kNumDirections)
    throw std::invalid_argument("backward: direction gradient must have 2 components");

  const ModelDims dims = p.dims();
  BackwardResultT<Scalar> out;
  out.grads.set_zero(dims);

  // Heads.
  out.grads.det_w = g_det_logit * cache.z_dropped.transpose();
  out.grads.det_b[0] = g_det_logit;
  out.grads.dir_w = g_dir_logits * cache.z_dropped.transpose();
  out.grads.dir_b = g_dir_logits;
  Vec<Scalar> d_z_dropped =
      p.det_w.transpose() * g_det_logit + p.dir_w.transpose() * g_dir_logits;
  Vec<Scalar> dh = d_z_dropped.cwiseProduct(cache.z_mask);

  // Backprop through time.
  Mat<Scalar> d_embed = Mat<Scalar>::Zero(T, dims.embedding_dim);
  Vec<Scalar> dc = Vec<Scalar>::Zero(H);
  for (int t = T - 1; t >= 0; --t) {
    Vec<Scalar> d_pre(4 * H);
    for (int j = 0; j < H; ++j) {
      const Scalar i_g = cache.gate_in(t, j);
      const Scalar f_g = cache.gate_forget(t, j);
      const Scalar g_c = cache.gate_cand(t, j);
      const Scalar o_g = cache.gate_out(t, j);
      const Scalar ct = cache.cell_tanh(t, j);
      const Scalar c_prev = t > 0 ? cache.cell(t - 1, j) : Scalar(0);
      const Scalar d_o = dh[j] * ct;
      const Scalar d_c = dc[j] + dh[j] * o_g * (Scalar(1) - ct * ct);
      const Scalar d_i = d_c * g_c;
      const Scalar d_g = d_c * i_g;
      const Scalar d_f = d_c * c_prev;
      d_pre[j] = d_i * i_g * (Scalar(1) - i_g);
      d_pre[H + j] = d_f * f_g * (Scalar(1) - f_g);
      d_pre[2 * H + j] = d_g * (Scalar(1) - g_c * g_c);
      d_pre[3 * H + j] = d_o * o_g * (Scalar(1) - o_g);
      dc[j] = d_c * f_g;
    }
    out.grads.lstm_w_in += d_pre * cache.embeddings.row(t);
    if (t > 0) out.grads.lstm_w_rec += d_pre * cache.hidden.row(t - 1);
    out.grads.lstm_b += d_pre;
    d_embed.row(t) = (p.lstm_w_in.transpose() * d_pre).transpose();
    dh = p.lstm_w_rec.transpose() * d_pre;
  }
  out.d_embeddings = d_embed;

  // Projection (when the pass started from features).
  if (cache.has_features) {
    Mat<Scalar> d_pre_drop = d_embed.cwiseProduct(cache.proj_mask);
    out.grads.proj_w = d_pre_drop.transpose() * cache.features;
    out.grads.proj_b = d_pre_drop.colwise().sum().transpose();
    out.d_features = d_pre_drop * p.proj_w;
  }
  return out;
}

/// Reverse-mode pass with upstream gradients in probability space:
/// grad_p_det = dL/d(p_det), grad_p_dir = dL/d(p_dir). The sigmoid and
/// softmax Jacobians are applied internally.
template <typename Scalar>
BackwardResultT<Scalar> backward(const ForwardCacheT<Scalar>& cache, const ModelParamsT<Scalar>& p,
                                 Scalar grad_p_det, const Vec<Scalar>& grad_p_dir) {
  const Scalar g_det = grad_p_det * cache.p_det * (Scalar(1) - cache.p_det);
  const Scalar inner = grad_p_dir.dot(cache.p_dir);
  Vec<Scalar> centered = grad_p_dir; centered.array() -= inner;
  Vec<Scalar> g_dir = cache.p_dir.cwiseProduct(centered);
  return backward_from_logits(cache, p, g_det, g_dir);
}

/// Mixed-space entry used by the training loop: probability-space detection
/// gradient plus logit-space direction gradient, matching the loss module's
/// outputs.
template <typename Scalar>
BackwardResultT<Scalar> backward_mixed(const ForwardCacheT<Scalar>& cache,
                                       const ModelParamsT<Scalar>& p, Scalar grad_p_det,
                                       const Vec<Scalar>& grad_dir_logits) {
  const Scalar g_det = grad_p_det * cache.p_det * (Scalar(1) - cache.p_det);
  return backward_from_logits(cache, p, g_det, grad_dir_logits);
}

// Elementwise in-place helpers over every tensor of a params-shaped struct.
template <typename Scalar, typename Fn>
void for_each_tensor(ModelParamsT<Scalar>& p, Fn&& fn) {
  for (auto& ref : tensor_refs(p)) fn(ref);
}

template <typename Scalar>
void accumulate(ModelParamsT<Scalar>& acc, const ModelParamsT<Scalar>& g, Scalar scale = Scalar(1)) {
  auto a = tensor_refs(acc);
  auto b = tensor_refs(const_cast<ModelParamsT<Scalar>&>(g));
  for (size_t i = 0; i < a.size(); ++i)
    Eigen::Map<Vec<Scalar>>(a[i].data, a[i].size()) +=
        scale * Eigen::Map<const Vec<Scalar>>(b[i].data, b[i].size());
}

template <typename Scalar>
void scale_params(ModelParamsT<Scalar>& p, Scalar scale) {
  for (auto& ref : tensor_refs(p)) Eigen::Map<Vec<Scalar>>(ref.data, ref.size()) *= scale;
}

}  // namespace handover
