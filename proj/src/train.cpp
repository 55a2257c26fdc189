#include "handover/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace handover {

void TrainConfig::validate() const {
  if (lr_projection < 0 || lr_temporal < 0 || weight_decay_projection < 0 ||
      weight_decay_temporal < 0)
    throw ConfigError("learning rates and weight decays must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (accumulation_steps < 1) throw ConfigError("accumulation_steps must be at least 1");
  if (max_grad_norm <= 0) throw ConfigError("max_grad_norm must be positive");
  if (warmup_fraction < 0 || warmup_fraction > 1)
    throw ConfigError("warmup_fraction must lie in [0,1]");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  double prob_sum = 0;
  for (double p : sampler_probs) {
    if (p < 0) throw ConfigError("sampler probabilities must be non-negative");
    prob_sum += p;
  }
  if (std::abs(prob_sum - 1.0) > 1e-9) throw ConfigError("sampler probabilities must sum to 1");
  if (early_stop_patience < 1) throw ConfigError("early_stop_patience must be at least 1");
  if (val_fraction < 0 || val_fraction >= 1) throw ConfigError("val_fraction must lie in [0,1)");
  if (dropout.projection < 0 || dropout.projection >= 1 || dropout.lstm_output < 0 ||
      dropout.lstm_output >= 1)
    throw ConfigError("dropout rates must lie in [0,1)");
  loss.validate();
}

WindowedDataset WindowedDataset::build(const std::vector<LabeledFrameStream>& streams,
                                       const WindowSpec& spec, double val_fraction) {
  spec.validate();
  if (streams.empty()) throw ConfigError("dataset has no streams");
  if (val_fraction < 0 || val_fraction >= 1) throw ConfigError("val_fraction must lie in [0,1)");

  WindowedDataset ds;
  ds.streams = &streams;
  ds.spec = spec;
  const int S = static_cast<int>(streams.size());
  int num_val = static_cast<int>(std::floor(val_fraction * S + 0.5));
  num_val = std::min(num_val, S - 1);  // keep at least one training stream
  const int first_val = S - num_val;

  for (int s = 0; s < S; ++s) {
    streams[s].validate();
    auto& dest = s < first_val ? ds.train : ds.val;
    for (int start : enumerate_windows(streams[s].num_frames, spec))
      dest.push_back({s, make_window(streams[s].labels, start, spec)});
  }
  if (ds.train.empty()) throw ConfigError("no training windows; streams shorter than one window");
  for (std::size_t i = 0; i < ds.train.size(); ++i)
    ds.train_by_class[to_index(ds.train[i].window.train_label)].push_back(i);
  return ds;
}

std::vector<std::size_t> sample_batch(const WindowedDataset& ds,
                                      const std::array<double, kNumClasses>& probs,
                                      int batch_size, std::mt19937_64& rng) {
  for (int c = 0; c < kNumClasses; ++c)
    if (probs[c] > 0 && ds.train_by_class[c].empty())
      throw ConfigError(std::string("sampler: no training windows of class ") +
                        label_name(label_from_index(c)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> batch;
  batch.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    const double u = unit(rng);
    double cum = 0;
    int cls = kNumClasses - 1;
    for (int c = 0; c < kNumClasses; ++c) {
      cum += probs[c];
      if (u < cum) {
        cls = c;
        break;
      }
    }
    const auto& pool = ds.train_by_class[cls];
    const double w = unit(rng);
    std::size_t pick = std::min(pool.size() - 1, static_cast<std::size_t>(w * pool.size()));
    batch.push_back(pool[pick]);
  }
  return batch;
}

long micro_batches_per_epoch(std::size_t num_train_windows, int accumulation_steps) {
  long micro = (static_cast<long>(num_train_windows) + 2) / 3;
  micro = std::max<long>(micro, 1);
  const long rem = micro % accumulation_steps;
  if (rem != 0) micro += accumulation_steps - rem;
  return micro;
}

Eigen::MatrixXd window_features(const WindowedDataset& ds, const DatasetWindow& dw) {
  return gather_window_features((*ds.streams)[dw.stream], dw.window.start, ds.spec);
}

namespace {

SampleTarget target_of(const Window& w) {
  SampleTarget t;
  t.det_label = w.det_label;
  t.direction = w.train_label;
  return t;
}

std::string describe_batch(const WindowedDataset& ds, const std::vector<std::size_t>& batch) {
  std::array<int, kNumClasses> counts = {0, 0, 0};
  for (std::size_t idx : batch) ++counts[to_index(ds.train[idx].window.train_label)];
  std::ostringstream os;
  os << "Receives=" << counts[0] << " Gives=" << counts[1] << " Idle=" << counts[2];
  return os.str();
}

}  // namespace

BatchLoss<double> evaluate_split(const std::vector<DatasetWindow>& windows,
                                 const WindowedDataset& ds, const ModelParams& params,
                                 const LossWeights& lw) {
  if (windows.empty()) throw std::invalid_argument("evaluate_split: empty window set");
  std::vector<double> p_det;
  std::vector<Vec<double>> p_dir;
  std::vector<SampleTarget> targets;
  p_det.reserve(windows.size());
  p_dir.reserve(windows.size());
  targets.reserve(windows.size());
  for (const auto& dw : windows) {
    auto cache = forward(window_features(ds, dw), params);
    p_det.push_back(cache.p_det);
    p_dir.push_back(cache.p_dir);
    targets.push_back(target_of(dw.window));
  }
  return total_loss(p_det, p_dir, targets, lw);
}

TrainResult train(const WindowedDataset& ds, const ModelDims& dims, const TrainConfig& cfg,
                  const TrainObserver& observer) {
  cfg.validate();
  dims.validate();
  if (ds.streams == nullptr || ds.train.empty()) throw ConfigError("train: dataset is empty");
  if (dims.feature_dim != static_cast<int>((*ds.streams)[0].feature_dim()))
    throw ConfigError("train: model feature_dim does not match the dataset");

  LossWeights lw = cfg.loss;
  if (cfg.auto_dir_weights)
    lw.dir_class_weights = inverse_frequency_weights<double>(
        ds.count_train_label(FrameLabel::Receives), ds.count_train_label(FrameLabel::Gives));

  TrainResult result;
  result.params = init_params<double>(dims, cfg.seed);
  result.dir_class_weights = lw.dir_class_weights;
  if (cfg.epochs == 0) return result;

  const long micro_per_epoch = micro_batches_per_epoch(ds.train.size(), cfg.accumulation_steps);
  const long updates_per_epoch = micro_per_epoch / cfg.accumulation_steps;
  const long total_updates = static_cast<long>(cfg.epochs) * updates_per_epoch;

  OptimizerState opt = OptimizerState::zero(dims);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  const bool has_val = !ds.val.empty();
  ModelParams best_params = result.params;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int epochs_without_improvement = 0;

  long update_index = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_det = 0, epoch_dir = 0;
    double last_lr_temporal = 0;
    for (long u = 0; u < updates_per_epoch; ++u) {
      ModelParams grad_accum;
      grad_accum.set_zero(dims);
      const double micro_scale = 1.0 / cfg.accumulation_steps;
      for (int micro = 0; micro < cfg.accumulation_steps; ++micro) {
        const auto batch = sample_batch(ds, cfg.sampler_probs, cfg.batch_size, rng);
        std::vector<ForwardCache> caches;
        std::vector<double> p_det;
        std::vector<Vec<double>> p_dir;
        std::vector<SampleTarget> targets;
        caches.reserve(batch.size());
        for (std::size_t idx : batch) {
          const DatasetWindow& dw = ds.train[idx];
          caches.push_back(forward(window_features(ds, dw), result.params, cfg.dropout, &rng));
          p_det.push_back(caches.back().p_det);
          p_dir.push_back(caches.back().p_dir);
          targets.push_back(target_of(dw.window));
        }
        const auto batch_loss = total_loss(p_det, p_dir, targets, lw);
        if (!std::isfinite(batch_loss.total))
          throw NumericError("non-finite loss at update " + std::to_string(update_index) +
                             " (batch " + describe_batch(ds, batch) + ")");
        epoch_det += batch_loss.detection / static_cast<double>(micro_per_epoch);
        epoch_dir += batch_loss.direction / static_cast<double>(micro_per_epoch);
        if (observer.on_micro_batch) observer.on_micro_batch(batch, batch_loss);
        for (std::size_t i = 0; i < batch.size(); ++i) {
          auto back = backward_mixed(caches[i], result.params, batch_loss.grad_p_det[i],
                                     batch_loss.grad_dir_logits[i]);
          accumulate(grad_accum, back.grads, micro_scale);
        }
      }
      const double pre_clip = clip_grad_norm(grad_accum, cfg.max_grad_norm);
      if (observer.on_update) observer.on_update(update_index, grad_accum, pre_clip);
      const double scale =
          lr_at<double>(update_index, total_updates, cfg.warmup_fraction, 1.0);
      GroupHyper<double> groups;
      groups.lr_projection = cfg.lr_projection * scale;
      groups.lr_temporal = cfg.lr_temporal * scale;
      groups.wd_projection = cfg.weight_decay_projection;
      groups.wd_temporal = cfg.weight_decay_temporal;
      last_lr_temporal = groups.lr_temporal;
      adamw_step_grouped(result.params, grad_accum, opt, groups);
      ++update_index;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = last_lr_temporal;
    stats.train_det = epoch_det;
    stats.train_dir = epoch_dir;
    if (has_val) {
      const auto val = evaluate_split(ds.val, ds, result.params, lw);
      stats.val_det = val.detection;
      stats.val_dir = val.direction;
      stats.val_total = val.total;
    }
    result.history.push_back(stats);
    if (observer.on_epoch) observer.on_epoch(stats);

    if (has_val) {
      if (stats.val_total < best_val) {
        best_val = stats.val_total;
        best_params = result.params;
        best_epoch = epoch;
        epochs_without_improvement = 0;
      } else if (++epochs_without_improvement >= cfg.early_stop_patience) {
        break;
      }
    }
  }

  if (has_val) {
    result.params = std::move(best_params);
    result.best_epoch = best_epoch;
  }
  return result;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out = open_output(path);
  out << "epoch,lr,train_det,train_dir,val_det,val_dir,val_total\n";
  char buf[512];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.epoch, h.lr,
                  h.train_det, h.train_dir, h.val_det, h.val_dir, h.val_total);
    out << buf;
  }
  if (!out) throw IoError("failed writing history: " + path);
}

}  // namespace handover
