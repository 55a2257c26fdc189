#pragma once

#include "handover/loss.hpp"
#include "handover/net.hpp"
#include "handover/optim.hpp"
#include "handover/stream.hpp"
#include "handover/windowing.hpp"

#include <array>
#include <functional>
#include <optional>

namespace handover {

struct TrainConfig {
  double lr_projection = 3e-6;
  double lr_temporal = 1e-5;
  double weight_decay_projection = 1e-4;
  double weight_decay_temporal = 1e-5;
  int batch_size = 8;
  int accumulation_steps = 2;
  double max_grad_norm = 1.0;
  double warmup_fraction = 0.05;
  int epochs = 10;
  // Sampler probabilities indexed like to_index(): [Receives, Gives, Idle].
  std::array<double, kNumClasses> sampler_probs = {0.2, 0.2, 0.6};
  int early_stop_patience = 3;
  double val_fraction = 0.15;
  DropoutSpec dropout = {0.3, 0.4};
  LossWeights loss;
  // When set, dir_class_weights are recomputed as inverse class frequencies
  // over the positive training windows before the first epoch.
  bool auto_dir_weights = true;
  std::uint64_t seed = 42;

  void validate() const;
};

/// A window plus the index of the stream it was cut from.
struct DatasetWindow {
  int stream = 0;
  Window window;
};

/// Train/validation window sets over a stream collection. The validation
/// split holds out whole streams (the trailing fraction) so no temporal
/// extent spans the boundary.
struct WindowedDataset {
  const std::vector<LabeledFrameStream>* streams = nullptr;
  WindowSpec spec;
  std::vector<DatasetWindow> train;
  std::vector<DatasetWindow> val;
  std::array<std::vector<std::size_t>, kNumClasses> train_by_class;  // indices into train

  static WindowedDataset build(const std::vector<LabeledFrameStream>& streams,
                               const WindowSpec& spec, double val_fraction);
  long count_train_label(FrameLabel y) const { return static_cast<long>(train_by_class[to_index(y)].size()); }
};

/// Weighted class sampling with replacement: each slot draws a class from
/// `probs`, then a window uniformly within that class.
std::vector<std::size_t> sample_batch(const WindowedDataset& ds,
                                      const std::array<double, kNumClasses>& probs,
                                      int batch_size, std::mt19937_64& rng);

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;  // temporal-group learning rate at the epoch's last update
  double train_det = 0.0;
  double train_dir = 0.0;
  double val_det = 0.0;
  double val_dir = 0.0;
  double val_total = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
  Vec<double> dir_class_weights;  // the weights actually used
  int best_epoch = -1;            // -1 when no validation split exists
};

/// Hooks for tests and progress reporting; every callback may be empty.
struct TrainObserver {
  std::function<void(long update_index, const ModelParams& mean_grad, double pre_clip_norm)>
      on_update;
  std::function<void(const std::vector<std::size_t>& batch, const BatchLoss<double>& loss)>
      on_micro_batch;
  std::function<void(const EpochStats&)> on_epoch;
};

/// Full training loop: weighted sampling, forward/backward per window,
/// gradient accumulation, global-norm clipping, grouped AdamW with
/// warmup+cosine schedule, and early stopping on validation total loss.
/// Returns the best-validation parameters (final parameters when there is
/// no validation split).
TrainResult train(const WindowedDataset& ds, const ModelDims& dims, const TrainConfig& cfg,
                  const TrainObserver& observer = {});

/// Micro-batches per epoch: ceil(|train| / 3), rounded up to a multiple of
/// accumulation_steps so every epoch ends on a completed optimizer update.
long micro_batches_per_epoch(std::size_t num_train_windows, int accumulation_steps);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

/// Gathers the sampled frame features of one dataset window as a T x F matrix.
Eigen::MatrixXd window_features(const WindowedDataset& ds, const DatasetWindow& dw);

/// Loss over a window set in eval mode (no dropout); used for validation.
BatchLoss<double> evaluate_split(const std::vector<DatasetWindow>& windows,
                                 const WindowedDataset& ds, const ModelParams& params,
                                 const LossWeights& lw);

}  // namespace handover
