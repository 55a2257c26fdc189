// End-to-end acceptance gate. Runs one check per release criterion and
// prints a [PASS]/[FAIL] line for each; exits nonzero if any fail.
//
// Usage: acceptance <path-to-handover_events-binary>
//
// The CLI binary is exercised as a subprocess for the synthetic end-to-end
// and determinism criteria; everything else links the library directly and
// compares against independent oracles implemented in this file.

#include "handover/attribution.hpp"
#include "handover/events.hpp"
#include "handover/loss.hpp"
#include "handover/net.hpp"
#include "handover/train.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using namespace handover;

namespace {

struct Criterion {
  int id;
  std::string label;
  bool passed;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Subprocess plumbing for the CLI-driven criteria.

std::string g_cli_path;
fs::path g_scratch;
int g_cmd_counter = 0;

struct CmdResult {
  int code = -1;
  std::string out;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CmdResult run_cli(const std::string& args) {
  const fs::path out_file = g_scratch / ("cmd_" + std::to_string(g_cmd_counter++) + ".log");
  const std::string cmd =
      "\"" + g_cli_path + "\" " + args + " > \"" + out_file.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  CmdResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_file(out_file);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = g_scratch / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// ---------------------------------------------------------------------------
// Criterion 1: every parameter gradient of the total loss matches central
// finite differences.

bool check_gradients(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelDims dims{8, 8, 8};
  const int T = 8;
  const double h = 1e-5;
  double worst = 0.0;
  const char* worst_tensor = "";

  for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull, 15ull}) {
    ModelParams params = init_params<double>(dims, seed);
    std::mt19937_64 rng(seed * 977 + 1);
    std::normal_distribution<double> feat(0.0, 1.0);

    std::vector<Mat<double>> features(3, Mat<double>(T, dims.feature_dim));
    for (auto& m : features)
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = feat(rng);
    const std::vector<SampleTarget> targets = {
        {1, FrameLabel::Receives}, {1, FrameLabel::Gives}, {0, FrameLabel::Idle}};
    LossWeights lw;
    lw.dir_class_weights << 1.25, 0.8;

    auto batch_total = [&]() {
      std::vector<double> p_det;
      std::vector<Vec<double>> p_dir;
      for (const auto& f : features) {
        const ForwardCache cache = forward(f, params);
        p_det.push_back(cache.p_det);
        p_dir.push_back(cache.p_dir);
      }
      return total_loss(p_det, p_dir, targets, lw).total;
    };

    // Analytic gradient of the batch total.
    ModelParams analytic;
    analytic.set_zero(dims);
    {
      std::vector<ForwardCache> caches;
      std::vector<double> p_det;
      std::vector<Vec<double>> p_dir;
      for (const auto& f : features) {
        caches.push_back(forward(f, params));
        p_det.push_back(caches.back().p_det);
        p_dir.push_back(caches.back().p_dir);
      }
      const BatchLoss<double> loss = total_loss(p_det, p_dir, targets, lw);
      for (std::size_t i = 0; i < caches.size(); ++i) {
        const auto back = backward_mixed(caches[i], params, loss.grad_p_det[i],
                                         loss.grad_dir_logits[i]);
        accumulate(analytic, back.grads);
      }
    }

    auto refs = tensor_refs(params);
    auto grefs = tensor_refs(analytic);
    for (std::size_t t = 0; t < refs.size(); ++t) {
      for (Eigen::Index k = 0; k < refs[t].size(); ++k) {
        double* slot = refs[t].data + k;
        const double keep = *slot;
        *slot = keep + h;
        const double up = batch_total();
        *slot = keep - h;
        const double down = batch_total();
        *slot = keep;
        const double fd = (up - down) / (2.0 * h);
        const double an = grefs[t].data[k];
        const double rel =
            std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-5});
        if (rel > worst) {
          worst = rel;
          worst_tensor = refs[t].name;
        }
      }
    }
  }

  const double elapsed = seconds_since(t0);
  detail = "max rel err " + fmt(worst, 2) + " (tensor " + worst_tensor + "), " +
           fmt(elapsed, 2) + " s";
  return worst <= 1e-4 && elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// Criterion 2: smooth() vs a naive direct-convolution oracle with explicit
// reflective padding.

long reflect_fold(long i, long n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

std::vector<double> oracle_smooth(const std::vector<double>& sig, double sigma, int size,
                                  int* pad_out = nullptr) {
  const long n = static_cast<long>(sig.size());
  const int half = size / 2;
  std::vector<double> taps(size);
  double tap_sum = 0.0;
  for (int k = 0; k < size; ++k) {
    const double d = k - half;
    taps[k] = std::exp(-d * d / (2.0 * sigma * sigma));
    tap_sum += taps[k];
  }
  for (double& t : taps) t /= tap_sum;

  const long pad = std::max<long>(half, std::llround(3.0 * sigma));
  if (pad_out) *pad_out = static_cast<int>(pad);
  std::vector<double> padded(n + 2 * pad);
  for (long i = 0; i < static_cast<long>(padded.size()); ++i)
    padded[i] = sig[reflect_fold(i - pad, n)];

  std::vector<double> out(n);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = 0; k < size; ++k) acc += taps[k] * padded[i + pad - half + k];
    out[i] = acc;
  }
  return out;
}

bool check_smoothing(std::string& detail) {
  std::mt19937_64 rng(7337);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> len_dist(20, 500);
  double worst = 0.0;
  bool paper_pad_ok = false;

  for (int c = 0; c < 100; ++c) {
    const int n = len_dist(rng);
    std::vector<double> sig(n);
    for (double& v : sig) v = unit(rng);

    double sigma;
    int size;
    if (c == 0) {
      sigma = 3.0;
      size = 15;
    } else {
      sigma = 0.5 + 5.5 * unit(rng);
      size = 3 + 2 * static_cast<int>(unit(rng) * 11);  // odd, 3..25
    }

    int pad = 0;
    const std::vector<double> want = oracle_smooth(sig, sigma, size, &pad);
    if (c == 0) paper_pad_ok = (pad == 9);

    Vec<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = sig[i];
    const Vec<double> got = smooth(v, sigma, size);
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }

  detail = "100 signals, max abs err " + fmt(worst, 2) +
           (paper_pad_ok ? ", sigma=3/kernel=15 pad=9" : ", PAD MISMATCH");
  return worst <= 1e-12 && paper_pad_ok;
}

// ---------------------------------------------------------------------------
// Criterion 3: find_peaks() vs a brute-force prominence-by-definition oracle.

struct OraclePeak {
  int index;
  double height;
  double prominence;
};

std::vector<OraclePeak> oracle_peaks(const std::vector<double>& s, double min_height,
                                     double prominence_frac) {
  const int n = static_cast<int>(s.size());
  std::vector<OraclePeak> out;
  if (n < 3) return out;
  const double mx = *std::max_element(s.begin(), s.end());
  const double mn = *std::min_element(s.begin(), s.end());
  const double min_prom = prominence_frac * (mx - mn);

  int l = 0;
  while (l < n) {
    int r = l;
    while (r + 1 < n && s[r + 1] == s[l]) ++r;
    const bool rises = l > 0 && s[l - 1] < s[l];
    const bool falls = r < n - 1 && s[r + 1] < s[l];
    if (rises && falls) {
      const double v = s[l];
      double left_min = v;
      for (int k = l - 1; k >= 0 && s[k] <= v; --k) left_min = std::min(left_min, s[k]);
      double right_min = v;
      for (int k = r + 1; k < n && s[k] <= v; ++k) right_min = std::min(right_min, s[k]);
      const double prom = v - std::max(left_min, right_min);
      if (v >= min_height && prom >= min_prom) out.push_back({(l + r) / 2, v, prom});
    }
    l = r + 1;
  }
  return out;
}

bool check_peaks(std::string& detail) {
  std::mt19937_64 rng(40961);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double heights[] = {0.0, 0.05, 0.1, 0.3};
  const double fracs[] = {0.0, 0.01, 0.05, 0.2};
  int disagreements = 0;
  long total_peaks = 0;
  int plateau_signals = 0;

  for (int c = 0; c < 1000; ++c) {
    const int n = 1 + static_cast<int>(rng() % 64);
    std::vector<double> sig(n);
    const int flavor = c % 4;
    for (double& v : sig) {
      if (flavor == 0) v = static_cast<double>(rng() % 9) / 8.0;       // plateau-rich
      else if (flavor == 1) v = static_cast<double>(rng() % 3) / 2.0;  // heavy ties
      else v = unit(rng);                                              // continuous
    }
    if (c % 97 == 0) std::fill(sig.begin(), sig.end(), 0.5);  // constant
    if (c % 89 == 0) std::sort(sig.begin(), sig.end());       // monotone ramp
    for (int i = 1; i < n; ++i)
      if (sig[i] == sig[i - 1]) {
        ++plateau_signals;
        break;
      }

    const double mh = heights[rng() % 4];
    const double pf = fracs[rng() % 4];
    const auto want = oracle_peaks(sig, mh, pf);

    Vec<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = sig[i];
    const auto got = find_peaks(v, mh, pf);

    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = got[i].index == want[i].index && got[i].height == want[i].height &&
             got[i].prominence == want[i].prominence;
    if (!same) ++disagreements;
    total_peaks += static_cast<long>(want.size());
  }

  detail = "1000 signals (" + std::to_string(plateau_signals) + " with plateaus, " +
           std::to_string(total_peaks) + " oracle peaks), " +
           std::to_string(disagreements) + " disagreements";
  return disagreements == 0 && plateau_signals > 100 && total_peaks > 500;
}

// ---------------------------------------------------------------------------
// Criterion 4: loss identities.

bool check_loss_identities(std::string& detail) {
  std::mt19937_64 rng(2468);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // (a) wbce with w_pos = 1 equals plain BCE on the clamped probability.
  double worst_bce = 0.0;
  std::vector<double> probes = {1e-12, 1e-7, 1e-3, 0.25, 0.5,
                                0.75,  1.0 - 1e-3, 1.0 - 1e-7, 1.0 - 1e-12};
  for (int i = 0; i < 50; ++i) probes.push_back(unit(rng));
  for (double p : probes) {
    for (int y : {0, 1}) {
      const double pc = std::min(std::max(p, kLogEps), 1.0 - kLogEps);
      const double bce = y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
      const double bce_grad = y == 1 ? -1.0 / pc : 1.0 / (1.0 - pc);
      const auto got = wbce(p, y, 1.0);
      worst_bce = std::max(worst_bce, std::abs(got.loss - bce));
      worst_bce = std::max(worst_bce, std::abs(got.grad - bce_grad));
    }
  }

  // (b) direction gradients are exactly zero for negative-detection samples,
  // and (c) the total is linear in (lambda_det, lambda_dir).
  bool zeros_ok = true;
  double worst_linear = 0.0;
  int negatives_seen = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const int B = 2 + static_cast<int>(rng() % 7);
    std::vector<double> p_det(B);
    std::vector<Vec<double>> p_dir(B);
    std::vector<SampleTarget> targets(B);
    for (int i = 0; i < B; ++i) {
      p_det[i] = unit(rng);
      const double a = 0.05 + 0.9 * unit(rng);
      p_dir[i] = Vec<double>(2);
      p_dir[i] << a, 1.0 - a;
      if (unit(rng) < 0.5) {
        targets[i] = {1, unit(rng) < 0.5 ? FrameLabel::Receives : FrameLabel::Gives};
      } else {
        targets[i] = {0, FrameLabel::Idle};
      }
    }
    if (std::none_of(targets.begin(), targets.end(),
                     [](const SampleTarget& t) { return t.det_label == 1; }))
      targets[0] = {1, FrameLabel::Receives};

    LossWeights base;
    base.dir_class_weights << 1.3, 0.7;
    base.lambda_det = 1.0;
    base.lambda_dir = 1.0;
    const auto unit_loss = total_loss(p_det, p_dir, targets, base);

    for (int i = 0; i < B; ++i) {
      if (targets[i].det_label == 0) {
        ++negatives_seen;
        if (unit_loss.grad_dir_logits[i][0] != 0.0 || unit_loss.grad_dir_logits[i][1] != 0.0)
          zeros_ok = false;
      }
    }

    for (int k = 0; k < 6; ++k) {
      LossWeights lw = base;
      lw.lambda_det = 5.0 * unit(rng);
      lw.lambda_dir = 5.0 * unit(rng);
      const auto scaled = total_loss(p_det, p_dir, targets, lw);
      const double want = lw.lambda_det * unit_loss.detection + lw.lambda_dir * unit_loss.direction;
      const double rel = std::abs(scaled.total - want) / std::max(1e-30, std::abs(want));
      worst_linear = std::max(worst_linear, rel);
      if (scaled.detection != unit_loss.detection || scaled.direction != unit_loss.direction)
        worst_linear = std::max(worst_linear, 1.0);
    }
  }

  detail = "bce diff " + fmt(worst_bce, 2) + ", " + std::to_string(negatives_seen) +
           " negative samples zero-grad " + (zeros_ok ? "ok" : "VIOLATED") +
           ", linearity rel err " + fmt(worst_linear, 2);
  return worst_bce <= 1e-12 && zeros_ok && negatives_seen > 10 && worst_linear <= 1e-12;
}

// ---------------------------------------------------------------------------
// Criterion 5: synthetic end-to-end through the CLI.

bool check_end_to_end(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path train_data = fresh_dir("e2e_train_data");
  const fs::path test_data = fresh_dir("e2e_test_data");
  const fs::path run = fresh_dir("e2e_run");
  const fs::path eval_out = fresh_dir("e2e_eval");
  const fs::path shuf_out = fresh_dir("e2e_eval_shuffled");

  auto step = [&](const std::string& args) {
    const CmdResult r = run_cli(args);
    if (r.code != 0) {
      detail = "command failed (exit " + std::to_string(r.code) + "): " + args +
               " :: " + r.out.substr(0, 200);
      return false;
    }
    return true;
  };

  if (!step("synth --data_dir \"" + train_data.string() + "\" --num_streams 96 --seed 1000"))
    return false;
  if (!step("synth --data_dir \"" + test_data.string() + "\" --num_streams 5 --seed 5000"))
    return false;

  long train_events = 0, test_events = 0;
  try {
    train_events =
        nlohmann::json::parse(read_file(train_data / "manifest.json")).at("total_events").get<long>();
    test_events =
        nlohmann::json::parse(read_file(test_data / "manifest.json")).at("total_events").get<long>();
  } catch (const std::exception& e) {
    detail = std::string("manifest parse: ") + e.what();
    return false;
  }
  if (train_events < 200 || test_events < 50) {
    detail = "planted events too few: train " + std::to_string(train_events) + ", test " +
             std::to_string(test_events);
    return false;
  }

  // From-scratch training on synthetic data needs far larger steps than the
  // fine-tuning defaults, a looser clip, and no validation holdout (the final
  // epoch of the fixed schedule is the demonstration model).
  const std::string train_args =
      "train --data_dir \"" + train_data.string() + "\" --out_dir \"" + run.string() +
      "\" --embedding_dim 16 --hidden_dim 16 --epochs 24 --val_fraction 0"
      " --lr_temporal 5e-3 --lr_projection 3e-3"
      " --weight_decay_temporal 1e-3 --weight_decay_projection 1e-3"
      " --max_grad_norm 10 --dropout_projection 0.2 --dropout_lstm_output 0.1"
      " --w_pos 1.0 --sampler_receives 0.25 --sampler_gives 0.2 --sampler_idle 0.55"
      " --seed 8";
  if (!step(train_args)) return false;

  const std::string ckpt = (run / "model.ckpt").string();
  const std::string eval_knobs = " --peak_min_height 0.45 --direction_sigma_fraction 0.18";
  if (!step("eval --data_dir \"" + test_data.string() + "\" --checkpoint \"" + ckpt +
            "\" --out_dir \"" + eval_out.string() + "\"" + eval_knobs))
    return false;
  if (!step("eval --data_dir \"" + test_data.string() + "\" --checkpoint \"" + ckpt +
            "\" --out_dir \"" + shuf_out.string() + "\" --shuffle-frames" + eval_knobs))
    return false;

  double det_f1 = -1.0, dir_f1 = -1.0, shuf_dir_f1 = -1.0;
  try {
    const auto metrics = nlohmann::json::parse(read_file(eval_out / "metrics.json"));
    det_f1 = metrics.at("detection").at("f1").get<double>();
    dir_f1 = metrics.at("direction").at("mean_f1").get<double>();
    const auto shuf = nlohmann::json::parse(read_file(shuf_out / "metrics.json"));
    shuf_dir_f1 = shuf.at("direction").at("mean_f1").get<double>();
  } catch (const std::exception& e) {
    detail = std::string("metrics parse: ") + e.what();
    return false;
  }

  const double elapsed = seconds_since(t0);
  detail = std::to_string(train_events) + " train / " + std::to_string(test_events) +
           " test events, det F1 " + fmt(det_f1) + " (need >= 0.90), dir mean F1 " +
           fmt(dir_f1) + " (need >= 0.85), shuffled dir F1 " + fmt(shuf_dir_f1) +
           " (need < 0.6), " + fmt(elapsed, 3) + " s";
  return det_f1 >= 0.90 && dir_f1 >= 0.85 && shuf_dir_f1 < 0.6 && elapsed <= 300.0;
}

// ---------------------------------------------------------------------------
// Criterion 6: integrated-gradients completeness.

bool check_completeness(std::string& detail) {
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;

  for (int m = 0; m < 20; ++m) {
    ModelDims dims;
    dims.feature_dim = 3;  // unused: attribution starts from embeddings
    dims.embedding_dim = 3 + static_cast<int>(rng() % 8);
    dims.hidden_dim = 4 + static_cast<int>(rng() % 13);
    const int T = 3 + static_cast<int>(rng() % 8);
    const ModelParams params = init_params<double>(dims, 500 + m);

    Mat<double> input(T, dims.embedding_dim);
    for (Eigen::Index r = 0; r < input.rows(); ++r)
      for (Eigen::Index c = 0; c < input.cols(); ++c) input(r, c) = normal(rng);
    Mat<double> baseline = Mat<double>::Zero(T, dims.embedding_dim);
    if (m % 2 == 1)
      for (Eigen::Index r = 0; r < baseline.rows(); ++r)
        for (Eigen::Index c = 0; c < baseline.cols(); ++c) baseline(r, c) = 0.5 * normal(rng);

    const AttributionTarget targets[] = {
        {AttributionTarget::Head::Detection, FrameLabel::Gives},
        {AttributionTarget::Head::Direction, FrameLabel::Gives},
        {AttributionTarget::Head::Direction, FrameLabel::Receives}};
    for (const auto& target : targets) {
      const AttributionMap map = integrated_gradients(params, input, baseline, 256, target);
      const double delta =
          target_logit(params, input, target) - target_logit(params, baseline, target);
      const double gap = std::abs(map.relevance.sum() - delta);
      worst = std::max(worst, gap / std::max(1.0, std::abs(delta)));
    }
  }

  detail = "20 models x 3 targets at 256 steps, worst completeness gap " + fmt(worst, 2);
  return worst <= 1e-3;
}

// ---------------------------------------------------------------------------
// Criterion 7: byte-for-byte determinism of checkpoint, history, metrics.

bool check_determinism(std::string& detail) {
  auto one_run = [&](const std::string& tag, std::string& err) -> fs::path {
    const fs::path root = fresh_dir("det_" + tag);
    const fs::path data = root / "data";
    const fs::path out = root / "out";
    const std::string common = " --num_streams 4 --frames_per_stream 400 --feature_dim 6";
    CmdResult r = run_cli("synth --data_dir \"" + data.string() + "\"" + common + " --seed 99");
    if (r.code == 0)
      r = run_cli("train --data_dir \"" + data.string() + "\" --out_dir \"" + out.string() +
                  "\" --embedding_dim 8 --hidden_dim 8 --epochs 2 --seed 99");
    if (r.code == 0)
      r = run_cli("eval --data_dir \"" + data.string() + "\" --checkpoint \"" +
                  (out / "model.ckpt").string() + "\" --out_dir \"" + out.string() + "\"");
    if (r.code != 0) err = "pipeline exit " + std::to_string(r.code) + ": " + r.out.substr(0, 200);
    return out;
  };

  std::string err;
  const fs::path a = one_run("a", err);
  if (!err.empty()) {
    detail = err;
    return false;
  }
  const fs::path b = one_run("b", err);
  if (!err.empty()) {
    detail = err;
    return false;
  }

  bool ok = true;
  std::string mismatches;
  for (const char* name : {"model.ckpt", "history.csv", "metrics.json"}) {
    const std::string fa = read_file(a / name);
    const std::string fb = read_file(b / name);
    if (fa.empty() || fa != fb) {
      ok = false;
      mismatches += std::string(" ") + name;
    }
  }
  detail = ok ? "model.ckpt + history.csv + metrics.json byte-identical across two runs"
              : "differs:" + mismatches;
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: metric arithmetic vs exhaustive counting oracles.

bool check_metric_arithmetic(std::string& detail) {
  std::mt19937_64 rng(8888);
  double worst = 0.0;
  bool structure_ok = true;
  int checked_matches = 0;

  for (int rep = 0; rep < 100; ++rep) {
    // Random disjoint sorted intervals and random peaks.
    std::vector<GtEventInterval> intervals;
    int pos = static_cast<int>(rng() % 4);
    const int num_iv = static_cast<int>(rng() % 12);
    for (int i = 0; i < num_iv; ++i) {
      GtEventInterval iv;
      iv.first = pos;
      iv.last = pos + static_cast<int>(rng() % 4);
      iv.direction = (rng() % 2) ? FrameLabel::Gives : FrameLabel::Receives;
      intervals.push_back(iv);
      pos = iv.last + 1 + static_cast<int>(rng() % 6);
    }
    std::vector<Peak> peaks;
    const int num_pk = static_cast<int>(rng() % 15);
    for (int p = 0; p < num_pk; ++p)
      peaks.push_back({static_cast<int>(rng() % std::max(1, pos + 4)), 0.5, 0.1});
    const int tol = static_cast<int>(rng() % 4);

    const EventMatchResult match = match_events(peaks, intervals, tol);
    ++checked_matches;

    // Count tp/fp/fn exhaustively from the pair list; validate one-to-one
    // use and the tolerance window of every reported pair.
    std::vector<int> peak_used(peaks.size(), 0), iv_used(intervals.size(), 0);
    std::vector<Peak> sorted_peaks = peaks;
    std::sort(sorted_peaks.begin(), sorted_peaks.end(),
              [](const Peak& x, const Peak& y) { return x.index < y.index; });
    for (const auto& [pi, ii] : match.pairs) {
      if (pi < 0 || pi >= static_cast<int>(peaks.size()) || ii < 0 ||
          ii >= static_cast<int>(intervals.size())) {
        structure_ok = false;
        continue;
      }
      ++peak_used[pi];
      ++iv_used[ii];
      const int idx = sorted_peaks[pi].index;
      if (idx < intervals[ii].first - tol || idx > intervals[ii].last + tol)
        structure_ok = false;
    }
    for (int u : peak_used)
      if (u > 1) structure_ok = false;
    for (int u : iv_used)
      if (u > 1) structure_ok = false;
    const int tp = static_cast<int>(match.pairs.size());
    if (match.tp != tp || match.fp != static_cast<int>(peaks.size()) - tp ||
        match.fn != static_cast<int>(intervals.size()) - tp)
      structure_ok = false;

    const DetectionMetrics m = detection_metrics(match);
    const double prec = (tp + match.fp) > 0 ? double(tp) / (tp + match.fp) : 0.0;
    const double rec = (tp + match.fn) > 0 ? double(tp) / (tp + match.fn) : 0.0;
    const double f1 = (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    worst = std::max({worst, std::abs(m.precision - prec), std::abs(m.recall - rec),
                      std::abs(m.f1 - f1)});

    // Direction metrics against a four-cell hand count.
    const int n = static_cast<int>(rng() % 41);
    std::vector<FrameLabel> pred(n), truth(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = (rng() % 2) ? FrameLabel::Gives : FrameLabel::Receives;
      truth[i] = (rng() % 2) ? FrameLabel::Gives : FrameLabel::Receives;
    }
    const DirectionResult d = direction_metrics(pred, truth);
    double cnt[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < n; ++i) cnt[to_index(truth[i])][to_index(pred[i])] += 1.0;
    auto f1_of = [&](int cls) {
      const double tp_c = cnt[cls][cls];
      const double fp_c = cnt[1 - cls][cls];
      const double fn_c = cnt[cls][1 - cls];
      const double p = (tp_c + fp_c) > 0 ? tp_c / (tp_c + fp_c) : 0.0;
      const double r = (tp_c + fn_c) > 0 ? tp_c / (tp_c + fn_c) : 0.0;
      return (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
    };
    const int ri = to_index(FrameLabel::Receives);
    const int gi = to_index(FrameLabel::Gives);
    worst = std::max({worst, std::abs(d.confusion(0, 0) - cnt[0][0]),
                      std::abs(d.confusion(0, 1) - cnt[0][1]),
                      std::abs(d.confusion(1, 0) - cnt[1][0]),
                      std::abs(d.confusion(1, 1) - cnt[1][1]),
                      std::abs(d.f1_receives - f1_of(ri)), std::abs(d.f1_gives - f1_of(gi)),
                      std::abs(d.mean_f1 - 0.5 * (f1_of(ri) + f1_of(gi)))});

    // Normalized-confusion diagonal must equal class recall.
    for (int row = 0; row < 2; ++row) {
      const double row_sum = cnt[row][0] + cnt[row][1];
      const double recall = row_sum > 0 ? cnt[row][row] / row_sum : 0.0;
      worst = std::max(worst, std::abs(d.normalized_confusion(row, row) - recall));
      if (row_sum > 0)
        worst = std::max(worst,
                         std::abs(d.normalized_confusion(row, 0) +
                                  d.normalized_confusion(row, 1) - 1.0));
    }
  }

  detail = std::to_string(checked_matches) + " random match results, counting " +
           (structure_ok ? "consistent" : "INCONSISTENT") + ", max numeric gap " + fmt(worst, 2);
  return structure_ok && worst <= 1e-15;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-handover_events>\n";
    return 2;
  }
  g_cli_path = argv[1];
  if (!fs::exists(g_cli_path)) {
    std::cerr << "acceptance: CLI binary not found: " << g_cli_path << "\n";
    return 2;
  }
  g_scratch = fs::temp_directory_path() / "handover_acceptance";
  fs::create_directories(g_scratch);

  struct Entry {
    int id;
    const char* label;
    bool (*fn)(std::string&);
  };
  const Entry entries[] = {
      {1, "parameter gradients match central finite differences", check_gradients},
      {2, "smoothing matches the reflective-padding convolution oracle", check_smoothing},
      {3, "peak detection matches the prominence-by-definition oracle", check_peaks},
      {4, "loss identities (bce reduction, masked direction, linearity)", check_loss_identities},
      {5, "synthetic end-to-end detection and direction quality", check_end_to_end},
      {6, "integrated gradients satisfy completeness", check_completeness},
      {7, "training and evaluation are byte-for-byte deterministic", check_determinism},
      {8, "event metrics match exhaustive counting oracles", check_metric_arithmetic},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    std::string detail;
    bool ok = false;
    try {
      ok = e.fn(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    if (!ok) ++failures;
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << e.id << ": " << e.label
              << (detail.empty() ? "" : " — " + detail) << "\n";
    std::cout.flush();
  }

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 8 criteria passed\n";
  return 0;
}
