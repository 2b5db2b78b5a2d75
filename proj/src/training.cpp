// fex/training.cpp

// Copyright 2026 The fex authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fex/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace fex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

Tensor ctc_loss(const Tensor& log_probs,
                const std::vector<std::size_t>& target) {
  if (log_probs.rank() != 2) {
    throw std::invalid_argument("ctc_loss: log_probs must be [T x classes]");
  }
  const std::size_t t_len = log_probs.extent(0);
  const std::size_t classes = log_probs.extent(1);
  if (classes < 2) {
    throw std::invalid_argument("ctc_loss: need blank plus >= 1 symbol");
  }
  std::size_t repeats = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] == 0 || target[i] >= classes) {
      throw std::invalid_argument(
          "ctc_loss: target symbol " + std::to_string(target[i]) +
          " outside 1.." + std::to_string(classes - 1));
    }
    if (i > 0 && target[i] == target[i - 1]) ++repeats;
  }
  const std::size_t min_t = target.size() + repeats;
  if (t_len < min_t) {
    throw std::invalid_argument(
        "ctc_loss: " + std::to_string(t_len) +
        " frames cannot emit a target of length " +
        std::to_string(target.size()) + " with " + std::to_string(repeats) +
        " repeats (need >= " + std::to_string(min_t) + ")");
  }

  // Blank-augmented state sequence: blank, l1, blank, l2, ..., blank.
  const std::size_t s_len = 2 * target.size() + 1;
  auto label_of = [&target](std::size_t s) -> std::size_t {
    return (s % 2 == 0) ? 0 : target[s / 2];
  };
  const std::vector<double>& lp = log_probs.values();

  auto alpha = std::make_shared<std::vector<double>>(t_len * s_len, kNegInf);
  auto a = [&alpha, s_len](std::size_t t, std::size_t s) -> double& {
    return (*alpha)[t * s_len + s];
  };
  a(0, 0) = lp[label_of(0)];
  if (s_len > 1) a(0, 1) = lp[label_of(1)];
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double acc = a(t - 1, s);
      if (s >= 1) acc = logaddexp(acc, a(t - 1, s - 1));
      if (s >= 2 && label_of(s) != 0 && label_of(s) != label_of(s - 2)) {
        acc = logaddexp(acc, a(t - 1, s - 2));
      }
      if (acc != kNegInf) {
        a(t, s) = lp[t * classes + label_of(s)] + acc;
      }
    }
  }
  double total = a(t_len - 1, s_len - 1);
  if (s_len > 1) total = logaddexp(total, a(t_len - 1, s_len - 2));
  if (total == kNegInf) {
    throw std::invalid_argument("ctc_loss: no feasible alignment");
  }

  auto node = std::make_shared<detail::TensorNode>();
  node->shape = {1};
  node->values = {-total};
  if (log_probs.requires_grad()) {
    auto lp_node = log_probs.node();
    auto targets = std::make_shared<std::vector<std::size_t>>(target);
    node->requires_grad = true;
    node->parents = {lp_node};
    node->backprop = [lp_node, alpha, targets, t_len, s_len, classes,
                      total](const std::vector<double>& self_grad) {
      auto label_of = [&targets](std::size_t s) -> std::size_t {
        return (s % 2 == 0) ? 0 : (*targets)[s / 2];
      };
      auto a = [&alpha, s_len](std::size_t t, std::size_t s) -> double {
        return (*alpha)[t * s_len + s];
      };
      lp_node->ensure_grad();
      // Adjoints of the alpha table; loss = -logaddexp(final states).
      std::vector<double> bar(t_len * s_len, 0.0);
      const double d_total = -self_grad[0];
      bar[(t_len - 1) * s_len + (s_len - 1)] =
          d_total * std::exp(a(t_len - 1, s_len - 1) - total);
      if (s_len > 1) {
        bar[(t_len - 1) * s_len + (s_len - 2)] =
            d_total * std::exp(a(t_len - 1, s_len - 2) - total);
      }
      for (std::size_t t = t_len - 1; t >= 1; --t) {
        for (std::size_t s = 0; s < s_len; ++s) {
          const double g = bar[t * s_len + s];
          if (g == 0.0 || a(t, s) == kNegInf) continue;
          lp_node->grad[t * classes + label_of(s)] += g;
          // a(t,s) = lp + lse; each source term's share is exp(term - lse).
          const double lse = a(t, s) - (*lp_node).values[t * classes +
                                                         label_of(s)];
          if (a(t - 1, s) != kNegInf) {
            bar[(t - 1) * s_len + s] += g * std::exp(a(t - 1, s) - lse);
          }
          if (s >= 1 && a(t - 1, s - 1) != kNegInf) {
            bar[(t - 1) * s_len + s - 1] +=
                g * std::exp(a(t - 1, s - 1) - lse);
          }
          if (s >= 2 && label_of(s) != 0 && label_of(s) != label_of(s - 2) &&
              a(t - 1, s - 2) != kNegInf) {
            bar[(t - 1) * s_len + s - 2] +=
                g * std::exp(a(t - 1, s - 2) - lse);
          }
        }
      }
      for (std::size_t s = 0; s < std::min<std::size_t>(2, s_len); ++s) {
        const double g = bar[s];
        if (g != 0.0 && a(0, s) != kNegInf) {
          lp_node->grad[label_of(s)] += g;
        }
      }
    };
  }
  return Tensor::wrap(node);
}

std::vector<std::size_t> greedy_ctc_decode(const Tensor& log_probs) {
  const std::size_t t_len = log_probs.extent(0);
  const std::size_t classes = log_probs.extent(1);
  std::vector<std::size_t> out;
  std::size_t prev = 0;
  for (std::size_t t = 0; t < t_len; ++t) {
    std::size_t best = 0;
    double best_v = log_probs.values()[t * classes];
    for (std::size_t c = 1; c < classes; ++c) {
      const double v = log_probs.values()[t * classes + c];
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    if (best != 0 && best != prev) out.push_back(best);
    prev = best;
  }
  return out;
}

std::size_t edit_distance(const std::vector<std::size_t>& a,
                          const std::vector<std::size_t>& b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      const std::size_t next =
          std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = row[j];
      row[j] = next;
    }
  }
  return row[b.size()];
}

double clip_grad_norm(std::vector<NamedParam>& params, double max_norm) {
  if (!(max_norm > 0.0)) {
    throw std::invalid_argument("clip_grad_norm: max_norm must be positive");
  }
  double sq = 0.0;
  for (auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("clip_grad_norm: non-finite gradient in " +
                                 p.name);
      }
      sq += g * g;
    }
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& p : params) {
      if (!p.tensor.has_grad()) continue;
      for (double& g : p.tensor.grad_mut()) g *= scale;
    }
  }
  return norm;
}

double one_cycle_lr(std::size_t step, std::size_t total_steps,
                    double lr_start, double lr_peak, double lr_end) {
  if (total_steps == 0) throw std::invalid_argument("one_cycle_lr: no steps");
  if (step > total_steps) {
    throw std::invalid_argument("one_cycle_lr: step beyond total_steps");
  }
  const double half = static_cast<double>(total_steps) / 2.0;
  const double s = static_cast<double>(step);
  if (s <= half) {
    return lr_start + (lr_peak - lr_start) * (s / half);
  }
  return lr_peak + (lr_end - lr_peak) * ((s - half) / half);
}

void AdamW::step(std::vector<NamedParam>& params, double lr) {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (auto& p : params) {
    if (!p.tensor.requires_grad() || !p.tensor.has_grad()) continue;
    auto& mom = moments_[p.name];
    std::vector<double>& w = p.tensor.values_mut();
    const std::vector<double>& g = p.tensor.grad();
    if (mom.m.size() != w.size()) {
      mom.m.assign(w.size(), 0.0);
      mom.v.assign(w.size(), 0.0);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      mom.m[i] = cfg_.beta1 * mom.m[i] + (1.0 - cfg_.beta1) * g[i];
      mom.v[i] = cfg_.beta2 * mom.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = mom.m[i] / bc1;
      const double v_hat = mom.v[i] / bc2;
      w[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg_.epsilon) +
                    cfg_.weight_decay * w[i]);
    }
  }
}

ToyDataset make_toy_dataset(const ToyTaskConfig& cfg) {
  if (cfg.num_symbols == 0 || cfg.tone_hz.size() < cfg.num_symbols) {
    throw std::invalid_argument(
        "toy task: need one tone frequency per symbol");
  }
  for (std::size_t k = 0; k < cfg.num_symbols; ++k) {
    if (!(cfg.tone_hz[k] > 0.0 && cfg.tone_hz[k] < cfg.sample_rate / 2.0)) {
      throw std::invalid_argument("toy task: tone outside (0, Nyquist)");
    }
  }
  if (cfg.min_target_len == 0 || cfg.min_target_len > cfg.max_target_len) {
    throw std::invalid_argument("toy task: bad target length range");
  }
  // Segments must cover every front-end's receptive field (the largest is
  // the log-mel + VGG pipeline at ~145 ms).
  if (cfg.segment_ms < 150) {
    throw std::invalid_argument("toy task: segment_ms must be >= 150");
  }

  RandomSource rng(cfg.seed);
  const auto seg = static_cast<std::size_t>(cfg.segment_ms *
                                            cfg.sample_rate / 1000.0);
  const auto gap = static_cast<std::size_t>(cfg.gap_ms * cfg.sample_rate /
                                            1000.0);
  const double tone_rms = cfg.tone_amplitude / std::sqrt(2.0);
  const double noise_std = tone_rms / std::pow(10.0, cfg.snr_db / 20.0);

  auto make_example = [&]() {
    ToyExample ex;
    const std::size_t len =
        cfg.min_target_len +
        rng.uniform_int(cfg.max_target_len - cfg.min_target_len + 1);
    ex.target.resize(len);
    for (auto& s : ex.target) s = 1 + rng.uniform_int(cfg.num_symbols);
    ex.wave.sample_rate = cfg.sample_rate;
    // One gap before each segment, none after the last: the utterance ends
    // on tone so late frames keep the final symbol in their receptive field.
    ex.wave.samples.assign(len * (gap + seg), 0.0);
    std::size_t pos = gap;
    for (std::size_t s : ex.target) {
      const double hz = cfg.tone_hz[s - 1];
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      for (std::size_t i = 0; i < seg; ++i) {
        ex.wave.samples[pos + i] =
            cfg.tone_amplitude *
            std::sin(2.0 * M_PI * hz * static_cast<double>(i) /
                         cfg.sample_rate +
                     phase);
      }
      pos += seg + gap;
    }
    for (double& v : ex.wave.samples) v += noise_std * rng.normal();
    return ex;
  };

  ToyDataset data;
  data.train.reserve(cfg.train_size);
  data.dev.reserve(cfg.dev_size);
  for (std::size_t i = 0; i < cfg.train_size; ++i) {
    data.train.push_back(make_example());
  }
  for (std::size_t i = 0; i < cfg.dev_size; ++i) {
    data.dev.push_back(make_example());
  }
  return data;
}

PipelineModel::PipelineModel(const FrontendConfig& cfg,
                             std::size_t num_symbols,
                             std::size_t encoder_hidden, RandomSource& rng)
    : frontend_(cfg, rng), num_symbols_(num_symbols) {
  if (num_symbols == 0) {
    throw std::invalid_argument("pipeline: need >= 1 symbol");
  }
  if (uses_vgg(cfg)) vgg_ = init_vgg_params(rng);
  const std::size_t feat = pipeline_feature_dim(cfg);
  const double b_lin = std::sqrt(1.0 / static_cast<double>(feat));
  head_.push_back({"pipe.linear.weight",
                   Tensor::uniform({kModelDim, feat}, b_lin, rng)});
  head_.push_back({"pipe.linear.bias", Tensor::zeros({kModelDim}, true)});
  const double b_ff1 = std::sqrt(1.0 / static_cast<double>(kModelDim));
  head_.push_back({"enc.ff1.weight",
                   Tensor::uniform({encoder_hidden, kModelDim}, b_ff1, rng)});
  head_.push_back({"enc.ff1.bias", Tensor::zeros({encoder_hidden}, true)});
  const double b_ff2 = std::sqrt(1.0 / static_cast<double>(encoder_hidden));
  head_.push_back({"enc.ff2.weight",
                   Tensor::uniform({num_symbols + 1, encoder_hidden}, b_ff2,
                                   rng)});
  head_.push_back({"enc.ff2.bias", Tensor::zeros({num_symbols + 1}, true)});
}

Tensor PipelineModel::forward(const Waveform& w) const {
  FeatureTensor feat = frontend_.forward(w);
  if (!vgg_.empty()) feat = vgg_block_forward(feat, vgg_);
  Tensor x = linear(feat.values, head_[0].tensor, &head_[1].tensor);
  x = relu(linear(x, head_[2].tensor, &head_[3].tensor));
  x = linear(x, head_[4].tensor, &head_[5].tensor);
  return log_softmax_rows(x);
}

std::vector<NamedParam> PipelineModel::parameters() const {
  std::vector<NamedParam> all = frontend_.parameters();
  all.insert(all.end(), vgg_.begin(), vgg_.end());
  all.insert(all.end(), head_.begin(), head_.end());
  return all;
}

std::vector<NamedParam> PipelineModel::trainable_parameters() const {
  std::vector<NamedParam> out;
  for (const auto& p : parameters()) {
    if (p.tensor.requires_grad()) out.push_back(p);
  }
  return out;
}

void PipelineModel::load_parameters(const std::vector<NamedParam>& source) {
  auto all = parameters();
  for (const auto& s : source) {
    for (auto& p : all) {
      if (p.name != s.name) continue;
      if (p.tensor.shape() != s.tensor.shape()) {
        throw std::invalid_argument(
            "checkpoint parameter " + s.name + " has shape " +
            shape_to_string(s.tensor.shape()) + ", model expects " +
            shape_to_string(p.tensor.shape()));
      }
      p.tensor.values_mut() = s.tensor.values();
    }
  }
}

TrainingReport train_toy(PipelineModel& model, const ToyTaskConfig& task,
                         const TrainToyOptions& opts, const MaskSpec& masks,
                         RandomSource& rng) {
  if (opts.epochs == 0 || opts.batch == 0) {
    throw std::invalid_argument("train_toy: epochs and batch must be >= 1");
  }
  const ToyDataset data = make_toy_dataset(task);
  auto trainable = model.trainable_parameters();
  AdamW::Config adam_cfg;
  adam_cfg.weight_decay = opts.weight_decay;
  AdamW optimizer(adam_cfg);

  const std::size_t batches_per_epoch =
      (data.train.size() + opts.batch - 1) / opts.batch;
  const std::size_t total_steps = opts.epochs * batches_per_epoch;
  std::size_t step = 0;

  TrainingReport report;
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    // Fisher-Yates shuffle from the run's RandomSource.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_int(i)]);
    }
    double epoch_loss = 0.0;
    std::size_t epoch_count = 0;
    double last_lr = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t begin = b * opts.batch;
      const std::size_t end =
          std::min(begin + opts.batch, data.train.size());
      last_lr = one_cycle_lr(step, total_steps, opts.lr_start, opts.lr_peak,
                             opts.lr_end);
      for (auto& p : trainable) p.tensor.zero_grad();
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        const ToyExample& ex = data.train[order[i]];
        Waveform w = ex.wave;
        if (opts.speed_perturb) {
          static constexpr double kFactors[3] = {0.9, 1.0, 1.1};
          w = resample_speed(w, kFactors[rng.uniform_int(3)]);
        }
        if (opts.stft_masking) {
          w = apply_stft_masks(w, masks, rng);
        }
        const Tensor log_probs = model.forward(w);
        const Tensor loss = ctc_loss(log_probs, ex.target);
        if (!std::isfinite(loss.item())) {
          throw std::runtime_error(
              "train_toy: loss diverged (non-finite) at step " +
              std::to_string(step));
        }
        backward(scale(loss, inv));
        epoch_loss += loss.item();
        ++epoch_count;
      }
      clip_grad_norm(trainable, opts.max_grad_norm);
      optimizer.step(trainable, last_lr);
      ++step;
    }

    std::size_t errors = 0;
    std::size_t symbols = 0;
    for (const auto& ex : data.dev) {
      const Tensor log_probs = model.forward(ex.wave);
      errors += edit_distance(greedy_ctc_decode(log_probs), ex.target);
      symbols += ex.target.size();
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = epoch_loss / static_cast<double>(epoch_count);
    stats.dev_symbol_error_rate =
        static_cast<double>(errors) / static_cast<double>(symbols);
    stats.dev_accuracy = 1.0 - stats.dev_symbol_error_rate;
    stats.lr = last_lr;
    report.epochs.push_back(stats);
  }

  report.first_epoch_loss = report.epochs.front().mean_loss;
  report.final_epoch_loss = report.epochs.back().mean_loss;
  report.final_dev_accuracy = report.epochs.back().dev_accuracy;
  return report;
}

}  // namespace fex
