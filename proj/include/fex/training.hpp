// fex/training.hpp

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

#ifndef FEX_TRAINING_HPP_
#define FEX_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fex/frontends.hpp"
#include "fex/specaugment.hpp"
#include "fex/tensor.hpp"

namespace fex {

/// CTC loss of a [T x (K+1)] table of log-probabilities against a target of
/// symbols in 1..K; index 0 is the blank. Marginalizes over all blank-
/// augmented alignments with the forward algorithm in log space. The result
/// participates in backward(). Throws std::invalid_argument when T is too
/// short to emit the target (L plus one per adjacent repeat).
Tensor ctc_loss(const Tensor& log_probs,
                const std::vector<std::size_t>& target);

/// Greedy frame-wise decoding: argmax per frame, collapse repeats, drop
/// blanks.
std::vector<std::size_t> greedy_ctc_decode(const Tensor& log_probs);

/// Levenshtein distance over symbol sequences.
std::size_t edit_distance(const std::vector<std::size_t>& a,
                          const std::vector<std::size_t>& b);

/// Scales all gradients by max_norm/norm when the global L2 norm exceeds
/// max_norm. Returns the pre-clip norm. Throws std::runtime_error on
/// non-finite gradients.
double clip_grad_norm(std::vector<NamedParam>& params, double max_norm);

/// Piecewise-linear one-cycle schedule: lr_start to lr_peak over the first
/// half of training, lr_peak to lr_end over the second half.
double one_cycle_lr(std::size_t step, std::size_t total_steps,
                    double lr_start = 7e-6, double lr_peak = 7e-4,
                    double lr_end = 7e-6);

/// Decoupled-weight-decay Adam. Moment buffers are keyed by parameter name
/// and created on first use.
class AdamW {
 public:
  struct Config {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW() = default;
  explicit AdamW(const Config& cfg) : cfg_(cfg) {}

  std::size_t step_count() const { return step_; }

  /// One update with the given learning rate. Parameters without a gradient
  /// buffer or with requires_grad unset are skipped.
  void step(std::vector<NamedParam>& params, double lr);

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  Config cfg_;
  std::size_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

/// Synthetic tone-sequence task: each symbol is a fixed-frequency tone
/// segment with additive noise. A noise-only gap precedes each segment so
/// repeated symbols stay decodable under CTC, and the waveform ends at the
/// last segment so the final frames (the natural CTC emission point for the
/// last symbol) still have the tone inside their receptive field.
struct ToyTaskConfig {
  std::size_t num_symbols = 2;
  std::vector<double> tone_hz = {500.0, 2000.0};
  double sample_rate = 16000.0;
  std::size_t segment_ms = 400;
  std::size_t gap_ms = 100;
  double tone_amplitude = 0.3;
  double snr_db = 10.0;
  std::size_t min_target_len = 1;
  std::size_t max_target_len = 2;
  std::size_t train_size = 48;
  std::size_t dev_size = 16;
  std::uint64_t seed = 7;
};

struct ToyExample {
  Waveform wave;
  std::vector<std::size_t> target;  // symbols in 1..K
};

struct ToyDataset {
  std::vector<ToyExample> train;
  std::vector<ToyExample> dev;
};

ToyDataset make_toy_dataset(const ToyTaskConfig& cfg);

/// Front-end + (VGG where the pipeline uses it) + linear to the model
/// dimension + two feed-forward layers + log-softmax over blank and symbols.
class PipelineModel {
 public:
  PipelineModel(const FrontendConfig& cfg, std::size_t num_symbols,
                std::size_t encoder_hidden, RandomSource& rng);

  const FrontendConfig& config() const { return frontend_.config(); }
  std::size_t num_symbols() const { return num_symbols_; }

  /// [frames x (num_symbols+1)] log-probabilities.
  Tensor forward(const Waveform& w) const;

  /// All named tensors, frozen ones included. Copies share storage with the
  /// model, so writing through them updates the model.
  std::vector<NamedParam> parameters() const;
  std::vector<NamedParam> trainable_parameters() const;

  /// Overwrites any parameter whose name appears in the checkpoint map.
  /// Throws std::invalid_argument on shape mismatch.
  void load_parameters(const std::vector<NamedParam>& source);

  FrontendModel& frontend() { return frontend_; }
  const FrontendModel& frontend() const { return frontend_; }

 private:
  FrontendModel frontend_;
  std::vector<NamedParam> vgg_;
  std::vector<NamedParam> head_;
  std::size_t num_symbols_;
};

struct TrainToyOptions {
  std::size_t epochs = 30;
  std::size_t batch = 8;
  double lr_start = 7e-6;
  double lr_peak = 7e-4;
  double lr_end = 7e-6;
  double max_grad_norm = 1.0;
  double weight_decay = 0.01;
  bool speed_perturb = true;
  bool stft_masking = true;
  std::size_t encoder_hidden = 128;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double dev_symbol_error_rate = 0.0;
  double dev_accuracy = 0.0;
  double lr = 0.0;
};

struct TrainingReport {
  std::vector<EpochStats> epochs;
  double first_epoch_loss = 0.0;
  double final_epoch_loss = 0.0;
  double final_dev_accuracy = 0.0;
};

/// Full toy training run. Pipeline per step: optional speed perturbation
/// (factor drawn from {0.9, 1.0, 1.1}), optional STFT-domain masking, model
/// forward, CTC loss, backward, global-norm clipping, AdamW with the
/// one-cycle schedule. Deterministic given rng and the task seed. Throws
/// std::runtime_error with the step index if the loss turns non-finite.
TrainingReport train_toy(PipelineModel& model, const ToyTaskConfig& task,
                         const TrainToyOptions& opts, const MaskSpec& masks,
                         RandomSource& rng);

}  // namespace fex

#endif  // FEX_TRAINING_HPP_
