// fex/frontends.hpp

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

#ifndef FEX_FRONTENDS_HPP_
#define FEX_FRONTENDS_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "fex/dsp.hpp"
#include "fex/tensor.hpp"

namespace fex {

/// Acoustic-model input dimension the final linear projection maps to.
inline constexpr std::size_t kModelDim = 512;

/// Classical pipeline: stft -> squared magnitude -> Mel matrix -> log.
/// No learnable parameters; 10 ms frame shift.
struct LogMelConfig {
  std::size_t window = 400;
  std::size_t hop = 160;
  std::size_t n_mels = 80;
  double log_epsilon = 1e-10;
};

/// Two-layer learnable front-end: wide conv1d filterbank, magnitude, then a
/// small multi-resolution depthwise conv shared across channels. 10 ms shift,
/// feature dim n_filters * depth_filters.
struct ScfConfig {
  std::size_t n_filters = 150;
  std::size_t kernel = 256;
  std::size_t stride = 10;
  std::size_t depth_filters = 5;
  std::size_t depth_kernel = 40;
  std::size_t depth_stride = 16;
  double root_power = 2.5;
  double ln_epsilon = 1e-5;
};

/// Stack of strided 1D convolutions (no conv biases), group norm after the
/// first layer, GELU after every layer. 40 ms shift, dim = channels.
struct Wav2vecConfig {
  std::size_t channels = 512;
  std::array<std::size_t, 8> kernels = {10, 3, 3, 3, 3, 2, 2, 2};
  std::array<std::size_t, 8> strides = {5, 2, 2, 2, 2, 2, 2, 2};
  double gn_epsilon = 1e-5;
};

enum class FirstLayer { kStftMagnitude, kStftReIm, kFilterbank };
enum class FilterbankInit { kRandom, kGammatone };

/// Unified front-end: a first layer producing a [1 x time x feature] plane,
/// then a stack of 3x3 2D convolutions (same padding, ReLU, stride 2 in time
/// only on stride2_layer_count of them), channels merged into the feature
/// axis at the end. The product of all time strides must equal 640 (40 ms).
struct Generic2dConfig {
  FirstLayer first_layer = FirstLayer::kFilterbank;
  // STFT first layers.
  std::size_t window = 400;
  std::size_t hop = 160;
  // Filterbank first layer (conv1d, no bias, magnitude activation).
  std::size_t fb_filters = 128;
  std::size_t fb_kernel = 256;
  std::size_t fb_stride = 10;
  bool fb_trainable = true;
  FilterbankInit fb_init = FilterbankInit::kRandom;
  double fb_f_min = 50.0;   // gammatone init only
  double fb_f_max = 7800.0;  // gammatone init only
  // 2D stack.
  std::size_t n_2d_layers = 6;
  std::size_t stride2_layer_count = 6;
  std::size_t channels_2d = 32;
};

using FrontendConfig =
    std::variant<LogMelConfig, ScfConfig, Wav2vecConfig, Generic2dConfig>;

std::string frontend_name(const FrontendConfig& cfg);

/// Throws std::invalid_argument on internally inconsistent settings,
/// including a generic2d time-stride product different from 640.
void validate_config(const FrontendConfig& cfg);

/// Frame-level features: values is [frames x dim].
struct FeatureTensor {
  std::size_t frames = 0;
  std::size_t dim = 0;
  Tensor values;
};

struct NamedParam {
  std::string name;
  Tensor tensor;
};

/// Per-layer time strides of the 2D stack: stride-2 layers first, with any
/// stride-1 layers distributed after them in round-robin order.
std::vector<std::size_t> stride2_plan(std::size_t n_layers,
                                      std::size_t n_stride2);

/// One of the four front-ends with its learnable parameters. forward() builds
/// the autodiff graph from the parameter leaves, so gradients reach every
/// trainable tensor.
class FrontendModel {
 public:
  FrontendModel(const FrontendConfig& cfg, RandomSource& rng);

  const FrontendConfig& config() const { return cfg_; }
  std::vector<NamedParam>& parameters() { return params_; }
  const std::vector<NamedParam>& parameters() const { return params_; }

  /// Throws std::out_of_range for unknown names.
  Tensor& param(const std::string& name);
  const Tensor& param(const std::string& name) const;

  FeatureTensor forward(const Waveform& w) const;

 private:
  FrontendConfig cfg_;
  std::vector<NamedParam> params_;
};

/// 4-layer VGG-style subsampler: 3x3, same padding, ReLU, channels
/// 1 -> 32 -> 64 -> 64 -> 32, time stride 2 on layers 2 and 4. Takes 10 ms
/// features (log Mel or the two-layer front-end) to the 40 ms frame rate.
std::vector<NamedParam> init_vgg_params(RandomSource& rng);
FeatureTensor vgg_block_forward(const FeatureTensor& f,
                                const std::vector<NamedParam>& params);

/// Whether the pipeline inserts the VGG block after this front-end.
bool uses_vgg(const FrontendConfig& cfg);

/// Feature dimensionality straight out of the front-end (pre-VGG).
std::size_t frontend_output_dim(const FrontendConfig& cfg);

/// Feature dimensionality entering the final linear layer (post-VGG where
/// the VGG block applies).
std::size_t pipeline_feature_dim(const FrontendConfig& cfg);

/// Samples per output frame of the front-end alone.
std::size_t frontend_stride(const FrontendConfig& cfg);

/// Samples per frame at the encoder input, including the VGG block's x4
/// where it applies. 640 for every supported configuration.
std::size_t overall_stride(const FrontendConfig& cfg);

/// Learnable scalars in the front-end itself (frozen filterbanks excluded).
std::size_t count_frontend_parameters(const FrontendConfig& cfg);

/// Front-end + VGG block (where applicable) + linear map to model_dim.
std::size_t count_pipeline_parameters(const FrontendConfig& cfg,
                                      std::size_t model_dim = kModelDim);

}  // namespace fex

#endif  // FEX_FRONTENDS_HPP_
