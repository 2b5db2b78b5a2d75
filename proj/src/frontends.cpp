// fex/frontends.cpp

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

#include "fex/frontends.hpp"

#include <cmath>
#include <stdexcept>

namespace fex {

namespace {

constexpr std::size_t kEncoderStride = 640;  // 40 ms at 16 kHz
constexpr std::array<std::size_t, 5> kVggChannels = {1, 32, 64, 64, 32};
constexpr std::array<std::size_t, 4> kVggTimeStrides = {1, 2, 1, 2};

Tensor uniform_init(Shape shape, std::size_t fan_in, RandomSource& rng,
                    bool requires_grad = true) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  return Tensor::uniform(std::move(shape), bound, rng, requires_grad);
}

std::size_t stft_bins(std::size_t window) {
  return next_power_of_two(window) / 2 + 1;
}

std::size_t first_layer_stride(const Generic2dConfig& cfg) {
  return cfg.first_layer == FirstLayer::kFilterbank ? cfg.fb_stride : cfg.hop;
}

std::size_t first_layer_features(const Generic2dConfig& cfg) {
  return cfg.first_layer == FirstLayer::kFilterbank ? cfg.fb_filters
                                                    : stft_bins(cfg.window);
}

}  // namespace

std::string frontend_name(const FrontendConfig& cfg) {
  if (std::holds_alternative<LogMelConfig>(cfg)) return "log_mel";
  if (std::holds_alternative<ScfConfig>(cfg)) return "scf";
  if (std::holds_alternative<Wav2vecConfig>(cfg)) return "wav2vec_fe";
  return "generic2d";
}

void validate_config(const FrontendConfig& cfg) {
  if (const auto* c = std::get_if<LogMelConfig>(&cfg)) {
    if (c->window == 0 || c->hop == 0 || c->n_mels == 0) {
      throw std::invalid_argument("log_mel: window, hop, n_mels must be > 0");
    }
    if (!(c->log_epsilon > 0.0)) {
      throw std::invalid_argument("log_mel: log_epsilon must be > 0");
    }
  } else if (const auto* c = std::get_if<ScfConfig>(&cfg)) {
    if (c->n_filters == 0 || c->kernel == 0 || c->stride == 0 ||
        c->depth_filters == 0 || c->depth_kernel == 0 || c->depth_stride == 0) {
      throw std::invalid_argument("scf: all sizes and strides must be > 0");
    }
    if (!(c->root_power > 1.0)) {
      throw std::invalid_argument("scf: root_power must exceed 1");
    }
  } else if (const auto* c = std::get_if<Wav2vecConfig>(&cfg)) {
    if (c->channels == 0) {
      throw std::invalid_argument("wav2vec_fe: channels must be > 0");
    }
    for (std::size_t i = 0; i < c->kernels.size(); ++i) {
      if (c->kernels[i] == 0 || c->strides[i] == 0) {
        throw std::invalid_argument(
            "wav2vec_fe: kernels and strides must be > 0");
      }
    }
  } else {
    const auto& g = std::get<Generic2dConfig>(cfg);
    if (g.channels_2d == 0) {
      throw std::invalid_argument("generic2d: channels_2d must be > 0");
    }
    if (g.n_2d_layers == 0 || g.n_2d_layers < g.stride2_layer_count) {
      throw std::invalid_argument(
          "generic2d: need n_2d_layers >= max(1, stride2_layer_count)");
    }
    if (g.first_layer == FirstLayer::kFilterbank) {
      if (g.fb_filters == 0 || g.fb_kernel == 0 || g.fb_stride == 0) {
        throw std::invalid_argument("generic2d: filterbank sizes must be > 0");
      }
    } else if (g.window == 0 || g.hop == 0) {
      throw std::invalid_argument("generic2d: window and hop must be > 0");
    }
    const std::size_t product = first_layer_stride(g)
                                << g.stride2_layer_count;
    if (product != kEncoderStride) {
      throw std::invalid_argument(
          "generic2d: first-layer stride " +
          std::to_string(first_layer_stride(g)) + " x 2^" +
          std::to_string(g.stride2_layer_count) + " = " +
          std::to_string(product) + ", expected " +
          std::to_string(kEncoderStride));
    }
  }
}

std::vector<std::size_t> stride2_plan(std::size_t n_layers,
                                      std::size_t n_stride2) {
  if (n_stride2 > n_layers) {
    throw std::invalid_argument("stride2_plan: more stride-2 layers than layers");
  }
  if (n_stride2 == 0) return std::vector<std::size_t>(n_layers, 1);
  // One block per stride-2 layer; extra stride-1 layers join the blocks in
  // round-robin order, so they always follow a stride-2 layer.
  std::vector<std::vector<std::size_t>> blocks(n_stride2, {2});
  for (std::size_t extra = 0; extra < n_layers - n_stride2; ++extra) {
    blocks[extra % n_stride2].push_back(1);
  }
  std::vector<std::size_t> plan;
  plan.reserve(n_layers);
  for (const auto& block : blocks) {
    plan.insert(plan.end(), block.begin(), block.end());
  }
  return plan;
}

FrontendModel::FrontendModel(const FrontendConfig& cfg, RandomSource& rng)
    : cfg_(cfg) {
  validate_config(cfg_);
  if (std::holds_alternative<LogMelConfig>(cfg_)) {
    return;  // static pipeline, nothing learnable
  }
  if (const auto* c = std::get_if<ScfConfig>(&cfg_)) {
    params_.push_back({"scf.l1.weight",
                       uniform_init({c->n_filters, 1, c->kernel}, c->kernel,
                                    rng)});
    params_.push_back({"scf.l1.bias", Tensor::zeros({c->n_filters}, true)});
    params_.push_back({"scf.l2.weight",
                       uniform_init({c->depth_filters, c->depth_kernel},
                                    c->depth_kernel, rng)});
    params_.push_back({"scf.l2.bias", Tensor::zeros({c->depth_filters}, true)});
    const std::size_t dim = c->n_filters * c->depth_filters;
    params_.push_back({"scf.ln.gain", Tensor::full({dim}, 1.0, true)});
    params_.push_back({"scf.ln.offset", Tensor::zeros({dim}, true)});
    return;
  }
  if (const auto* c = std::get_if<Wav2vecConfig>(&cfg_)) {
    for (std::size_t i = 0; i < c->kernels.size(); ++i) {
      const std::size_t c_in = i == 0 ? 1 : c->channels;
      params_.push_back({"w2v.conv" + std::to_string(i + 1) + ".weight",
                         uniform_init({c->channels, c_in, c->kernels[i]},
                                      c_in * c->kernels[i], rng)});
    }
    params_.push_back({"w2v.gn.gain", Tensor::full({c->channels}, 1.0, true)});
    params_.push_back({"w2v.gn.offset", Tensor::zeros({c->channels}, true)});
    return;
  }
  const auto& c = std::get<Generic2dConfig>(cfg_);
  const auto plan = stride2_plan(c.n_2d_layers, c.stride2_layer_count);
  std::size_t first_2d = 0;  // index into plan of the first plain 2D layer
  if (c.first_layer == FirstLayer::kFilterbank) {
    Tensor weight;
    if (c.fb_init == FilterbankInit::kGammatone) {
      FilterBank bank = gammatone_filterbank(c.fb_filters, c.fb_kernel,
                                             16000.0, c.fb_f_min, c.fb_f_max);
      weight = Tensor::from_values({c.fb_filters, 1, c.fb_kernel},
                                   bank.filters.values(), c.fb_trainable);
    } else {
      weight = uniform_init({c.fb_filters, 1, c.fb_kernel}, c.fb_kernel, rng,
                            c.fb_trainable);
    }
    params_.push_back({"g2d.first.weight", weight});
  } else if (c.first_layer == FirstLayer::kStftReIm) {
    // The paired real/imaginary convolutions are 2D layer 1.
    for (const char* plane : {"re", "im"}) {
      params_.push_back({std::string("g2d.conv1_") + plane + ".weight",
                         uniform_init({c.channels_2d, 1, 3, 3}, 9, rng)});
      params_.push_back({std::string("g2d.conv1_") + plane + ".bias",
                         Tensor::zeros({c.channels_2d}, true)});
    }
    first_2d = 1;
  }
  for (std::size_t i = first_2d; i < c.n_2d_layers; ++i) {
    const std::size_t c_in = i == 0 ? 1 : c.channels_2d;
    params_.push_back({"g2d.conv" + std::to_string(i + 1) + ".weight",
                       uniform_init({c.channels_2d, c_in, 3, 3}, c_in * 9,
                                    rng)});
    params_.push_back({"g2d.conv" + std::to_string(i + 1) + ".bias",
                       Tensor::zeros({c.channels_2d}, true)});
  }
}

Tensor& FrontendModel::param(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw std::out_of_range("no parameter named " + name);
}

const Tensor& FrontendModel::param(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw std::out_of_range("no parameter named " + name);
}

namespace {

Tensor waveform_tensor(const Waveform& w) {
  return Tensor::from_values({1, w.samples.size()}, w.samples);
}

// [C x T] -> [T x C]
Tensor transpose_ct(const Tensor& x) {
  const std::size_t c = x.extent(0);
  const std::size_t t = x.extent(1);
  return reshape(channels_to_plane(x), {t, c});
}

FeatureTensor to_feature(Tensor values) {
  FeatureTensor f;
  f.frames = values.extent(0);
  f.dim = values.extent(1);
  f.values = std::move(values);
  return f;
}

FeatureTensor logmel_forward(const Waveform& w, const LogMelConfig& cfg) {
  const ComplexSpectrogram spec = stft(w, cfg.window, cfg.hop);
  std::vector<double> power(spec.frames * spec.bins);
  for (std::size_t i = 0; i < power.size(); ++i) {
    power[i] = std::norm(spec.values[i]);
  }
  Tensor p = Tensor::from_values({spec.frames, spec.bins}, std::move(power));
  const Tensor mel = mel_filterbank_matrix(cfg.n_mels, spec.n_fft,
                                           w.sample_rate, 0.0,
                                           w.sample_rate / 2.0);
  // linear() wants [n_mels x bins]; mel_filterbank_matrix is its transpose.
  std::vector<double> wt(cfg.n_mels * spec.bins);
  for (std::size_t b = 0; b < spec.bins; ++b) {
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      wt[m * spec.bins + b] = mel.values()[b * cfg.n_mels + m];
    }
  }
  Tensor mel_t = Tensor::from_values({cfg.n_mels, spec.bins}, std::move(wt));
  return to_feature(log_eps(linear(p, mel_t, nullptr), cfg.log_epsilon));
}

}  // namespace

FeatureTensor FrontendModel::forward(const Waveform& w) const {
  if (const auto* c = std::get_if<LogMelConfig>(&cfg_)) {
    return logmel_forward(w, *c);
  }
  if (const auto* c = std::get_if<ScfConfig>(&cfg_)) {
    Tensor x = waveform_tensor(w);
    x = conv1d(x, param("scf.l1.weight"), &param("scf.l1.bias"), c->stride,
               Padding::kValid);
    x = abs_value(x);
    x = depthwise_conv1d(x, param("scf.l2.weight"), &param("scf.l2.bias"),
                         c->depth_stride);
    x = magnitude_root(x, c->root_power);
    x = transpose_ct(x);
    x = layer_norm(x, param("scf.ln.gain"), param("scf.ln.offset"),
                   c->ln_epsilon);
    return to_feature(x);
  }
  if (const auto* c = std::get_if<Wav2vecConfig>(&cfg_)) {
    Tensor x = waveform_tensor(w);
    for (std::size_t i = 0; i < c->kernels.size(); ++i) {
      x = conv1d(x, param("w2v.conv" + std::to_string(i + 1) + ".weight"),
                 nullptr, c->strides[i], Padding::kValid);
      if (i == 0) {
        x = group_norm(x, c->channels, param("w2v.gn.gain"),
                       param("w2v.gn.offset"), c->gn_epsilon);
      }
      x = gelu(x);
    }
    return to_feature(transpose_ct(x));
  }

  const auto& c = std::get<Generic2dConfig>(cfg_);
  const auto plan = stride2_plan(c.n_2d_layers, c.stride2_layer_count);
  Tensor x;
  std::size_t next_layer = 0;
  if (c.first_layer == FirstLayer::kFilterbank) {
    Tensor fb = conv1d(waveform_tensor(w), param("g2d.first.weight"), nullptr,
                       c.fb_stride, Padding::kValid);
    x = channels_to_plane(abs_value(fb));
  } else {
    const ComplexSpectrogram spec = stft(w, c.window, c.hop);
    std::vector<double> re(spec.frames * spec.bins);
    std::vector<double> im(spec.frames * spec.bins);
    for (std::size_t i = 0; i < re.size(); ++i) {
      re[i] = spec.values[i].real();
      im[i] = spec.values[i].imag();
    }
    if (c.first_layer == FirstLayer::kStftMagnitude) {
      std::vector<double> mag(re.size());
      for (std::size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::hypot(re[i], im[i]);
      }
      x = Tensor::from_values({1, spec.frames, spec.bins}, std::move(mag));
    } else {
      Tensor re_t =
          Tensor::from_values({1, spec.frames, spec.bins}, std::move(re));
      Tensor im_t =
          Tensor::from_values({1, spec.frames, spec.bins}, std::move(im));
      Tensor a = conv2d(re_t, param("g2d.conv1_re.weight"),
                        &param("g2d.conv1_re.bias"), plan[0], 1,
                        Padding::kSame);
      Tensor b = conv2d(im_t, param("g2d.conv1_im.weight"),
                        &param("g2d.conv1_im.bias"), plan[0], 1,
                        Padding::kSame);
      x = relu(add(a, b));
      next_layer = 1;
    }
  }
  for (std::size_t i = next_layer; i < c.n_2d_layers; ++i) {
    const std::string layer = "g2d.conv" + std::to_string(i + 1);
    x = conv2d(x, param(layer + ".weight"), &param(layer + ".bias"), plan[i],
               1, Padding::kSame);
    x = relu(x);
  }
  return to_feature(merge_channels_into_features(x));
}

std::vector<NamedParam> init_vgg_params(RandomSource& rng) {
  std::vector<NamedParam> params;
  for (std::size_t i = 0; i + 1 < kVggChannels.size(); ++i) {
    const std::size_t c_in = kVggChannels[i];
    const std::size_t c_out = kVggChannels[i + 1];
    params.push_back({"vgg.conv" + std::to_string(i + 1) + ".weight",
                      uniform_init({c_out, c_in, 3, 3}, c_in * 9, rng)});
    params.push_back({"vgg.conv" + std::to_string(i + 1) + ".bias",
                      Tensor::zeros({c_out}, true)});
  }
  return params;
}

FeatureTensor vgg_block_forward(const FeatureTensor& f,
                                const std::vector<NamedParam>& params) {
  if (params.size() != 2 * kVggTimeStrides.size()) {
    throw std::invalid_argument("vgg_block_forward: wrong parameter count");
  }
  Tensor x = reshape(f.values, {1, f.frames, f.dim});
  for (std::size_t i = 0; i < kVggTimeStrides.size(); ++i) {
    x = relu(conv2d(x, params[2 * i].tensor, &params[2 * i + 1].tensor,
                    kVggTimeStrides[i], 1, Padding::kSame));
  }
  FeatureTensor out;
  out.values = merge_channels_into_features(x);
  out.frames = out.values.extent(0);
  out.dim = out.values.extent(1);
  return out;
}

bool uses_vgg(const FrontendConfig& cfg) {
  return std::holds_alternative<LogMelConfig>(cfg) ||
         std::holds_alternative<ScfConfig>(cfg);
}

std::size_t frontend_output_dim(const FrontendConfig& cfg) {
  if (const auto* c = std::get_if<LogMelConfig>(&cfg)) return c->n_mels;
  if (const auto* c = std::get_if<ScfConfig>(&cfg)) {
    return c->n_filters * c->depth_filters;
  }
  if (const auto* c = std::get_if<Wav2vecConfig>(&cfg)) return c->channels;
  const auto& c = std::get<Generic2dConfig>(cfg);
  return first_layer_features(c) * c.channels_2d;
}

std::size_t pipeline_feature_dim(const FrontendConfig& cfg) {
  if (uses_vgg(cfg)) {
    return frontend_output_dim(cfg) * kVggChannels.back();
  }
  return frontend_output_dim(cfg);
}

std::size_t frontend_stride(const FrontendConfig& cfg) {
  if (const auto* c = std::get_if<LogMelConfig>(&cfg)) return c->hop;
  if (const auto* c = std::get_if<ScfConfig>(&cfg)) {
    return c->stride * c->depth_stride;
  }
  if (const auto* c = std::get_if<Wav2vecConfig>(&cfg)) {
    std::size_t s = 1;
    for (std::size_t v : c->strides) s *= v;
    return s;
  }
  const auto& c = std::get<Generic2dConfig>(cfg);
  return first_layer_stride(c) << c.stride2_layer_count;
}

std::size_t overall_stride(const FrontendConfig& cfg) {
  std::size_t s = frontend_stride(cfg);
  if (uses_vgg(cfg)) {
    for (std::size_t v : kVggTimeStrides) s *= v;
  }
  return s;
}

namespace {

std::size_t vgg_parameter_count() {
  std::size_t total = 0;
  for (std::size_t i = 0; i + 1 < kVggChannels.size(); ++i) {
    total += kVggChannels[i + 1] * kVggChannels[i] * 9 + kVggChannels[i + 1];
  }
  return total;
}

}  // namespace

std::size_t count_frontend_parameters(const FrontendConfig& cfg) {
  validate_config(cfg);
  if (std::holds_alternative<LogMelConfig>(cfg)) return 0;
  if (const auto* c = std::get_if<ScfConfig>(&cfg)) {
    return c->n_filters * c->kernel + c->n_filters +
           c->depth_filters * c->depth_kernel + c->depth_filters +
           2 * c->n_filters * c->depth_filters;
  }
  if (const auto* c = std::get_if<Wav2vecConfig>(&cfg)) {
    std::size_t total = 2 * c->channels;  // group-norm affine
    for (std::size_t i = 0; i < c->kernels.size(); ++i) {
      const std::size_t c_in = i == 0 ? 1 : c->channels;
      total += c->channels * c_in * c->kernels[i];
    }
    return total;
  }
  const auto& c = std::get<Generic2dConfig>(cfg);
  std::size_t total = 0;
  std::size_t first_2d = 0;
  if (c.first_layer == FirstLayer::kFilterbank) {
    if (c.fb_trainable) total += c.fb_filters * c.fb_kernel;
  } else if (c.first_layer == FirstLayer::kStftReIm) {
    total += 2 * (c.channels_2d * 9 + c.channels_2d);
    first_2d = 1;
  }
  for (std::size_t i = first_2d; i < c.n_2d_layers; ++i) {
    const std::size_t c_in = i == 0 ? 1 : c.channels_2d;
    total += c.channels_2d * c_in * 9 + c.channels_2d;
  }
  return total;
}

std::size_t count_pipeline_parameters(const FrontendConfig& cfg,
                                      std::size_t model_dim) {
  std::size_t total = count_frontend_parameters(cfg);
  if (uses_vgg(cfg)) total += vgg_parameter_count();
  total += model_dim * pipeline_feature_dim(cfg) + model_dim;
  return total;
}

}  // namespace fex
