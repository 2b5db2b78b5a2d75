// tests/test_frontends.cpp

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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fex/dsp.hpp"
#include "fex/frontends.hpp"
#include "fex/tensor.hpp"

namespace {

using fex::FrontendConfig;
using fex::FrontendModel;
using fex::Generic2dConfig;
using fex::LogMelConfig;
using fex::RandomSource;
using fex::ScfConfig;
using fex::Tensor;
using fex::Waveform;
using fex::Wav2vecConfig;

constexpr double kPi = 3.14159265358979323846;

Waveform tone(double hz, std::size_t samples, double amplitude = 0.3) {
  Waveform w;
  w.samples.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * kPi * hz *
                                        static_cast<double>(i) / 16000.0);
  }
  return w;
}

// Brute-force parameter count: every trainable scalar the model exposes.
std::size_t enumerate_trainable(const FrontendModel& m) {
  std::size_t total = 0;
  for (const auto& p : m.parameters()) {
    if (p.tensor.requires_grad()) total += p.tensor.size();
  }
  return total;
}

}  // namespace

TEST_CASE("stride plan interleaves stride-1 layers after stride-2 layers") {
  CHECK(fex::stride2_plan(6, 6) ==
        std::vector<std::size_t>({2, 2, 2, 2, 2, 2}));
  CHECK(fex::stride2_plan(6, 4) ==
        std::vector<std::size_t>({2, 1, 2, 1, 2, 2}));
  CHECK(fex::stride2_plan(3, 0) == std::vector<std::size_t>({1, 1, 1}));
  // Every stride-1 layer is preceded by at least one stride-2 layer.
  const auto plan = fex::stride2_plan(7, 5);
  CHECK(plan.front() == 2);
  std::size_t product = 1;
  for (std::size_t s : plan) product *= s;
  CHECK(product == 32);
  CHECK_THROWS_AS(fex::stride2_plan(2, 3), std::invalid_argument);
}

TEST_CASE("config validation: stride product must be 640") {
  Generic2dConfig bad;
  bad.fb_stride = 10;
  bad.stride2_layer_count = 5;  // 10 * 2^5 = 320 != 640
  CHECK_THROWS_AS(fex::validate_config(FrontendConfig(bad)),
                  std::invalid_argument);

  Generic2dConfig good;
  good.fb_stride = 20;
  good.stride2_layer_count = 5;  // 20 * 2^5 = 640
  good.n_2d_layers = 5;
  CHECK_NOTHROW(fex::validate_config(FrontendConfig(good)));

  Generic2dConfig stft_bad;
  stft_bad.first_layer = fex::FirstLayer::kStftMagnitude;
  stft_bad.hop = 320;  // 320 * 2^6 != 640
  CHECK_THROWS_AS(fex::validate_config(FrontendConfig(stft_bad)),
                  std::invalid_argument);

  Generic2dConfig layers_bad;
  layers_bad.n_2d_layers = 4;
  layers_bad.stride2_layer_count = 6;
  CHECK_THROWS_AS(fex::validate_config(FrontendConfig(layers_bad)),
                  std::invalid_argument);
}

TEST_CASE("strides and dims for the four standard configurations") {
  const FrontendConfig log_mel = LogMelConfig{};
  const FrontendConfig scf = ScfConfig{};
  const FrontendConfig w2v = Wav2vecConfig{};
  const FrontendConfig g2d = Generic2dConfig{};

  CHECK(fex::frontend_stride(log_mel) == 160);
  CHECK(fex::frontend_stride(scf) == 160);
  CHECK(fex::frontend_stride(w2v) == 640);
  CHECK(fex::frontend_stride(g2d) == 640);

  for (const auto* cfg : {&log_mel, &scf, &w2v, &g2d}) {
    CHECK(fex::overall_stride(*cfg) == 640);
  }

  CHECK(fex::uses_vgg(log_mel));
  CHECK(fex::uses_vgg(scf));
  CHECK_FALSE(fex::uses_vgg(w2v));
  CHECK_FALSE(fex::uses_vgg(g2d));

  CHECK(fex::frontend_output_dim(log_mel) == 80);
  CHECK(fex::frontend_output_dim(scf) == 750);
  CHECK(fex::frontend_output_dim(w2v) == 512);
  CHECK(fex::frontend_output_dim(g2d) == 128 * 32);

  // VGG subsamples time only; its 32 channels multiply the feature axis.
  CHECK(fex::pipeline_feature_dim(log_mel) == 80 * 32);
  CHECK(fex::pipeline_feature_dim(scf) == 750 * 32);
}

TEST_CASE("parameter counts match the documented totals") {
  CHECK(fex::count_frontend_parameters(LogMelConfig{}) == 0);
  CHECK(fex::count_pipeline_parameters(LogMelConfig{}) == 1385440);
  CHECK(fex::count_pipeline_parameters(ScfConfig{}) == 12402975);
  CHECK(fex::count_frontend_parameters(Wav2vecConfig{}) == 4724736);
  CHECK(fex::count_pipeline_parameters(Wav2vecConfig{}) == 4987392);
  CHECK(fex::count_pipeline_parameters(Generic2dConfig{}) == 2176992);

  Generic2dConfig small;
  small.fb_filters = 8;
  small.channels_2d = 48;
  CHECK(fex::count_pipeline_parameters(small) == 303568);
}

TEST_CASE("count_pipeline_parameters equals enumeration over a live model") {
  RandomSource rng(1);
  for (const FrontendConfig& cfg :
       {FrontendConfig(LogMelConfig{}), FrontendConfig(ScfConfig{}),
        FrontendConfig(Generic2dConfig{})}) {
    FrontendModel fe(cfg, rng);
    std::size_t got = enumerate_trainable(fe);
    if (fex::uses_vgg(cfg)) {
      for (const auto& p : fex::init_vgg_params(rng)) got += p.tensor.size();
    }
    // Linear projection to the model dimension, with bias.
    got += fex::kModelDim * fex::pipeline_feature_dim(cfg) + fex::kModelDim;
    CHECK(got == fex::count_pipeline_parameters(cfg));
  }

  // wav2vec at reduced width, to keep the enumeration fast.
  Wav2vecConfig small;
  small.channels = 16;
  FrontendModel fe(FrontendConfig(small), rng);
  std::size_t got = enumerate_trainable(fe);
  got += fex::kModelDim * fex::pipeline_feature_dim(FrontendConfig(small)) +
         fex::kModelDim;
  CHECK(got == fex::count_pipeline_parameters(FrontendConfig(small)));
}

TEST_CASE("log mel: 1 s gives 98 x 80, VGG brings it to 25 x 2560") {
  RandomSource rng(2);
  FrontendModel fe(FrontendConfig(LogMelConfig{}), rng);
  const Waveform w = tone(1000.0, 16000);
  const auto feat = fe.forward(w);
  CHECK(feat.frames == 98);
  CHECK(feat.dim == 80);
  REQUIRE(feat.values.shape() == fex::Shape{98, 80});

  const auto vgg = fex::init_vgg_params(rng);
  const auto sub = fex::vgg_block_forward(feat, vgg);
  CHECK(sub.frames == 25);
  CHECK(sub.dim == 2560);

  // All-zero input maps every cell to log(epsilon).
  Waveform silence;
  silence.samples.assign(16000, 0.0);
  const auto quiet = fe.forward(silence);
  const double expect = std::log(LogMelConfig{}.log_epsilon);
  for (double v : quiet.values.values()) {
    CHECK(v == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("log mel responds in the right band") {
  RandomSource rng(3);
  FrontendModel fe(FrontendConfig(LogMelConfig{}), rng);
  // Energy at 1 kHz must put the hottest Mel band near 1 kHz, not at the top.
  const auto feat = fe.forward(tone(1000.0, 16000, 0.5));
  const auto& v = feat.values.values();
  std::size_t best = 0;
  for (std::size_t d = 0; d < 80; ++d) {
    if (v[50 * 80 + d] > v[50 * 80 + best]) best = d;
  }
  // mel(1000) / mel(8000) * 80 ~ 28.
  CHECK(best >= 20);
  CHECK(best <= 36);
}

TEST_CASE("scf: frame chain 1575 -> 96 frames of dim 750 for 1 s input") {
  RandomSource rng(4);
  FrontendModel fe(FrontendConfig(ScfConfig{}), rng);
  const auto feat = fe.forward(tone(440.0, 16000));
  CHECK(feat.frames == 96);
  CHECK(feat.dim == 750);

  const auto vgg = fex::init_vgg_params(rng);
  const auto sub = fex::vgg_block_forward(feat, vgg);
  CHECK(sub.frames == 24);

  // Layer-norm leaves each frame with zero mean and unit variance before the
  // affine, and the affine starts at identity: check the first frame.
  const auto& v = feat.values.values();
  double mean = 0.0;
  for (std::size_t d = 0; d < 750; ++d) mean += v[d];
  mean /= 750.0;
  double var = 0.0;
  for (std::size_t d = 0; d < 750; ++d) var += (v[d] - mean) * (v[d] - mean);
  var /= 750.0;
  CHECK(std::abs(mean) < 1e-9);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("wav2vec: 1 s maps through 3199 -> ... -> 24 frames of dim 512") {
  RandomSource rng(5);
  Wav2vecConfig small;
  small.channels = 24;  // same geometry, cheaper arithmetic
  FrontendModel fe(FrontendConfig(small), rng);
  const auto feat = fe.forward(tone(440.0, 16000));
  CHECK(feat.frames == 24);
  CHECK(feat.dim == 24);

  // Minimal input: 720 samples is exactly one receptive field.
  const auto one = fe.forward(tone(440.0, 720));
  CHECK(one.frames == 1);
  CHECK_THROWS_AS(fe.forward(tone(440.0, 719)), std::invalid_argument);
}

TEST_CASE("generic2d filterbank: 1 s gives 25 frames, dim filters x channels") {
  RandomSource rng(6);
  Generic2dConfig cfg;
  cfg.fb_filters = 16;
  cfg.channels_2d = 4;
  FrontendModel fe(FrontendConfig(cfg), rng);
  const auto feat = fe.forward(tone(440.0, 16000));
  CHECK(feat.frames == 25);
  CHECK(feat.dim == 16 * 4);
}

TEST_CASE("generic2d stft variants agree on geometry") {
  RandomSource rng(7);
  Generic2dConfig mag;
  mag.first_layer = fex::FirstLayer::kStftMagnitude;
  mag.channels_2d = 4;
  mag.stride2_layer_count = 2;  // hop 160 x 2^2 = 640
  FrontendModel fe_mag(FrontendConfig(mag), rng);
  // 0.5 s: stft gives 48 frames -> 24 -> 12, then four stride-1 layers.
  const auto mag_out = fe_mag.forward(tone(1000.0, 8000));
  CHECK(mag_out.frames == 12);
  CHECK(mag_out.dim == 257 * 4);

  Generic2dConfig re_im = mag;
  re_im.first_layer = fex::FirstLayer::kStftReIm;
  FrontendModel fe_ri(FrontendConfig(re_im), rng);
  const auto ri_out = fe_ri.forward(tone(1000.0, 8000));
  CHECK(ri_out.frames == mag_out.frames);
  CHECK(ri_out.dim == mag_out.dim);
}

TEST_CASE("generic2d stft magnitude features ignore waveform sign") {
  RandomSource rng(8);
  Generic2dConfig cfg;
  cfg.first_layer = fex::FirstLayer::kStftMagnitude;
  cfg.channels_2d = 4;
  cfg.stride2_layer_count = 2;
  FrontendModel fe(FrontendConfig(cfg), rng);
  Waveform w = tone(700.0, 8000);
  Waveform neg = w;
  for (double& v : neg.samples) v = -v;
  const auto a = fe.forward(w);
  const auto b = fe.forward(neg);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(a.values.values()[i] ==
          doctest::Approx(b.values.values()[i]).epsilon(1e-9));
  }
}

TEST_CASE("generic2d filterbank features are invariant to filter sign flips") {
  RandomSource rng(9);
  Generic2dConfig cfg;
  cfg.fb_filters = 6;
  cfg.fb_kernel = 32;
  cfg.n_2d_layers = 6;
  cfg.channels_2d = 2;
  FrontendModel fe(FrontendConfig(cfg), rng);

  const Waveform w = tone(300.0, 16000);

  // The magnitude activation discards filter polarity.
  const auto before = fe.forward(w);
  Tensor& fb = fe.param("g2d.first.weight");
  const std::size_t k = fb.extent(2);
  for (std::size_t i = 0; i < k; ++i) {
    fb.values_mut()[0 * k + i] = -fb.values_mut()[0 * k + i];
  }
  const auto after_negate = fe.forward(w);
  for (std::size_t i = 0; i < before.values.size(); ++i) {
    CHECK(before.values.values()[i] ==
          doctest::Approx(after_negate.values.values()[i]).epsilon(1e-9));
  }
}

TEST_CASE("gammatone-initialized filterbank can be frozen") {
  RandomSource rng(10);
  Generic2dConfig cfg;
  cfg.fb_filters = 8;
  cfg.fb_kernel = 128;
  cfg.fb_init = fex::FilterbankInit::kGammatone;
  cfg.fb_trainable = false;
  cfg.channels_2d = 2;
  FrontendModel fe(FrontendConfig(cfg), rng);
  CHECK_FALSE(fe.param("g2d.first.weight").requires_grad());
  // Frozen filters are excluded from the front-end count.
  const std::size_t with = fex::count_frontend_parameters(FrontendConfig(cfg));
  Generic2dConfig trainable = cfg;
  trainable.fb_trainable = true;
  CHECK(fex::count_frontend_parameters(FrontendConfig(trainable)) ==
        with + 8 * 128);
}

TEST_CASE("gradients reach every trainable front-end parameter") {
  RandomSource rng(11);

  ScfConfig scf;
  scf.n_filters = 4;
  scf.kernel = 32;
  scf.depth_filters = 2;
  scf.depth_kernel = 8;
  scf.depth_stride = 4;
  Generic2dConfig g2d;
  g2d.fb_filters = 4;
  g2d.fb_kernel = 16;
  g2d.channels_2d = 2;
  Wav2vecConfig w2v;
  w2v.channels = 4;

  for (const FrontendConfig& cfg :
       {FrontendConfig(scf), FrontendConfig(g2d), FrontendConfig(w2v)}) {
    FrontendModel fe(cfg, rng);
    for (auto& p : fe.parameters()) p.tensor.zero_grad();
    const auto feat = fe.forward(tone(500.0, 1600));
    fex::backward(fex::sum(feat.values));
    for (auto& p : fe.parameters()) {
      if (!p.tensor.requires_grad()) continue;
      REQUIRE(p.tensor.has_grad());
      double norm = 0.0;
      for (double g : p.tensor.grad()) norm += g * g;
      CAPTURE(p.name);
      CHECK(norm > 0.0);
    }
  }
}

TEST_CASE("finite differences through each front-end composite") {
  RandomSource rng(12);
  const Waveform w = tone(500.0, 1600, 0.4);

  // scf at toy size, differentiating the first-layer weight.
  {
    ScfConfig cfg;
    cfg.n_filters = 3;
    cfg.kernel = 16;
    cfg.depth_filters = 2;
    cfg.depth_kernel = 8;
    cfg.depth_stride = 4;
    FrontendModel fe(FrontendConfig(cfg), rng);
    Tensor& p = fe.param("scf.l1.weight");
    auto f = [&fe, &w](const Tensor&) {
      return fex::sum(fe.forward(w).values);
    };
    RandomSource pick(1);
    const auto report = fex::grad_check(f, p, 1e-6, 1e-4, 12, &pick);
    CAPTURE(report.max_rel_error);
    CHECK(report.passed);
  }

  // generic2d at toy size, differentiating a 2D-stack weight.
  {
    Generic2dConfig cfg;
    cfg.fb_filters = 4;
    cfg.fb_kernel = 16;
    cfg.channels_2d = 2;
    FrontendModel fe(FrontendConfig(cfg), rng);
    Tensor& p = fe.param("g2d.conv3.weight");
    auto f = [&fe, &w](const Tensor&) {
      return fex::sum(fe.forward(w).values);
    };
    RandomSource pick(2);
    const auto report = fex::grad_check(f, p, 1e-6, 1e-4, 12, &pick);
    CAPTURE(report.max_rel_error);
    CHECK(report.passed);
  }

  // wav2vec at toy width, differentiating the first conv weight.
  {
    Wav2vecConfig cfg;
    cfg.channels = 3;
    FrontendModel fe(FrontendConfig(cfg), rng);
    Tensor& p = fe.param("w2v.conv1.weight");
    auto f = [&fe, &w](const Tensor&) {
      return fex::sum(fe.forward(w).values);
    };
    RandomSource pick(3);
    const auto report = fex::grad_check(f, p, 1e-6, 1e-4, 12, &pick);
    CAPTURE(report.max_rel_error);
    CHECK(report.passed);
  }

  // log mel has no parameters of its own; the composite check goes through
  // the VGG block that subsamples its output.
  {
    LogMelConfig cfg;
    cfg.n_mels = 8;
    FrontendModel fe(FrontendConfig(cfg), rng);
    auto vgg = fex::init_vgg_params(rng);
    const Waveform w_short = tone(1000.0, 4800);
    Tensor& p = vgg[0].tensor;  // first conv weight
    auto f = [&fe, &vgg, &w_short](const Tensor&) {
      return fex::sum(fex::vgg_block_forward(fe.forward(w_short), vgg).values);
    };
    RandomSource pick(4);
    const auto report = fex::grad_check(f, p, 1e-6, 1e-4, 10, &pick);
    CAPTURE(report.max_rel_error);
    CHECK(report.passed);
  }
}

TEST_CASE("identical seeds give identical parameters and features") {
  const FrontendConfig cfg = Generic2dConfig{};
  RandomSource r1(99), r2(99);
  FrontendModel a(cfg, r1), b(cfg, r2);
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    CHECK(pa[i].tensor.values() == pb[i].tensor.values());
  }
  const Waveform w = tone(640.0, 16000);
  CHECK(a.forward(w).values.values() == b.forward(w).values.values());
}

TEST_CASE("unknown parameter name throws") {
  RandomSource rng(13);
  FrontendModel fe(FrontendConfig(ScfConfig{}), rng);
  CHECK_THROWS_AS(fe.param("scf.l3.weight"), std::out_of_range);
}
