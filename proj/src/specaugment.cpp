// fex/specaugment.cpp

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

#include "fex/specaugment.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fex {

namespace {

void sample_axis(std::vector<MaskRect>& rects, MaskAxis axis,
                 std::size_t extent, std::size_t max_masks,
                 std::size_t max_width, RandomSource& rng) {
  const std::size_t count = rng.uniform_int(max_masks + 1);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t width =
        std::min(rng.uniform_int(max_width + 1), extent);
    if (width == 0) continue;
    const std::size_t start = rng.uniform_int(extent - width + 1);
    rects.push_back({axis, start, width});
  }
}

}  // namespace

std::vector<MaskRect> sample_masks(const MaskSpec& spec, std::size_t frames,
                                   std::size_t dims, RandomSource& rng) {
  if (frames == 0 || dims == 0) {
    throw std::invalid_argument("sample_masks: frames and dims must be >= 1");
  }
  std::vector<MaskRect> rects;
  sample_axis(rects, MaskAxis::kTime, frames, spec.max_time_masks,
              spec.max_time_width, rng);
  sample_axis(rects, MaskAxis::kFeature, dims, spec.max_feature_masks,
              spec.max_feature_width, rng);
  return rects;
}

namespace {

void check_rects(const std::vector<MaskRect>& rects, std::size_t frames,
                 std::size_t dims) {
  for (const auto& r : rects) {
    const std::size_t extent = r.axis == MaskAxis::kTime ? frames : dims;
    if (r.start + r.width > extent) {
      throw std::invalid_argument(
          "mask rectangle [" + std::to_string(r.start) + ", " +
          std::to_string(r.start + r.width) + ") exceeds axis extent " +
          std::to_string(extent));
    }
  }
}

}  // namespace

FeatureTensor apply_feature_masks(const FeatureTensor& f,
                                  const std::vector<MaskRect>& rects) {
  check_rects(rects, f.frames, f.dim);
  if (rects.empty()) return f;
  // Multiplying by a 0/1 mask keeps unmasked cells bit-identical (x * 1.0)
  // and keeps the graph differentiable through the masked tensor.
  std::vector<double> mask(f.frames * f.dim, 1.0);
  for (const auto& r : rects) {
    if (r.axis == MaskAxis::kTime) {
      for (std::size_t t = r.start; t < r.start + r.width; ++t) {
        std::fill(mask.begin() + t * f.dim, mask.begin() + (t + 1) * f.dim,
                  0.0);
      }
    } else {
      for (std::size_t t = 0; t < f.frames; ++t) {
        for (std::size_t d = r.start; d < r.start + r.width; ++d) {
          mask[t * f.dim + d] = 0.0;
        }
      }
    }
  }
  FeatureTensor out;
  out.frames = f.frames;
  out.dim = f.dim;
  out.values =
      mul(f.values, Tensor::from_values({f.frames, f.dim}, std::move(mask)));
  return out;
}

Waveform apply_stft_rects(const Waveform& w, const std::vector<MaskRect>& rects,
                          std::size_t window_size, std::size_t hop) {
  ComplexSpectrogram spec = stft(w, window_size, hop);
  check_rects(rects, spec.frames, spec.bins);
  for (const auto& r : rects) {
    if (r.axis == MaskAxis::kTime) {
      for (std::size_t t = r.start; t < r.start + r.width; ++t) {
        for (std::size_t b = 0; b < spec.bins; ++b) {
          spec.at(t, b) = {0.0, 0.0};
        }
      }
    } else {
      for (std::size_t t = 0; t < spec.frames; ++t) {
        for (std::size_t b = r.start; b < r.start + r.width; ++b) {
          spec.at(t, b) = {0.0, 0.0};
        }
      }
    }
  }
  return istft(spec, window_size, hop, w.samples.size());
}

Waveform apply_stft_masks(const Waveform& w, const MaskSpec& spec,
                          RandomSource& rng, std::size_t window_size,
                          std::size_t hop) {
  const ComplexSpectrogram probe = stft(w, window_size, hop);
  const auto rects = sample_masks(spec, probe.frames, probe.bins, rng);
  return apply_stft_rects(w, rects, window_size, hop);
}

}  // namespace fex
