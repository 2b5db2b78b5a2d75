// fex/specaugment.hpp

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

#ifndef FEX_SPECAUGMENT_HPP_
#define FEX_SPECAUGMENT_HPP_

#include <cstddef>
#include <vector>

#include "fex/dsp.hpp"
#include "fex/frontends.hpp"
#include "fex/tensor.hpp"

namespace fex {

/// Masking configuration. Counts and widths are inclusive upper bounds for
/// the per-utterance uniform draws. Masked cells are set to 0.
struct MaskSpec {
  std::size_t max_time_masks = 2;
  std::size_t max_time_width = 20;
  std::size_t max_feature_masks = 2;
  std::size_t max_feature_width = 16;
};

enum class MaskAxis { kTime, kFeature };

/// A band along one axis covering the full extent of the other:
/// [start, start + width) frames, or [start, start + width) feature bins.
struct MaskRect {
  MaskAxis axis;
  std::size_t start;
  std::size_t width;
};

/// Draws mask counts uniform in [0, max_count], widths uniform in
/// [0, max_width] clamped to the extent, starts uniform over positions where
/// the mask fits fully. Deterministic given the RandomSource.
std::vector<MaskRect> sample_masks(const MaskSpec& spec, std::size_t frames,
                                   std::size_t dims, RandomSource& rng);

/// Zeroes the masked cells of a [frames x dim] feature tensor. Unmasked
/// cells pass through bit-identically, and gradients still flow to them.
FeatureTensor apply_feature_masks(const FeatureTensor& f,
                                  const std::vector<MaskRect>& rects);

/// Deterministic core of STFT-domain masking: stft -> zero the rectangles
/// -> istft back to the original length. Time rects address STFT frames,
/// feature rects address frequency bins.
Waveform apply_stft_rects(const Waveform& w, const std::vector<MaskRect>& rects,
                          std::size_t window_size, std::size_t hop);

/// STFT-domain SpecAugment: samples rectangles from the spec and applies
/// them via apply_stft_rects. Independent of any front-end configuration;
/// the masked waveform can feed any extractor.
Waveform apply_stft_masks(const Waveform& w, const MaskSpec& spec,
                          RandomSource& rng, std::size_t window_size = 400,
                          std::size_t hop = 160);

}  // namespace fex

#endif  // FEX_SPECAUGMENT_HPP_
