// fex/io.hpp

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

#ifndef FEX_IO_HPP_
#define FEX_IO_HPP_

#include <map>
#include <string>
#include <vector>

#include "fex/dsp.hpp"
#include "fex/frontends.hpp"

namespace fex {

/// Reads a RIFF/WAVE file. Only PCM (format 1), 16-bit, mono, 16 kHz is
/// accepted; anything else throws std::invalid_argument rather than being
/// resampled silently. Samples are normalized by 32768.
Waveform read_wav(const std::string& path);

/// Writes PCM16 mono. Samples are clamped to [-1, 1).
void write_wav(const std::string& path, const Waveform& w);

/// Feature file: magic "FTEN", version u16, rank u16, extents as u64
/// little-endian, then float32 little-endian values in row-major order.
void write_feature_file(const std::string& path, const Tensor& values);
Tensor read_feature_file(const std::string& path);

/// Checkpoint: magic "FXCP", version u16, count u32, then per parameter:
/// name (u32 length + bytes), rank u16, extents u64, float64 values, all
/// little-endian.
void save_checkpoint(const std::string& path,
                     const std::vector<NamedParam>& params);
std::vector<NamedParam> load_checkpoint(const std::string& path);

/// key=value per line; '#' starts a comment; blank lines ignored.
/// Later keys override earlier ones.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace fex

#endif  // FEX_IO_HPP_
