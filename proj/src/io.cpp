// fex/io.cpp

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

#include "fex/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fex {

namespace {

// All on-disk integers and floats are little-endian.
template <typename T>
void write_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  std::reverse(bytes, bytes + sizeof(T));
#endif
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) throw std::invalid_argument("unexpected end of file");
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  std::reverse(bytes, bytes + sizeof(T));
#endif
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("cannot open " + path);
  return is;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot write " + path);
  return os;
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream is = open_input(path);
  char riff[4], wave[4];
  is.read(riff, 4);
  read_le<std::uint32_t>(is);  // chunk size
  is.read(wave, 4);
  if (!is || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(wave, "WAVE", 4) != 0) {
    throw std::invalid_argument(path + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  Waveform w;
  bool have_data = false;
  while (is.peek() != EOF) {
    char id[4];
    is.read(id, 4);
    if (!is) break;
    const auto size = read_le<std::uint32_t>(is);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_le<std::uint16_t>(is);
      channels = read_le<std::uint16_t>(is);
      rate = read_le<std::uint32_t>(is);
      read_le<std::uint32_t>(is);  // byte rate
      read_le<std::uint16_t>(is);  // block align
      bits = read_le<std::uint16_t>(is);
      if (size > 16) is.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) {
        throw std::invalid_argument(path + ": data chunk before fmt chunk");
      }
      if (format != 1 || bits != 16) {
        throw std::invalid_argument(
            path + ": only 16-bit PCM is supported (format " +
            std::to_string(format) + ", " + std::to_string(bits) + " bits)");
      }
      if (channels != 1) {
        throw std::invalid_argument(path + ": only mono is supported, got " +
                                    std::to_string(channels) + " channels");
      }
      if (rate != 16000) {
        throw std::invalid_argument(path +
                                    ": only 16 kHz is supported, got " +
                                    std::to_string(rate) + " Hz");
      }
      const std::size_t count = size / 2;
      w.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        w.samples[i] =
            static_cast<double>(read_le<std::int16_t>(is)) / 32768.0;
      }
      w.sample_rate = static_cast<double>(rate);
      have_data = true;
    } else {
      // Skip unrelated chunks (LIST, fact, ...). Chunks are word-aligned.
      is.seekg(size + (size % 2), std::ios::cur);
    }
  }
  if (!have_data) {
    throw std::invalid_argument(path + ": no data chunk");
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  if (w.sample_rate != 16000.0) {
    throw std::invalid_argument("write_wav: only 16 kHz is supported");
  }
  std::ofstream os = open_output(path);
  const auto data_bytes = static_cast<std::uint32_t>(2 * w.samples.size());
  os.write("RIFF", 4);
  write_le<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_le<std::uint32_t>(os, 16);
  write_le<std::uint16_t>(os, 1);   // PCM
  write_le<std::uint16_t>(os, 1);   // mono
  write_le<std::uint32_t>(os, 16000);
  write_le<std::uint32_t>(os, 16000 * 2);
  write_le<std::uint16_t>(os, 2);
  write_le<std::uint16_t>(os, 16);
  os.write("data", 4);
  write_le<std::uint32_t>(os, data_bytes);
  for (double v : w.samples) {
    const double scaled = std::round(v * 32768.0);
    const auto s = static_cast<std::int16_t>(
        std::clamp(scaled, -32768.0, 32767.0));
    write_le<std::int16_t>(os, s);
  }
}

void write_feature_file(const std::string& path, const Tensor& values) {
  std::ofstream os = open_output(path);
  os.write("FTEN", 4);
  write_le<std::uint16_t>(os, 1);
  write_le<std::uint16_t>(os, static_cast<std::uint16_t>(values.rank()));
  for (std::size_t i = 0; i < values.rank(); ++i) {
    write_le<std::uint64_t>(os, values.extent(i));
  }
  for (double v : values.values()) {
    write_le<float>(os, static_cast<float>(v));
  }
}

Tensor read_feature_file(const std::string& path) {
  std::ifstream is = open_input(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FTEN", 4) != 0) {
    throw std::invalid_argument(path + ": not a feature file");
  }
  const auto version = read_le<std::uint16_t>(is);
  if (version != 1) {
    throw std::invalid_argument(path + ": unsupported feature file version " +
                                std::to_string(version));
  }
  const auto rank = read_le<std::uint16_t>(is);
  Shape shape(rank);
  for (auto& e : shape) e = read_le<std::uint64_t>(is);
  std::vector<double> values(shape_size(shape));
  for (auto& v : values) v = static_cast<double>(read_le<float>(is));
  return Tensor::from_values(std::move(shape), std::move(values));
}

void save_checkpoint(const std::string& path,
                     const std::vector<NamedParam>& params) {
  std::ofstream os = open_output(path);
  os.write("FXCP", 4);
  write_le<std::uint16_t>(os, 1);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_le<std::uint16_t>(os, static_cast<std::uint16_t>(p.tensor.rank()));
    for (std::size_t i = 0; i < p.tensor.rank(); ++i) {
      write_le<std::uint64_t>(os, p.tensor.extent(i));
    }
    for (double v : p.tensor.values()) write_le<double>(os, v);
  }
}

std::vector<NamedParam> load_checkpoint(const std::string& path) {
  std::ifstream is = open_input(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FXCP", 4) != 0) {
    throw std::invalid_argument(path + ": not a checkpoint file");
  }
  const auto version = read_le<std::uint16_t>(is);
  if (version != 1) {
    throw std::invalid_argument(path + ": unsupported checkpoint version " +
                                std::to_string(version));
  }
  const auto count = read_le<std::uint32_t>(is);
  std::vector<NamedParam> params;
  params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_le<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw std::invalid_argument(path + ": truncated checkpoint");
    const auto rank = read_le<std::uint16_t>(is);
    Shape shape(rank);
    for (auto& e : shape) e = read_le<std::uint64_t>(is);
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = read_le<double>(is);
    params.push_back(
        {std::move(name),
         Tensor::from_values(std::move(shape), std::move(values))});
  }
  return params;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto begin = s.find_first_not_of(" \t\r");
    const auto end = s.find_last_not_of(" \t\r");
    return begin == std::string::npos ? std::string()
                                      : s.substr(begin, end - begin + 1);
  };
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    }
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace fex
