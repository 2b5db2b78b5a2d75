// fex/dsp.cpp

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

#include "fex/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fex {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft: size must be a power of two, got " +
                                std::to_string(n));
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> w_len(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= w_len;
      }
    }
  }
  if (inverse) {
    const double scl = 1.0 / static_cast<double>(n);
    for (auto& c : data) c *= scl;
  }
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& signal,
                                           std::size_t n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft_real: n must be a power of two, got " +
                                std::to_string(n));
  }
  if (signal.size() > n) {
    throw std::invalid_argument(
        "fft_real: n = " + std::to_string(n) + " shorter than signal length " +
        std::to_string(signal.size()));
  }
  std::vector<std::complex<double>> data(n, {0.0, 0.0});
  for (std::size_t i = 0; i < signal.size(); ++i) data[i] = {signal[i], 0.0};
  fft(data, false);
  data.resize(n / 2 + 1);
  return data;
}

std::vector<double> hann_window(std::size_t length) {
  if (length == 0) throw std::invalid_argument("hann_window: empty window");
  std::vector<double> w(length);
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                 static_cast<double>(length)));
  }
  return w;
}

ComplexSpectrogram stft(const Waveform& w, std::size_t window_size,
                        std::size_t hop) {
  if (window_size == 0 || hop == 0) {
    throw std::invalid_argument("stft: window_size and hop must be positive");
  }
  if (w.samples.size() < window_size) {
    throw std::invalid_argument(
        "stft: signal length " + std::to_string(w.samples.size()) +
        " shorter than one window of " + std::to_string(window_size));
  }
  const std::size_t n_fft = next_power_of_two(window_size);
  const std::size_t frames = (w.samples.size() - window_size) / hop + 1;
  const std::size_t bins = n_fft / 2 + 1;
  const std::vector<double> window = hann_window(window_size);

  ComplexSpectrogram out;
  out.frames = frames;
  out.bins = bins;
  out.window_size = window_size;
  out.hop = hop;
  out.n_fft = n_fft;
  out.sample_rate = w.sample_rate;
  out.values.resize(frames * bins);

  std::vector<std::complex<double>> buf(n_fft);
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    const std::size_t off = f * hop;
    for (std::size_t i = 0; i < window_size; ++i) {
      buf[i] = {w.samples[off + i] * window[i], 0.0};
    }
    fft(buf, false);
    for (std::size_t b = 0; b < bins; ++b) out.values[f * bins + b] = buf[b];
  }
  return out;
}

Waveform istft(const ComplexSpectrogram& s, std::size_t window_size,
               std::size_t hop, std::size_t output_length) {
  if (window_size != s.window_size || hop != s.hop) {
    throw std::invalid_argument(
        "istft: window/hop (" + std::to_string(window_size) + "/" +
        std::to_string(hop) + ") do not match the spectrogram's (" +
        std::to_string(s.window_size) + "/" + std::to_string(s.hop) + ")");
  }
  if (s.bins != s.n_fft / 2 + 1) {
    throw std::invalid_argument("istft: inconsistent bin count");
  }
  const std::vector<double> window = hann_window(window_size);

  Waveform out;
  out.sample_rate = s.sample_rate;
  out.samples.assign(output_length, 0.0);
  std::vector<double> envelope(output_length, 0.0);

  std::vector<std::complex<double>> buf(s.n_fft);
  for (std::size_t f = 0; f < s.frames; ++f) {
    // Rebuild the full spectrum from the one-sided half (real signal).
    for (std::size_t b = 0; b < s.bins; ++b) buf[b] = s.at(f, b);
    for (std::size_t b = s.bins; b < s.n_fft; ++b) {
      buf[b] = std::conj(s.at(f, s.n_fft - b));
    }
    fft(buf, true);
    const std::size_t off = f * hop;
    for (std::size_t i = 0; i < window_size; ++i) {
      const std::size_t t = off + i;
      if (t >= output_length) break;
      out.samples[t] += window[i] * buf[i].real();
      envelope[t] += window[i] * window[i];
    }
  }

  // Interior samples must be covered by the window envelope; the far ends of
  // a tapered window may legitimately stay at zero.
  const double tiny = 1e-12;
  if (output_length > 2 * window_size) {
    for (std::size_t t = window_size; t + window_size < output_length; ++t) {
      if (envelope[t] <= tiny) {
        throw std::invalid_argument(
            "istft: window envelope vanishes at interior sample " +
            std::to_string(t) + "; window/hop combination is not invertible");
      }
    }
  }
  for (std::size_t t = 0; t < output_length; ++t) {
    out.samples[t] = envelope[t] > tiny ? out.samples[t] / envelope[t] : 0.0;
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Tensor mel_filterbank_matrix(std::size_t n_filters, std::size_t n_fft,
                             double sample_rate, double f_min, double f_max) {
  if (n_filters == 0) {
    throw std::invalid_argument("mel_filterbank_matrix: need >= 1 filter");
  }
  if (!(0.0 <= f_min && f_min < f_max && f_max <= sample_rate / 2.0)) {
    throw std::invalid_argument(
        "mel_filterbank_matrix: need 0 <= f_min < f_max <= Nyquist");
  }
  const std::size_t bins = n_fft / 2 + 1;
  // Filter i is a triangle spanning edges i..i+2 of n_filters+2 points
  // equally spaced on the Mel scale.
  std::vector<double> edges(n_filters + 2);
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_filters + 1);
    edges[i] = mel_to_hz(mel);
  }
  std::vector<double> mat(bins * n_filters, 0.0);
  const double hz_per_bin = sample_rate / static_cast<double>(n_fft);
  for (std::size_t m = 0; m < n_filters; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    bool any = false;
    for (std::size_t b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * hz_per_bin;
      double v = 0.0;
      if (f > lo && f < center) {
        v = (f - lo) / (center - lo);
      } else if (f >= center && f < hi) {
        v = (hi - f) / (hi - center);
      }
      if (v > 0.0) {
        mat[b * n_filters + m] = v;
        any = true;
      }
    }
    if (!any) {
      throw std::invalid_argument(
          "mel_filterbank_matrix: filter " + std::to_string(m) +
          " covers no FFT bin; reduce n_filters or enlarge n_fft");
    }
  }
  return Tensor::from_values({bins, n_filters}, std::move(mat));
}

double erb_bandwidth(double hz) { return 24.7 * (4.37 * hz / 1000.0 + 1.0); }

namespace {

// ERB-rate scale used to space gammatone centers.
double hz_to_erb_rate(double hz) {
  return 21.4 * std::log10(1.0 + 0.00437 * hz);
}

double erb_rate_to_hz(double rate) {
  return (std::pow(10.0, rate / 21.4) - 1.0) / 0.00437;
}

}  // namespace

FilterBank gammatone_filterbank(std::size_t n_filters,
                                std::size_t kernel_length, double sample_rate,
                                double f_min, double f_max) {
  if (n_filters < 1) {
    throw std::invalid_argument("gammatone_filterbank: need >= 1 filter");
  }
  if (kernel_length < 2) {
    throw std::invalid_argument("gammatone_filterbank: kernel_length >= 2");
  }
  if (!(0.0 < f_min && f_min < f_max && f_max <= sample_rate / 2.0)) {
    throw std::invalid_argument(
        "gammatone_filterbank: need 0 < f_min < f_max <= Nyquist");
  }
  const double lo = hz_to_erb_rate(f_min);
  const double hi = hz_to_erb_rate(f_max);
  std::vector<double> centers(n_filters);
  for (std::size_t i = 0; i < n_filters; ++i) {
    const double rate =
        n_filters == 1
            ? 0.5 * (lo + hi)
            : lo + (hi - lo) * static_cast<double>(i) /
                       static_cast<double>(n_filters - 1);
    centers[i] = erb_rate_to_hz(rate);
  }

  std::vector<double> data(n_filters * kernel_length, 0.0);
  const std::size_t n_pad = next_power_of_two(4 * kernel_length);
  for (std::size_t i = 0; i < n_filters; ++i) {
    const double fc = centers[i];
    const double b = 1.019 * erb_bandwidth(fc);
    std::vector<double> g(kernel_length);
    for (std::size_t k = 0; k < kernel_length; ++k) {
      const double t = static_cast<double>(k) / sample_rate;
      g[k] = t * t * t * std::exp(-2.0 * M_PI * b * t) *
             std::cos(2.0 * M_PI * fc * t);
    }
    // Scale so the maximum magnitude response is exactly 1.
    const auto spectrum = fft_real(g, n_pad);
    double peak = 0.0;
    for (const auto& c : spectrum) peak = std::max(peak, std::abs(c));
    if (peak <= 0.0) {
      throw std::invalid_argument("gammatone_filterbank: degenerate filter " +
                                  std::to_string(i));
    }
    for (std::size_t k = 0; k < kernel_length; ++k) {
      data[i * kernel_length + k] = g[k] / peak;
    }
  }

  FilterBank bank;
  bank.filters = Tensor::from_values({n_filters, kernel_length}, std::move(data));
  bank.center_frequencies = std::move(centers);
  bank.origin = FilterOrigin::kGammatone;
  bank.sample_rate = sample_rate;
  return bank;
}

Waveform resample_speed(const Waveform& w, double factor) {
  if (!(factor > 0.0)) {
    throw std::invalid_argument("resample_speed: factor must be positive");
  }
  if (factor == 1.0) return w;
  const std::size_t n = w.samples.size();
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) / factor));
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * factor;
    const auto i0 = static_cast<std::size_t>(pos);
    if (i0 + 1 >= n) {
      out.samples[i] = w.samples[n - 1];
    } else {
      const double frac = pos - static_cast<double>(i0);
      out.samples[i] =
          (1.0 - frac) * w.samples[i0] + frac * w.samples[i0 + 1];
    }
  }
  return out;
}

FrequencyResponse frequency_response(const std::vector<double>& filter,
                                     double sample_rate,
                                     std::size_t n_fft_pad) {
  if (filter.empty()) {
    throw std::invalid_argument("frequency_response: empty filter");
  }
  if (n_fft_pad < 4 * filter.size()) {
    throw std::invalid_argument(
        "frequency_response: n_fft_pad must be >= 4x the filter length");
  }
  const std::size_t n = next_power_of_two(n_fft_pad);
  bool all_zero = true;
  for (double v : filter) {
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) {
    throw std::invalid_argument("frequency_response: all-zero filter");
  }
  const auto spectrum = fft_real(filter, n);
  FrequencyResponse resp;
  resp.frequencies_hz.resize(spectrum.size());
  resp.magnitude_db.resize(spectrum.size());
  double peak = 0.0;
  for (const auto& c : spectrum) peak = std::max(peak, std::abs(c));
  const double floor_db = -300.0;
  for (std::size_t b = 0; b < spectrum.size(); ++b) {
    resp.frequencies_hz[b] =
        static_cast<double>(b) * sample_rate / static_cast<double>(n);
    const double rel = std::abs(spectrum[b]) / peak;
    resp.magnitude_db[b] =
        rel > 0.0 ? std::max(floor_db, 20.0 * std::log10(rel)) : floor_db;
  }
  return resp;
}

}  // namespace fex
