// fex/dsp.hpp

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

#ifndef FEX_DSP_HPP_
#define FEX_DSP_HPP_

#include <complex>
#include <cstddef>
#include <vector>

#include "fex/tensor.hpp"

namespace fex {

/// Mono audio. Samples are 64-bit floats nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;
};

/// One-sided STFT output. Frames are rows; bins run 0..n_fft/2. The analysis
/// geometry (window, hop, n_fft) is recorded so the inverse never has to
/// guess, and so downstream code never assumes a particular bin count.
struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;  // n_fft / 2 + 1
  std::vector<std::complex<double>> values;  // frames x bins, row-major
  std::size_t window_size = 0;
  std::size_t hop = 0;
  std::size_t n_fft = 0;
  double sample_rate = 16000.0;

  std::complex<double>& at(std::size_t frame, std::size_t bin) {
    return values[frame * bins + bin];
  }
  const std::complex<double>& at(std::size_t frame, std::size_t bin) const {
    return values[frame * bins + bin];
  }
};

enum class FilterOrigin { kGammatone, kRandom, kMelMatrix };

/// Bank of FIR filters stored row-wise. center_frequencies is populated for
/// designed banks (gammatone) and left empty for learned or random ones.
struct FilterBank {
  Tensor filters;  // [n_filters x kernel_length]
  std::vector<double> center_frequencies;  // Hz, optional
  FilterOrigin origin = FilterOrigin::kRandom;
  double sample_rate = 16000.0;

  std::size_t num_filters() const { return filters.extent(0); }
  std::size_t kernel_length() const { return filters.extent(1); }
};

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 transform. Size must be a power of two.
/// inverse=true applies the 1/n-scaled inverse transform.
void fft(std::vector<std::complex<double>>& data, bool inverse);

/// One-sided DFT (bins 0..n/2) of the signal zero-padded to n samples.
/// n must be a power of two and at least the signal length.
std::vector<std::complex<double>> fft_real(const std::vector<double>& signal,
                                           std::size_t n);

/// Periodic Hann window of the given length: 0.5*(1 - cos(2*pi*n/N)).
std::vector<double> hann_window(std::size_t length);

/// Smallest power of two >= n.
std::size_t next_power_of_two(std::size_t n);

/// Frames fully inside the signal (no boundary padding), periodic Hann
/// window, each frame zero-padded to n_fft = next power of two >= window.
ComplexSpectrogram stft(const Waveform& w, std::size_t window_size,
                        std::size_t hop);

/// Weighted overlap-add inverse with synthesis window equal to the analysis
/// window, normalized by the summed squared window envelope. window_size and
/// hop must match the values recorded in the spectrogram. Samples the window
/// envelope never covers are written as zero.
Waveform istft(const ComplexSpectrogram& s, std::size_t window_size,
               std::size_t hop, std::size_t output_length);

/// mel(f) = 2595 * log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular Mel filters, centers equally spaced on the Mel scale.
/// Returned matrix is [bins x n_filters] with bins = n_fft/2 + 1, ready to
/// right-multiply a [frames x bins] power spectrogram.
Tensor mel_filterbank_matrix(std::size_t n_filters, std::size_t n_fft,
                             double sample_rate, double f_min, double f_max);

/// Equivalent rectangular bandwidth: 24.7 * (4.37*f/1000 + 1) Hz.
double erb_bandwidth(double hz);

/// 4th-order gammatone impulse responses
/// g(t) = t^3 * exp(-2*pi*1.019*ERB(fc)*t) * cos(2*pi*fc*t), centers equally
/// spaced on the ERB-rate scale in [f_min, f_max], each filter scaled so its
/// maximum magnitude response is 1.
FilterBank gammatone_filterbank(std::size_t n_filters,
                                std::size_t kernel_length, double sample_rate,
                                double f_min, double f_max);

/// Plays the signal `factor` times faster via linear interpolation; output
/// length is round(N/factor). Both pitch and tempo scale together.
Waveform resample_speed(const Waveform& w, double factor);

/// Magnitude response on a zero-padded FFT grid, in dB relative to the
/// filter's own maximum (peak = 0 dB). Grid covers 0..Nyquist inclusive.
struct FrequencyResponse {
  std::vector<double> frequencies_hz;
  std::vector<double> magnitude_db;
};

FrequencyResponse frequency_response(const std::vector<double>& filter,
                                     double sample_rate,
                                     std::size_t n_fft_pad);

}  // namespace fex

#endif  // FEX_DSP_HPP_
