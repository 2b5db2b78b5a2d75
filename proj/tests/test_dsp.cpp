// tests/test_dsp.cpp

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
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fex/dsp.hpp"
#include "fex/tensor.hpp"

namespace {

using fex::RandomSource;
using fex::Waveform;

constexpr double kPi = 3.14159265358979323846;

// O(n^2) reference transform, the oracle for the fast path.
std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = sign * 2.0 * kPi * static_cast<double>(k * t) /
                           static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

Waveform tone(double hz, double seconds, double amplitude = 0.5,
              double sample_rate = 16000.0) {
  Waveform w;
  w.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] =
        amplitude * std::sin(2.0 * kPi * hz * static_cast<double>(i) /
                             sample_rate);
  }
  return w;
}

double rms(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(end - begin));
}

}  // namespace

TEST_CASE("fft matches the naive DFT for every power of two up to 512") {
  RandomSource rng(2);
  for (std::size_t n = 2; n <= 512; n *= 2) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.normal(), rng.normal()};
    const auto want = naive_dft(x, false);
    auto got = x;
    fex::fft(got, false);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(got[k] - want[k]) <= 1e-9 * std::max(1.0, std::abs(want[k])));
    }
    // Inverse undoes forward to machine precision.
    fex::fft(got, true);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(got[k] - x[k]) <= 1e-9);
    }
  }
  std::vector<std::complex<double>> bad(6);
  CHECK_THROWS_AS(fex::fft(bad, false), std::invalid_argument);
}

TEST_CASE("fft of an impulse is flat; a pure cosine hits one bin") {
  std::vector<std::complex<double>> impulse(64, {0.0, 0.0});
  impulse[0] = {1.0, 0.0};
  fex::fft(impulse, false);
  for (const auto& v : impulse) {
    CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) <= 1e-12);
  }

  // cos(2*pi*5*t/64): energy only in bins 5 and 59, each n/2.
  std::vector<std::complex<double>> cosine(64);
  for (std::size_t t = 0; t < 64; ++t) {
    cosine[t] = {std::cos(2.0 * kPi * 5.0 * static_cast<double>(t) / 64.0),
                 0.0};
  }
  fex::fft(cosine, false);
  for (std::size_t k = 0; k < 64; ++k) {
    const double expect = (k == 5 || k == 59) ? 32.0 : 0.0;
    CHECK(std::abs(cosine[k]) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("fft_real: one-sided spectrum and a Parseval check") {
  RandomSource rng(4);
  std::vector<double> x(100);
  for (auto& v : x) v = rng.normal();
  const std::size_t n = 128;
  const auto half = fex::fft_real(x, n);
  CHECK(half.size() == n / 2 + 1);

  // Full-spectrum Parseval: sum |X_k|^2 = n * sum x_t^2 for the zero-padded
  // signal; reconstruct the full spectrum by conjugate symmetry.
  double lhs = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double m = std::norm(half[k]);
    lhs += (k == 0 || k == n / 2) ? m : 2.0 * m;
  }
  double rhs = 0.0;
  for (double v : x) rhs += v * v;
  rhs *= static_cast<double>(n);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));

  CHECK_THROWS_AS(fex::fft_real(x, 64), std::invalid_argument);  // n < length
  CHECK_THROWS_AS(fex::fft_real(x, 100), std::invalid_argument);  // not pow2
}

TEST_CASE("hann window: periodic form, endpoints, and COLA at half overlap") {
  const auto w = fex::hann_window(8);
  CHECK(w.size() == 8);
  CHECK(w[0] == 0.0);
  CHECK(w[4] == doctest::Approx(1.0).epsilon(1e-12));  // peak at N/2
  for (std::size_t i = 1; i < 8; ++i) {
    CHECK(w[i] == doctest::Approx(w[8 - i]).epsilon(1e-12));  // symmetric
  }
  // Periodic Hann at hop N/2 sums to a constant.
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(w[i] + w[i + 4] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(fex::next_power_of_two(400) == 512);
  CHECK(fex::next_power_of_two(512) == 512);
  CHECK(fex::next_power_of_two(1) == 1);
}

TEST_CASE("stft geometry: 1 s at window 400 hop 160 gives 98 frames, 257 bins") {
  const Waveform w = tone(1000.0, 1.0);
  const auto s = fex::stft(w, 400, 160);
  CHECK(s.frames == 98);
  CHECK(s.bins == 257);
  CHECK(s.n_fft == 512);

  // 1 kHz sits at bin 1000/16000*512 = 32; the peak bin must be 32.
  std::size_t peak = 0;
  double best = 0.0;
  for (std::size_t b = 0; b < s.bins; ++b) {
    const double m = std::abs(s.at(50, b));
    if (m > best) {
      best = m;
      peak = b;
    }
  }
  CHECK(peak == 32);
}

TEST_CASE("istft of stft reconstructs the interior at hops 160 and 80") {
  RandomSource rng(6);
  Waveform w;
  w.samples.resize(4000);
  for (auto& v : w.samples) v = 0.5 * rng.normal();
  for (std::size_t hop : {160u, 80u}) {
    const auto s = fex::stft(w, 400, hop);
    const Waveform back = fex::istft(s, 400, hop, w.samples.size());
    REQUIRE(back.samples.size() == w.samples.size());
    // Boundary frames are not fully covered by windows; compare the interior.
    double max_err = 0.0;
    for (std::size_t i = 400; i + 400 < w.samples.size(); ++i) {
      max_err = std::max(max_err, std::abs(back.samples[i] - w.samples[i]));
    }
    CHECK(max_err <= 1e-6);
  }

  const auto s = fex::stft(w, 400, 160);
  CHECK_THROWS_AS(fex::istft(s, 512, 160, w.samples.size()),
                  std::invalid_argument);
  CHECK_THROWS_AS(fex::istft(s, 400, 80, w.samples.size()),
                  std::invalid_argument);
}

TEST_CASE("mel scale: closed form and round trip") {
  CHECK(fex::hz_to_mel(0.0) == 0.0);
  // 2595 * log10(1 + 1000/700) = 999.9855...
  CHECK(fex::hz_to_mel(1000.0) == doctest::Approx(999.98553).epsilon(1e-6));
  for (double hz : {50.0, 440.0, 1000.0, 4000.0, 7999.0}) {
    CHECK(fex::mel_to_hz(fex::hz_to_mel(hz)) ==
          doctest::Approx(hz).epsilon(1e-10));
  }
  // Monotone increasing.
  CHECK(fex::hz_to_mel(200.0) < fex::hz_to_mel(201.0));
}

TEST_CASE("mel filterbank: shape, nonnegativity, coverage, unimodal rows") {
  const std::size_t n_mels = 80, n_fft = 512;
  const double sr = 16000.0;
  const fex::Tensor m = fex::mel_filterbank_matrix(n_mels, n_fft, sr, 0.0,
                                                   sr / 2.0);
  REQUIRE(m.shape() == fex::Shape{n_fft / 2 + 1, n_mels});
  const auto& v = m.values();
  for (double x : v) CHECK(x >= 0.0);

  // Every filter has support, and interior bins are covered by some filter.
  for (std::size_t f = 0; f < n_mels; ++f) {
    double total = 0.0;
    for (std::size_t b = 0; b <= n_fft / 2; ++b) total += v[b * n_mels + f];
    CHECK(total > 0.0);
  }
  std::size_t uncovered = 0;
  for (std::size_t b = 2; b < n_fft / 2 - 1; ++b) {
    double total = 0.0;
    for (std::size_t f = 0; f < n_mels; ++f) total += v[b * n_mels + f];
    if (total <= 0.0) ++uncovered;
  }
  CHECK(uncovered == 0);

  // Triangular: each column rises to a single peak then falls.
  for (std::size_t f = 0; f < n_mels; ++f) {
    std::vector<double> col(n_fft / 2 + 1);
    for (std::size_t b = 0; b < col.size(); ++b) col[b] = v[b * n_mels + f];
    const std::size_t peak = static_cast<std::size_t>(
        std::max_element(col.begin(), col.end()) - col.begin());
    for (std::size_t b = 1; b <= peak; ++b) CHECK(col[b] >= col[b - 1] - 1e-12);
    for (std::size_t b = peak + 1; b < col.size(); ++b) {
      CHECK(col[b] <= col[b - 1] + 1e-12);
    }
  }

  // Filter centers are ordered in frequency: peak bins must be nondecreasing.
  std::size_t prev_peak = 0;
  for (std::size_t f = 0; f < n_mels; ++f) {
    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t b = 0; b <= n_fft / 2; ++b) {
      if (v[b * n_mels + f] > best) {
        best = v[b * n_mels + f];
        peak = b;
      }
    }
    CHECK(peak >= prev_peak);
    prev_peak = peak;
  }

  CHECK_THROWS_AS(fex::mel_filterbank_matrix(0, 512, sr, 0.0, 8000.0),
                  std::invalid_argument);
}

TEST_CASE("erb bandwidth closed form") {
  // 24.7 * (4.37 * 1000/1000 + 1) = 24.7 * 5.37 = 132.639.
  CHECK(fex::erb_bandwidth(1000.0) == doctest::Approx(132.639).epsilon(1e-10));
  CHECK(fex::erb_bandwidth(0.0) == doctest::Approx(24.7).epsilon(1e-10));
}

TEST_CASE("gammatone bank: peaks at design centers, ordered, sane bandwidth") {
  const std::size_t n = 32, k = 512;
  const double sr = 16000.0;
  const auto bank = fex::gammatone_filterbank(n, k, sr, 100.0, 7000.0);
  REQUIRE(bank.num_filters() == n);
  REQUIRE(bank.kernel_length() == k);
  REQUIRE(bank.center_frequencies.size() == n);
  CHECK(bank.origin == fex::FilterOrigin::kGammatone);

  double prev = 0.0;
  for (std::size_t f = 0; f < n; ++f) {
    CHECK(bank.center_frequencies[f] > prev);
    prev = bank.center_frequencies[f];
  }
  CHECK(bank.center_frequencies.front() == doctest::Approx(100.0));
  CHECK(bank.center_frequencies.back() == doctest::Approx(7000.0));

  for (std::size_t f = 0; f < n; ++f) {
    std::vector<double> taps(k);
    for (std::size_t i = 0; i < k; ++i) {
      taps[i] = bank.filters.values()[f * k + i];
    }
    const auto resp = fex::frequency_response(taps, sr, 4096);
    // Peak: response is normalized to its own max, so find the 0 dB point.
    std::size_t peak = 0;
    for (std::size_t i = 0; i < resp.magnitude_db.size(); ++i) {
      if (resp.magnitude_db[i] > resp.magnitude_db[peak]) peak = i;
    }
    const double fc = bank.center_frequencies[f];
    CHECK(std::abs(resp.frequencies_hz[peak] - fc) <= 0.05 * fc);

    // -3 dB width should be on the order of the ERB at fc.
    std::size_t lo = peak, hi = peak;
    while (lo > 0 && resp.magnitude_db[lo] > -3.0) --lo;
    while (hi + 1 < resp.magnitude_db.size() && resp.magnitude_db[hi] > -3.0) {
      ++hi;
    }
    const double width = resp.frequencies_hz[hi] - resp.frequencies_hz[lo];
    const double erb = fex::erb_bandwidth(fc);
    CHECK(width >= 0.5 * erb);
    CHECK(width <= 2.0 * erb);
  }

  CHECK_THROWS_AS(fex::gammatone_filterbank(8, 256, sr, 0.0, 7000.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fex::gammatone_filterbank(8, 256, sr, 100.0, 9000.0),
                  std::invalid_argument);
}

TEST_CASE("gammatone peak gain is normalized to one") {
  const auto bank = fex::gammatone_filterbank(8, 512, 16000.0, 100.0, 7000.0);
  for (std::size_t f = 0; f < 8; ++f) {
    std::vector<double> taps(512);
    for (std::size_t i = 0; i < 512; ++i) {
      taps[i] = bank.filters.values()[f * 512 + i];
    }
    // Exactly 1 on the grid the normalization uses (4x kernel, 2048 bins).
    const auto spec = fex::fft_real(taps, 2048);
    double peak = 0.0;
    for (const auto& v : spec) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-9));

    // A finer grid may expose a marginally higher true peak between bins,
    // but never by more than a fraction of a percent.
    const auto fine = fex::fft_real(taps, 8192);
    double fine_peak = 0.0;
    for (const auto& v : fine) fine_peak = std::max(fine_peak, std::abs(v));
    CHECK(fine_peak >= peak - 1e-12);
    CHECK(fine_peak <= 1.01);
  }
}

TEST_CASE("resample_speed: length, identity, and pitch shift") {
  const Waveform w = tone(440.0, 0.5);
  CHECK(fex::resample_speed(w, 1.0).samples == w.samples);

  const Waveform fast = fex::resample_speed(w, 1.1);
  CHECK(fast.samples.size() ==
        static_cast<std::size_t>(std::llround(w.samples.size() / 1.1)));
  const Waveform slow = fex::resample_speed(w, 0.9);
  CHECK(slow.samples.size() ==
        static_cast<std::size_t>(std::llround(w.samples.size() / 0.9)));

  // Faster playback moves the spectral peak up by the same factor.
  const auto s = fex::stft(fast, 400, 160);
  std::size_t peak = 0;
  double best = 0.0;
  for (std::size_t b = 0; b < s.bins; ++b) {
    const double m = std::abs(s.at(s.frames / 2, b));
    if (m > best) {
      best = m;
      peak = b;
    }
  }
  const double bin_hz = 16000.0 / 512.0;
  CHECK(std::abs(static_cast<double>(peak) * bin_hz - 440.0 * 1.1) <=
        bin_hz * 1.5);

  // Down-then-up at reciprocal factors returns close to the original.
  const Waveform twice = fex::resample_speed(fex::resample_speed(w, 0.5), 2.0);
  REQUIRE(twice.samples.size() == w.samples.size());
  double err = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    err += (twice.samples[i] - w.samples[i]) * (twice.samples[i] - w.samples[i]);
  }
  err = std::sqrt(err / static_cast<double>(w.samples.size()));
  CHECK(err <= 1e-3 * rms(w.samples, 0, w.samples.size()) + 1e-3);

  CHECK_THROWS_AS(fex::resample_speed(w, 0.0), std::invalid_argument);
}

TEST_CASE("frequency_response: impulse is flat, tone filter peaks at its tone") {
  std::vector<double> impulse(64, 0.0);
  impulse[0] = 1.0;
  const auto flat = fex::frequency_response(impulse, 16000.0, 1024);
  CHECK(flat.frequencies_hz.size() == 513);
  CHECK(flat.frequencies_hz.front() == 0.0);
  CHECK(flat.frequencies_hz.back() == doctest::Approx(8000.0));
  for (double db : flat.magnitude_db) {
    CHECK(db == doctest::Approx(0.0).epsilon(1e-9));
  }

  // A windowed 2 kHz cosine FIR peaks at 2 kHz.
  std::vector<double> taps(128);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double t = static_cast<double>(i) / 16000.0;
    const double win =
        0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / 127.0);
    taps[i] = win * std::cos(2.0 * kPi * 2000.0 * t);
  }
  const auto resp = fex::frequency_response(taps, 16000.0, 4096);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < resp.magnitude_db.size(); ++i) {
    if (resp.magnitude_db[i] > resp.magnitude_db[peak]) peak = i;
  }
  CHECK(resp.magnitude_db[peak] == doctest::Approx(0.0));  // own-peak relative
  CHECK(std::abs(resp.frequencies_hz[peak] - 2000.0) <= 16000.0 / 4096.0 * 2);
}
