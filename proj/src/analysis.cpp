// fex/analysis.cpp

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

#include "fex/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace fex {

std::vector<FilterAnalysis> analyze_filters(const FilterBank& bank,
                                            std::size_t n_fft_pad) {
  const std::size_t n = bank.num_filters();
  const std::size_t k = bank.kernel_length();
  if (n_fft_pad == 0) n_fft_pad = next_power_of_two(4 * k);
  const double nyquist = bank.sample_rate / 2.0;

  std::vector<FilterAnalysis> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    FilterAnalysis& a = out[i];
    a.filter_index = i;
    std::vector<double> taps(bank.filters.values().begin() + i * k,
                             bank.filters.values().begin() + (i + 1) * k);
    double energy = 0.0;
    for (double v : taps) energy += v * v;
    if (energy < 1e-20) {
      a.degenerate = true;
      a.upper_cutoff_3db = nyquist;
      continue;
    }
    a.response = frequency_response(taps, bank.sample_rate, n_fft_pad);
    const auto& db = a.response.magnitude_db;
    // argmax; ties resolve to the lowest frequency
    std::size_t peak = 0;
    for (std::size_t b = 1; b < db.size(); ++b) {
      if (db[b] > db[peak]) peak = b;
    }
    a.peak_frequency = a.response.frequencies_hz[peak];
    a.lower_cutoff_3db = 0.0;
    for (std::size_t b = peak; b-- > 0;) {
      if (db[b] < -3.0) {
        a.lower_cutoff_3db = a.response.frequencies_hz[b];
        break;
      }
    }
    a.upper_cutoff_3db = nyquist;
    for (std::size_t b = peak + 1; b < db.size(); ++b) {
      if (db[b] < -3.0) {
        a.upper_cutoff_3db = a.response.frequencies_hz[b];
        break;
      }
    }
  }
  return out;
}

bool is_bandpass_like(const FilterAnalysis& a, double nyquist_hz) {
  return !a.degenerate && a.peak_frequency > 0.0 &&
         a.lower_cutoff_3db > 0.0 && a.upper_cutoff_3db < nyquist_hz;
}

std::vector<std::size_t> sort_filters(
    const std::vector<FilterAnalysis>& analyses) {
  std::vector<std::size_t> perm(analyses.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&analyses](std::size_t a, std::size_t b) {
                     const auto& fa = analyses[a];
                     const auto& fb = analyses[b];
                     return std::tie(fa.peak_frequency, fa.upper_cutoff_3db,
                                     fa.lower_cutoff_3db) <
                            std::tie(fb.peak_frequency, fb.upper_cutoff_3db,
                                     fb.lower_cutoff_3db);
                   });
  return perm;
}

namespace {

// Maximal strictly-monotone run lengths of one orientation. cmp(prev, next)
// true extends the current run.
template <typename Cmp>
void run_lengths(const std::vector<double>& v, Cmp cmp,
                 std::vector<std::size_t>& out) {
  std::size_t run = 1;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (cmp(v[i - 1], v[i])) {
      ++run;
    } else {
      out.push_back(run);
      run = 1;
    }
  }
  out.push_back(run);
}

struct RunSummary {
  std::size_t max_run;
  double mean_run;
};

RunSummary summarize_runs(const std::vector<double>& v) {
  std::vector<std::size_t> runs;
  run_lengths(v, [](double a, double b) { return a < b; }, runs);
  run_lengths(v, [](double a, double b) { return a > b; }, runs);
  std::size_t max_run = 0;
  std::size_t total = 0;
  for (std::size_t r : runs) {
    max_run = std::max(max_run, r);
    total += r;
  }
  return {max_run, static_cast<double>(total) /
                       static_cast<double>(runs.size())};
}

}  // namespace

OrderingStatistic ordering_statistic(const std::vector<double>& values,
                                     RandomSource& rng,
                                     std::size_t shuffles) {
  if (values.size() < 2) {
    throw std::invalid_argument("ordering_statistic: need >= 2 values");
  }
  if (shuffles < 10000) {
    throw std::invalid_argument(
        "ordering_statistic: need >= 10000 null shuffles");
  }
  const RunSummary observed = summarize_runs(values);

  std::vector<double> shuffled = values;
  std::size_t at_least = 0;
  for (std::size_t s = 0; s < shuffles; ++s) {
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.uniform_int(i)]);
    }
    if (summarize_runs(shuffled).max_run >= observed.max_run) ++at_least;
  }

  OrderingStatistic stat;
  stat.max_run = observed.max_run;
  stat.mean_run = observed.mean_run;
  stat.p_value = static_cast<double>(at_least + 1) /
                 static_cast<double>(shuffles + 1);
  return stat;
}

void write_frontend_summary(std::ostream& os,
                            const std::vector<FrontendConfig>& configs) {
  os << "frontend,frontend_params,pipeline_params,frontend_stride,"
        "overall_stride,output_dim,pipeline_dim,frames_per_second\n";
  for (const auto& cfg : configs) {
    const std::size_t stride = overall_stride(cfg);
    os << frontend_name(cfg) << "," << count_frontend_parameters(cfg) << ","
       << count_pipeline_parameters(cfg) << "," << frontend_stride(cfg) << ","
       << stride << "," << frontend_output_dim(cfg) << ","
       << pipeline_feature_dim(cfg) << ","
       << 16000.0 / static_cast<double>(stride) << "\n";
  }
}

void write_filter_table(std::ostream& os,
                        const std::vector<FilterAnalysis>& analyses) {
  os << "filter,peak_hz,lower_3db_hz,upper_3db_hz,degenerate\n";
  for (const auto& a : analyses) {
    os << a.filter_index << "," << a.peak_frequency << ","
       << a.lower_cutoff_3db << "," << a.upper_cutoff_3db << ","
       << (a.degenerate ? 1 : 0) << "\n";
  }
}

void write_response_table(std::ostream& os,
                          const std::vector<FilterAnalysis>& analyses,
                          const std::vector<std::size_t>& order) {
  os << "position,filter,frequency_hz,magnitude_db\n";
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& a = analyses.at(order[pos]);
    for (std::size_t b = 0; b < a.response.frequencies_hz.size(); ++b) {
      os << pos << "," << a.filter_index << "," << a.response.frequencies_hz[b]
         << "," << a.response.magnitude_db[b] << "\n";
    }
  }
}

}  // namespace fex
