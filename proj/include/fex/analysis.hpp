// fex/analysis.hpp

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

#ifndef FEX_ANALYSIS_HPP_
#define FEX_ANALYSIS_HPP_

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "fex/dsp.hpp"
#include "fex/frontends.hpp"
#include "fex/tensor.hpp"

namespace fex {

/// Per-filter response summary. The response is normalized to the filter's
/// own peak (0 dB); cutoffs are the nearest frequencies on either side of
/// the peak where it first drops below -3 dB, clamped to 0 and Nyquist when
/// it never does. Near-zero filters are flagged degenerate instead of
/// analyzed.
struct FilterAnalysis {
  std::size_t filter_index = 0;
  double peak_frequency = 0.0;
  double lower_cutoff_3db = 0.0;
  double upper_cutoff_3db = 0.0;
  bool degenerate = false;
  FrequencyResponse response;
};

/// n_fft_pad = 0 picks the smallest power of two >= 4x the kernel length.
std::vector<FilterAnalysis> analyze_filters(const FilterBank& bank,
                                            std::size_t n_fft_pad = 0);

/// Peak away from DC and both -3 dB cutoffs strictly inside (0, Nyquist).
bool is_bandpass_like(const FilterAnalysis& a, double nyquist_hz);

/// Stable lexicographic order by (peak, upper cutoff, lower cutoff).
/// Returns the permutation: element i is the index of the filter placed at
/// sorted position i.
std::vector<std::size_t> sort_filters(
    const std::vector<FilterAnalysis>& analyses);

/// Monotone-run structure of a value sequence. The sequence is partitioned
/// twice, into maximal strictly-ascending runs and into maximal strictly-
/// descending runs (ties break runs in both); statistics are taken over the
/// union of the two partitions, whose null mean run length is 2n/(n+1).
struct OrderingStatistic {
  std::size_t max_run = 0;
  double mean_run = 0.0;
  double p_value = 1.0;  // P(null max run >= observed), add-one estimate
};

OrderingStatistic ordering_statistic(const std::vector<double>& values,
                                     RandomSource& rng,
                                     std::size_t shuffles = 10000);

/// One row per front-end: parameter counts, strides, dims, frame rate.
void write_frontend_summary(std::ostream& os,
                            const std::vector<FrontendConfig>& configs);

/// One row per filter: index, peak, cutoffs, degenerate flag.
void write_filter_table(std::ostream& os,
                        const std::vector<FilterAnalysis>& analyses);

/// (filter, frequency Hz, dB) rows; `order` selects and orders the filters,
/// so the same analyses can be written in learned and in sorted order.
void write_response_table(std::ostream& os,
                          const std::vector<FilterAnalysis>& analyses,
                          const std::vector<std::size_t>& order);

}  // namespace fex

#endif  // FEX_ANALYSIS_HPP_
