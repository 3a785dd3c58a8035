// Copyright 2026 The qelm developers.

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qelm {

/// Quantile of a sorted sample with linear interpolation between order
/// statistics (the numpy default convention).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile_sorted: empty sample");
    }
    if (q < 0.0 || q > 1.0) {
        throw std::invalid_argument("quantile_sorted: q outside [0, 1]");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

inline double median(std::vector<double> values) {
    return quantile(std::move(values), 0.5);
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two
/// values. Accumulated in index order so the result is reproducible.
inline double sample_stddev(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (const double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

} // namespace qelm
