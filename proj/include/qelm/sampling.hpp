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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qelm/errors.hpp"
#include "qelm/rng.hpp"

namespace qelm {

/// Detector counts per OAM outcome together with the nominal mean flux used
/// to produce them.
struct CountVector {
    std::vector<std::int64_t> counts;
    double shots_nominal{0.0};

    std::int64_t total() const {
        return std::accumulate(counts.begin(), counts.end(),
                               std::int64_t{0});
    }
};

enum class SamplingMode { Poisson, Multinomial, Exact };

enum class FeatureMode { RawRate, Conditional, Exact };

namespace detail {

/// Knuth's product method; expected cost grows with the mean, so it is only
/// used below the PTRS threshold.
inline std::int64_t poisson_small(Xoshiro256& rng, double mean) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform_double(rng);
    } while (p > limit);
    return k - 1;
}

/// Hormann's PTRS transformed-rejection sampler, exact for mean >= 10 with
/// O(1) expected cost per draw.
inline std::int64_t poisson_ptrs(Xoshiro256& rng, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform_double(rng) - 0.5;
        const double v = uniform_double(rng);
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(
            std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= v_r) {
            return k;
        }
        if (k < 0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            static_cast<double>(k) * loglam - mean -
                std::lgamma(static_cast<double>(k) + 1.0)) {
            return k;
        }
    }
}

} // namespace detail

/// One Poisson draw with the given mean.
inline std::int64_t poisson_sample(Xoshiro256& rng, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("poisson_sample: mean must be finite and >= 0");
    }
    if (mean == 0.0) {
        return 0;
    }
    return mean < 10.0 ? detail::poisson_small(rng, mean)
                       : detail::poisson_ptrs(rng, mean);
}

/// `total` events over the outcomes with probabilities p / sum(p).
inline std::vector<std::int64_t> multinomial_sample(Xoshiro256& rng,
                                                    const Eigen::VectorXd& p,
                                                    std::int64_t total) {
    const Eigen::Index k = p.size();
    const double psum = p.sum();
    if (!(psum > 0.0)) {
        throw std::invalid_argument(
            "multinomial_sample: probabilities sum to zero");
    }
    std::vector<double> cdf(static_cast<std::size_t>(k));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        acc += p(i) / psum;
        cdf[static_cast<std::size_t>(i)] = acc;
    }
    cdf.back() = 1.0; // guard against roundoff in the last bin
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (std::int64_t e = 0; e < total; ++e) {
        const double u = uniform_double(rng);
        std::size_t bin = 0;
        while (u >= cdf[bin]) {
            ++bin;
        }
        ++counts[bin];
    }
    return counts;
}

/// Simulated measurement record for one input state.
///
/// Poisson mode draws each outcome independently with mean shots * p_b (the
/// flux model of a free-running counter); Multinomial mode distributes
/// exactly round(shots) detection events over the outcomes.
inline CountVector sample_counts(const Eigen::VectorXd& p, double shots,
                                 SamplingMode mode, Xoshiro256& rng) {
    if (!(shots > 0.0) || !std::isfinite(shots)) {
        throw std::invalid_argument(
            "sample_counts: shots must be positive and finite");
    }
    Eigen::VectorXd q = p;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (q(i) < -1e-12) {
            throw std::invalid_argument(
                "sample_counts: negative outcome probability");
        }
        if (q(i) < 0.0) {
            q(i) = 0.0;
        }
    }
    if (q.sum() > 1.0 + 1e-9) {
        throw std::invalid_argument(
            "sample_counts: probabilities sum beyond 1");
    }
    CountVector out;
    out.shots_nominal = shots;
    switch (mode) {
    case SamplingMode::Poisson:
        out.counts.resize(static_cast<std::size_t>(q.size()));
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            out.counts[static_cast<std::size_t>(i)] =
                poisson_sample(rng, shots * q(i));
        }
        break;
    case SamplingMode::Multinomial:
        out.counts = multinomial_sample(rng, q, std::llround(shots));
        break;
    default:
        throw std::invalid_argument(
            "sample_counts: exact mode has no counts to sample");
    }
    return out;
}

/// Estimator input derived from a measurement record (plus an optional
/// trailing constant-1 intercept entry).
struct FeatureVector {
    Eigen::VectorXd values;
    FeatureMode mode{FeatureMode::Exact};
    bool intercept{false};
};

/// RawRate: counts / nominal flux, an unbiased estimate of the outcome
/// probabilities. Conditional: counts / total counts, the only feature an
/// experiment without flux calibration can form (throws on an all-zero
/// record).
inline FeatureVector features(const CountVector& c, FeatureMode mode,
                              bool with_intercept) {
    if (mode == FeatureMode::Exact) {
        throw std::invalid_argument(
            "features: exact mode takes probabilities, not counts");
    }
    const auto b = static_cast<Eigen::Index>(c.counts.size());
    Eigen::VectorXd v(b + (with_intercept ? 1 : 0));
    if (mode == FeatureMode::RawRate) {
        if (!(c.shots_nominal > 0.0)) {
            throw std::invalid_argument(
                "features: raw-rate mode needs a positive nominal flux");
        }
        for (Eigen::Index i = 0; i < b; ++i) {
            v(i) = static_cast<double>(c.counts[static_cast<std::size_t>(i)]) /
                   c.shots_nominal;
        }
    } else {
        const std::int64_t total = c.total();
        if (total == 0) {
            throw DegenerateSampleError(
                "features: conditional mode with zero total counts");
        }
        for (Eigen::Index i = 0; i < b; ++i) {
            v(i) = static_cast<double>(c.counts[static_cast<std::size_t>(i)]) /
                   static_cast<double>(total);
        }
    }
    if (with_intercept) {
        v(b) = 1.0;
    }
    return {std::move(v), mode, with_intercept};
}

/// Pass-through of exact probabilities (infinite statistics).
inline FeatureVector exact_features(const Eigen::VectorXd& probs,
                                    bool with_intercept) {
    Eigen::VectorXd v(probs.size() + (with_intercept ? 1 : 0));
    v.head(probs.size()) = probs;
    if (with_intercept) {
        v(probs.size()) = 1.0;
    }
    return {std::move(v), FeatureMode::Exact, with_intercept};
}

} // namespace qelm
