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

#include <catch2/catch.hpp>

#include "qelm/sampling.hpp"

using namespace qelm;

namespace {

Eigen::VectorXd probs3() {
    Eigen::VectorXd p(3);
    p << 0.12, 0.30, 0.18; // subnormalized on purpose
    return p;
}

} // namespace

TEST_CASE("sample_counts input validation", "[sampling]") {
    auto rng = substream(1, Stage::Single);
    CHECK_THROWS_AS(sample_counts(probs3(), 0.0, SamplingMode::Poisson, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_counts(probs3(), -5.0, SamplingMode::Poisson, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_counts(probs3(),
                                  std::numeric_limits<double>::infinity(),
                                  SamplingMode::Poisson, rng),
                    std::invalid_argument);
    Eigen::VectorXd bad(2);
    bad << 0.5, -1e-6;
    CHECK_THROWS_AS(sample_counts(bad, 10.0, SamplingMode::Poisson, rng),
                    std::invalid_argument);
    Eigen::VectorXd over(2);
    over << 0.7, 0.7;
    CHECK_THROWS_AS(sample_counts(over, 10.0, SamplingMode::Poisson, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_counts(probs3(), 10.0, SamplingMode::Exact, rng),
                    std::invalid_argument);
}

TEST_CASE("vanishing flux yields empty records", "[sampling]") {
    auto rng = substream(2, Stage::Single);
    const auto c = sample_counts(probs3(), 1e-9, SamplingMode::Poisson, rng);
    CHECK(c.total() == 0);
    CHECK(c.shots_nominal == Approx(1e-9));
}

TEST_CASE("poisson moments match across the sampler regimes",
          "[sampling][montecarlo]") {
    // exercises both the small-mean product method and the PTRS branch
    const double shots = GENERATE(50.0, 2000.0);
    const Eigen::VectorXd p = probs3();
    const int n_draws = 100000;
    auto rng = substream(3, Stage::Single, static_cast<std::uint64_t>(shots));
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < n_draws; ++i) {
        const auto c = sample_counts(p, shots, SamplingMode::Poisson, rng);
        for (int b = 0; b < 3; ++b) {
            const auto v = static_cast<double>(c.counts[b]);
            sum(b) += v;
            sum_sq(b) += v * v;
        }
    }
    for (int b = 0; b < 3; ++b) {
        const double mean = sum(b) / n_draws;
        const double var = sum_sq(b) / n_draws - mean * mean;
        const double lambda = shots * p(b);
        const double se = std::sqrt(lambda / n_draws);
        CHECK(std::abs(mean - lambda) < 3.0 * se);
        CHECK(var == Approx(mean).epsilon(0.05));
    }
}

TEST_CASE("multinomial totals are exact", "[sampling]") {
    auto rng = substream(4, Stage::Single);
    for (const double shots : {1.0, 17.0, 1000.0}) {
        const auto c =
            sample_counts(probs3(), shots, SamplingMode::Multinomial, rng);
        CHECK(c.total() == std::llround(shots));
    }
}

TEST_CASE("multinomial proportions follow the normalized probabilities",
          "[sampling][montecarlo]") {
    auto rng = substream(5, Stage::Single);
    const Eigen::VectorXd p = probs3();
    const double total_p = p.sum();
    const double shots = 200000.0;
    const auto c = sample_counts(p, shots, SamplingMode::Multinomial, rng);
    for (int b = 0; b < 3; ++b) {
        const double q = p(b) / total_p;
        const double se = std::sqrt(q * (1 - q) / shots);
        CHECK(std::abs(static_cast<double>(c.counts[b]) / shots - q) <
              4.0 * se);
    }
}

TEST_CASE("feature vectors from counts", "[sampling]") {
    CountVector c{{10, 30, 60}, 100.0};

    SECTION("raw rate divides by the nominal flux") {
        const auto f = features(c, FeatureMode::RawRate, false);
        CHECK(f.values(0) == Approx(0.1));
        CHECK(f.values(1) == Approx(0.3));
        CHECK(f.values(2) == Approx(0.6));
        CHECK(f.values.size() == 3);
    }
    SECTION("conditional divides by the total") {
        const auto f = features(c, FeatureMode::Conditional, false);
        CHECK(f.values(0) == Approx(0.1));
        CHECK(f.values(1) == Approx(0.3));
        CHECK(f.values(2) == Approx(0.6));
        CHECK(f.values.sum() == Approx(1.0));
    }
    SECTION("intercept appends a trailing one") {
        const auto f = features(c, FeatureMode::RawRate, true);
        CHECK(f.values.size() == 4);
        CHECK(f.values(3) == 1.0);
        CHECK(f.intercept);
    }
    SECTION("zero-total conditional record is degenerate") {
        const CountVector zero{{0, 0, 0}, 100.0};
        CHECK_THROWS_AS(features(zero, FeatureMode::Conditional, false),
                        DegenerateSampleError);
        // raw rate handles the same record fine
        CHECK(features(zero, FeatureMode::RawRate, false).values.sum() == 0.0);
    }
    SECTION("exact mode rejects count input") {
        CHECK_THROWS_AS(features(c, FeatureMode::Exact, false),
                        std::invalid_argument);
    }
}

TEST_CASE("exact features pass probabilities through", "[sampling]") {
    const Eigen::VectorXd p = probs3();
    const auto f = exact_features(p, true);
    CHECK(f.mode == FeatureMode::Exact);
    CHECK(f.values.head(3) == p);
    CHECK(f.values(3) == 1.0);
}

TEST_CASE("raw-rate features are unbiased", "[sampling][montecarlo]") {
    const Eigen::VectorXd p = probs3();
    const double shots = 300.0;
    const int n_draws = 10000;
    auto rng = substream(6, Stage::Single);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < n_draws; ++i) {
        const auto c = sample_counts(p, shots, SamplingMode::Poisson, rng);
        mean += features(c, FeatureMode::RawRate, false).values;
    }
    mean /= static_cast<double>(n_draws);
    for (int b = 0; b < 3; ++b) {
        const double se = std::sqrt(p(b) / shots / n_draws);
        CHECK(std::abs(mean(b) - p(b)) < 3.0 * se);
    }
}
