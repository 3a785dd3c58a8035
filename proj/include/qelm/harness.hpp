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

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qelm/errors.hpp"
#include "qelm/estimator.hpp"
#include "qelm/qubit.hpp"
#include "qelm/reservoir.hpp"
#include "qelm/rng.hpp"
#include "qelm/sampling.hpp"
#include "qelm/stats.hpp"

namespace qelm {

inline std::vector<Observable> default_observables() {
    return {pauli(PauliLabel::SigmaX), pauli(PauliLabel::SigmaY),
            pauli(PauliLabel::SigmaZ)};
}

/// Full sweep protocol: a pool of Haar states is measured through the
/// reservoir, and for every repetition and every training-set size a fresh
/// disjoint train/test split is drawn, a readout is trained, and the
/// per-observable test MSE is recorded. Statistics are aggregated across
/// repetitions.
struct ExperimentConfig {
    WalkConfig walk;
    int pool_size = 450;
    int test_size = 150;
    std::vector<int> n_train_grid = {2, 3, 4, 5, 7, 10, 15, 20, 30, 50, 70, 100};
    int repetitions = 500;
    double shots = 1e4; // +inf means exact statistics
    SamplingMode sampling = SamplingMode::Poisson;
    FeatureMode feature_mode = FeatureMode::RawRate;
    bool intercept = true;
    bool fixed_records = false; // reuse one count record per state across reps
    std::uint64_t master_seed = 1;
    std::vector<Observable> observables = default_observables();
    double rcond = 1e-10;
    double ridge = 0.0;
};

struct SweepSummaryCell {
    int n_train{0};
    std::string observable;
    double median_mse{0.0};
    double q1{0.0};
    double q3{0.0};
    double stddev{0.0};
};

struct SweepResults {
    std::vector<int> n_train_grid;
    std::vector<std::string> observable_names;
    int repetitions{0};
    bool exact_statistics{false};
    long dropped_records{0};
    /// Per-repetition test MSE, laid out [(rep * G + g) * M + m].
    std::vector<double> per_rep_mse;
    /// Aggregates in grid-major, observable-minor order.
    std::vector<SweepSummaryCell> summary;

    double mse_at(int rep, int grid_idx, int obs_idx) const {
        const auto g = n_train_grid.size();
        const auto m = observable_names.size();
        return per_rep_mse[(static_cast<std::size_t>(rep) * g +
                            static_cast<std::size_t>(grid_idx)) *
                               m +
                           static_cast<std::size_t>(obs_idx)];
    }
};

namespace detail {

/// Partial Fisher-Yates draw of disjoint train and test index sets.
inline std::pair<std::vector<int>, std::vector<int>>
draw_split(std::vector<int> from, int n_train, int n_test, Xoshiro256& rng) {
    const auto need = static_cast<std::size_t>(n_train + n_test);
    if (from.size() < need) {
        throw ConfigError("draw_split: not enough states for the split");
    }
    for (std::size_t i = 0; i < need; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(
                    uniform_below(rng, static_cast<std::uint64_t>(
                                           from.size() - i)));
        std::swap(from[i], from[j]);
    }
    return {std::vector<int>(from.begin(), from.begin() + n_train),
            std::vector<int>(from.begin() + n_train,
                             from.begin() + static_cast<long>(need))};
}

struct RepRecord {
    Eigen::MatrixXd features; // pool x d
    std::vector<char> alive;
    long dropped{0};
};

/// Samples one measurement record per pool state and converts it to feature
/// rows. A state whose conditional record is all zeros is resampled once and
/// then dropped from this repetition.
inline RepRecord sample_pool_features(const std::vector<Eigen::VectorXd>& probs,
                                      double shots, SamplingMode sampling,
                                      FeatureMode mode, bool intercept,
                                      std::uint64_t seed, Stage counts_stage,
                                      Stage resample_stage,
                                      std::uint64_t record_key) {
    const auto pool = static_cast<int>(probs.size());
    const auto n_outcomes = probs.front().size();
    const Eigen::Index d = n_outcomes + (intercept ? 1 : 0);
    RepRecord rec{Eigen::MatrixXd::Zero(pool, d),
                  std::vector<char>(static_cast<std::size_t>(pool), 1), 0};
    for (int k = 0; k < pool; ++k) {
        auto rng = substream(seed, counts_stage, record_key,
                             static_cast<std::uint64_t>(k));
        CountVector counts = sample_counts(probs[static_cast<std::size_t>(k)],
                                           shots, sampling, rng);
        try {
            rec.features.row(k) = features(counts, mode, intercept).values;
        } catch (const DegenerateSampleError&) {
            auto retry_rng = substream(seed, resample_stage, record_key,
                                       static_cast<std::uint64_t>(k));
            counts = sample_counts(probs[static_cast<std::size_t>(k)], shots,
                                   sampling, retry_rng);
            try {
                rec.features.row(k) =
                    features(counts, mode, intercept).values;
            } catch (const DegenerateSampleError&) {
                rec.alive[static_cast<std::size_t>(k)] = 0;
                ++rec.dropped;
            }
        }
    }
    return rec;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m,
                                 const std::vector<int>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    }
    return out;
}

} // namespace detail

inline SweepResults run_sweep(const ExperimentConfig& cfg, int threads = 0) {
    // All invariants are checked up front; nothing is computed on a bad
    // configuration.
    const bool exact = (cfg.sampling == SamplingMode::Exact) ||
                       std::isinf(cfg.shots);
    if (cfg.pool_size < 1 || cfg.test_size < 1) {
        throw ConfigError("run_sweep: pool_size and test_size must be >= 1");
    }
    if (cfg.repetitions < 1) {
        throw ConfigError("run_sweep: repetitions must be >= 1");
    }
    if (cfg.n_train_grid.empty()) {
        throw ConfigError("run_sweep: empty n_train grid");
    }
    int max_train = 0;
    for (const int n : cfg.n_train_grid) {
        if (n < 1) {
            throw ConfigError("run_sweep: n_train entries must be >= 1");
        }
        max_train = std::max(max_train, n);
    }
    if (max_train + cfg.test_size > cfg.pool_size) {
        throw ConfigError(
            "run_sweep: max(n_train) + test_size exceeds the pool size");
    }
    if (cfg.observables.empty()) {
        throw ConfigError("run_sweep: no observables requested");
    }
    if (!exact && !(cfg.shots > 0.0)) {
        throw ConfigError("run_sweep: shots must be positive");
    }
    if (!exact && cfg.feature_mode == FeatureMode::Exact) {
        throw ConfigError(
            "run_sweep: exact features require exact sampling (shots = inf)");
    }

    const EffectivePOVM povm =
        effective_povm(reservoir_map(build_walk(cfg.walk), cfg.walk.projection));
    const auto n_outcomes = static_cast<Eigen::Index>(povm.elements.size());
    const FeatureMode mode = exact ? FeatureMode::Exact : cfg.feature_mode;
    const Eigen::Index d = n_outcomes + (cfg.intercept ? 1 : 0);
    const int pool = cfg.pool_size;
    const auto n_grid = cfg.n_train_grid.size();
    const auto n_obs = cfg.observables.size();

    // State pool with exact probabilities and targets.
    std::vector<Eigen::VectorXd> probs(static_cast<std::size_t>(pool));
    Eigen::MatrixXd targets(pool, static_cast<Eigen::Index>(n_obs));
    Eigen::MatrixXd exact_rows(pool, d);
    for (int k = 0; k < pool; ++k) {
        auto rng = substream(cfg.master_seed, Stage::Pool,
                             static_cast<std::uint64_t>(k));
        const PolarizationState psi = haar_random_state(rng);
        const DensityMatrix rho = density(psi);
        probs[static_cast<std::size_t>(k)] = probabilities(povm, rho);
        for (std::size_t j = 0; j < n_obs; ++j) {
            targets(k, static_cast<Eigen::Index>(j)) =
                expectation(cfg.observables[j], rho);
        }
        if (exact) {
            exact_rows.row(k) =
                exact_features(probs[static_cast<std::size_t>(k)],
                               cfg.intercept)
                    .values;
        }
    }

    SweepResults results;
    results.n_train_grid = cfg.n_train_grid;
    results.repetitions = cfg.repetitions;
    results.exact_statistics = exact;
    for (const auto& obs : cfg.observables) {
        results.observable_names.push_back(observable_name(obs));
    }
    results.per_rep_mse.assign(static_cast<std::size_t>(cfg.repetitions) *
                                   n_grid * n_obs,
                               0.0);
    std::vector<long> dropped_per_rep(
        static_cast<std::size_t>(cfg.repetitions), 0);

    std::atomic<int> next_rep{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const auto worker = [&]() {
        for (;;) {
            const int r = next_rep.fetch_add(1);
            if (r >= cfg.repetitions) {
                return;
            }
            {
                std::scoped_lock lock(error_mutex);
                if (first_error) {
                    return;
                }
            }
            try {
                detail::RepRecord rec;
                if (!exact) {
                    rec = detail::sample_pool_features(
                        probs, cfg.shots, cfg.sampling, mode, cfg.intercept,
                        cfg.master_seed, Stage::Counts, Stage::Resample,
                        cfg.fixed_records ? 0
                                          : static_cast<std::uint64_t>(r));
                }
                const Eigen::MatrixXd& feats =
                    exact ? exact_rows : rec.features;
                std::vector<int> alive_idx;
                alive_idx.reserve(static_cast<std::size_t>(pool));
                for (int k = 0; k < pool; ++k) {
                    if (exact || rec.alive[static_cast<std::size_t>(k)]) {
                        alive_idx.push_back(k);
                    }
                }
                dropped_per_rep[static_cast<std::size_t>(r)] = rec.dropped;

                for (std::size_t g = 0; g < n_grid; ++g) {
                    auto split_rng =
                        substream(cfg.master_seed, Stage::Split,
                                  static_cast<std::uint64_t>(r),
                                  static_cast<std::uint64_t>(g));
                    const auto [train_idx, test_idx] = detail::draw_split(
                        alive_idx, cfg.n_train_grid[g], cfg.test_size,
                        split_rng);
                    const TrainingSet ts{detail::take_rows(feats, train_idx),
                                         detail::take_rows(targets,
                                                           train_idx)};
                    const EstimatorWeights w = train(
                        ts, mode, cfg.intercept, cfg.rcond, cfg.ridge);
                    const Eigen::MatrixXd pred = predict_rows(
                        w, detail::take_rows(feats, test_idx));
                    const Eigen::VectorXd err =
                        mse(pred, detail::take_rows(targets, test_idx));
                    for (std::size_t m = 0; m < n_obs; ++m) {
                        results.per_rep_mse[(static_cast<std::size_t>(r) *
                                                 n_grid +
                                             g) *
                                                n_obs +
                                            m] =
                            err(static_cast<Eigen::Index>(m));
                    }
                }
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };

    int n_workers = threads > 0
                        ? threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min(n_workers, cfg.repetitions));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) {
            workers.emplace_back(worker);
        }
        for (auto& t : workers) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    for (const long dr : dropped_per_rep) {
        results.dropped_records += dr;
    }

    // Aggregate in deterministic (repetition) order.
    for (std::size_t g = 0; g < n_grid; ++g) {
        for (std::size_t m = 0; m < n_obs; ++m) {
            std::vector<double> values(
                static_cast<std::size_t>(cfg.repetitions));
            for (int r = 0; r < cfg.repetitions; ++r) {
                values[static_cast<std::size_t>(r)] =
                    results.mse_at(r, static_cast<int>(g),
                                   static_cast<int>(m));
            }
            SweepSummaryCell cell;
            cell.n_train = cfg.n_train_grid[g];
            cell.observable = results.observable_names[m];
            cell.stddev = sample_stddev(values);
            std::sort(values.begin(), values.end());
            cell.median_mse = quantile_sorted(values, 0.5);
            cell.q1 = quantile_sorted(values, 0.25);
            cell.q3 = quantile_sorted(values, 0.75);
            results.summary.push_back(std::move(cell));
        }
    }
    return results;
}

/// Bounds for the random coin-angle draws.
struct CoinBounds {
    double lo = 0.0;
    double hi = 2.0 * kPi;
};

/// Random two-step configuration: coin angles uniform within the bounds,
/// projection state Haar-random, q-plates fixed at the hardware values.
inline WalkConfig random_config(Xoshiro256& rng,
                                const CoinBounds& bounds = {}) {
    if (!(bounds.hi > bounds.lo) || !std::isfinite(bounds.lo) ||
        !std::isfinite(bounds.hi)) {
        throw std::invalid_argument("random_config: invalid bounds");
    }
    const CoinParams coin{uniform_in(rng, bounds.lo, bounds.hi),
                          uniform_in(rng, bounds.lo, bounds.hi),
                          uniform_in(rng, bounds.lo, bounds.hi)};
    return two_step_walk(coin, haar_random_state(rng));
}

enum class SearchCriterion { SigmaMin, ValMse };

struct SearchOptions {
    int budget = 500;
    SearchCriterion criterion = SearchCriterion::SigmaMin;
    std::uint64_t seed = 1;
    CoinBounds bounds{};
    // Validation settings used by the ValMse criterion only.
    double shots = 1e4;
    SamplingMode sampling = SamplingMode::Poisson;
    FeatureMode feature_mode = FeatureMode::RawRate;
    bool intercept = true;
    int val_pool = 80;
    int val_train = 40;
    int val_test = 30;
    int val_reps = 5;
    double rcond = 1e-10;
    double ridge = 0.0;
    std::vector<Observable> observables = default_observables();
};

struct SearchResult {
    WalkConfig config;
    /// SigmaMin: smallest frame singular value (larger is better).
    /// ValMse: median validation MSE averaged over observables (smaller is
    /// better).
    double score{0.0};
    SearchCriterion criterion{SearchCriterion::SigmaMin};
    int evaluated{0};
};

namespace detail {

inline double validation_mse(const WalkConfig& cand, const SearchOptions& opt,
                             const std::vector<PolarizationState>& pool) {
    const EffectivePOVM povm =
        effective_povm(reservoir_map(build_walk(cand), cand.projection));
    const bool exact = (opt.sampling == SamplingMode::Exact) ||
                       std::isinf(opt.shots);
    const FeatureMode mode = exact ? FeatureMode::Exact : opt.feature_mode;
    const auto n_obs = opt.observables.size();
    const auto n_pool = static_cast<int>(pool.size());
    std::vector<Eigen::VectorXd> probs(pool.size());
    Eigen::MatrixXd targets(n_pool, static_cast<Eigen::Index>(n_obs));
    const Eigen::Index d = static_cast<Eigen::Index>(povm.elements.size()) +
                           (opt.intercept ? 1 : 0);
    Eigen::MatrixXd exact_rows(n_pool, d);
    for (int k = 0; k < n_pool; ++k) {
        const DensityMatrix rho = density(pool[static_cast<std::size_t>(k)]);
        probs[static_cast<std::size_t>(k)] = probabilities(povm, rho);
        for (std::size_t j = 0; j < n_obs; ++j) {
            targets(k, static_cast<Eigen::Index>(j)) =
                expectation(opt.observables[j], rho);
        }
        if (exact) {
            exact_rows.row(k) =
                exact_features(probs[static_cast<std::size_t>(k)],
                               opt.intercept)
                    .values;
        }
    }
    std::vector<double> rep_scores;
    rep_scores.reserve(static_cast<std::size_t>(opt.val_reps));
    for (int r = 0; r < opt.val_reps; ++r) {
        RepRecord rec;
        if (!exact) {
            rec = sample_pool_features(
                probs, opt.shots, opt.sampling, mode, opt.intercept, opt.seed,
                Stage::SearchCounts, Stage::SearchResample,
                stream_key(opt.seed, Stage::SearchCounts,
                           static_cast<std::uint64_t>(r)));
        }
        const Eigen::MatrixXd& feats = exact ? exact_rows : rec.features;
        std::vector<int> alive_idx;
        for (int k = 0; k < n_pool; ++k) {
            if (exact || rec.alive[static_cast<std::size_t>(k)]) {
                alive_idx.push_back(k);
            }
        }
        if (static_cast<int>(alive_idx.size()) < opt.val_train + opt.val_test) {
            return std::numeric_limits<double>::infinity();
        }
        auto split_rng = substream(opt.seed, Stage::SearchSplit,
                                   static_cast<std::uint64_t>(r));
        const auto [train_idx, test_idx] = draw_split(
            alive_idx, opt.val_train, opt.val_test, split_rng);
        const TrainingSet ts{take_rows(feats, train_idx),
                             take_rows(targets, train_idx)};
        const EstimatorWeights w =
            train(ts, mode, opt.intercept, opt.rcond, opt.ridge);
        const Eigen::VectorXd err =
            mse(predict_rows(w, take_rows(feats, test_idx)),
                take_rows(targets, test_idx));
        rep_scores.push_back(err.mean());
    }
    return median(std::move(rep_scores));
}

} // namespace detail

/// Random search over coin angles and projection states. Deterministic for a
/// given seed; ties keep the earliest candidate.
inline SearchResult optimize_config(const SearchOptions& opt) {
    if (opt.budget < 1) {
        throw ConfigError("optimize_config: budget must be >= 1");
    }
    if (opt.criterion == SearchCriterion::ValMse &&
        opt.val_train + opt.val_test > opt.val_pool) {
        throw ConfigError(
            "optimize_config: val_train + val_test exceeds val_pool");
    }
    std::vector<PolarizationState> pool;
    if (opt.criterion == SearchCriterion::ValMse) {
        pool.reserve(static_cast<std::size_t>(opt.val_pool));
        for (int k = 0; k < opt.val_pool; ++k) {
            auto rng = substream(opt.seed, Stage::SearchPool,
                                 static_cast<std::uint64_t>(k));
            pool.push_back(haar_random_state(rng));
        }
    }
    SearchResult best;
    best.criterion = opt.criterion;
    bool have_best = false;
    for (int i = 0; i < opt.budget; ++i) {
        auto rng = substream(opt.seed, Stage::Candidate,
                             static_cast<std::uint64_t>(i));
        WalkConfig cand = random_config(rng, opt.bounds);
        double score = 0.0;
        if (opt.criterion == SearchCriterion::SigmaMin) {
            const auto diag = frame_rank(effective_povm(
                reservoir_map(build_walk(cand), cand.projection)));
            score = diag.singular_values(diag.singular_values.size() - 1);
        } else {
            SearchOptions per_cand = opt;
            per_cand.seed = stream_key(opt.seed, Stage::Candidate,
                                       static_cast<std::uint64_t>(i), 0x5eed);
            score = detail::validation_mse(cand, per_cand, pool);
        }
        const bool better =
            !have_best ||
            (opt.criterion == SearchCriterion::SigmaMin ? score > best.score
                                                        : score < best.score);
        if (better) {
            best.config = std::move(cand);
            best.score = score;
            have_best = true;
        }
    }
    best.evaluated = opt.budget;
    return best;
}

} // namespace qelm
