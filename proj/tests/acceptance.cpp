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

// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "qelm/cli.hpp"
#include "qelm/harness.hpp"
#include "qelm/io.hpp"

using namespace qelm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

WalkConfig generic_two_step_walk() {
    return two_step_walk({0.3, 0.5, 1.1}, input_state({0.35, 0.8}));
}

double summary_median(const SweepResults& r, int n_train,
                      const std::string& obs) {
    for (const auto& cell : r.summary) {
        if (cell.n_train == n_train && cell.observable == obs) {
            return cell.median_mse;
        }
    }
    throw std::logic_error("summary cell not found");
}

// 1. Infinite statistics: a rank-4 configuration recovers every Pauli to
//    numerical zero once five training states are available.
bool criterion_exact_recovery(std::string& detail) {
    const auto start = Clock::now();
    ExperimentConfig cfg;
    cfg.walk = generic_two_step_walk();
    cfg.n_train_grid = {2, 5, 10, 20, 50, 100};
    cfg.repetitions = 50;
    cfg.shots = std::numeric_limits<double>::infinity();
    cfg.master_seed = 1001;
    const auto povm = effective_povm(
        reservoir_map(build_walk(cfg.walk), cfg.walk.projection));
    if (frame_rank(povm).rank != 4) {
        detail = "default configuration is not rank 4";
        return false;
    }
    const auto res = run_sweep(cfg, 2);
    double worst = 0.0;
    for (const auto& cell : res.summary) {
        if (cell.n_train >= 5) {
            worst = std::max(worst, cell.median_mse);
        }
    }
    const double elapsed = seconds_since(start);
    std::ostringstream ss;
    ss << "worst median mse " << format_double(worst) << " (limit 1e-18), "
       << elapsed << " s (limit 10)";
    detail = ss.str();
    return worst < 1e-18 && elapsed < 10.0;
}

// 2. Plateau medians must drop strictly with the flux, and the 1e2 -> 1e4
//    ratio must sit in [30, 300] (raw-rate feature noise scales as 1/shots).
bool criterion_shot_noise_ordering(std::string& detail) {
    const auto start = Clock::now();
    ExperimentConfig cfg;
    cfg.walk = generic_two_step_walk();
    cfg.n_train_grid = {100};
    cfg.repetitions = 100;
    cfg.master_seed = 1002;

    std::map<double, SweepResults> runs;
    for (const double shots : {1e2, 1e3, 1e4}) {
        cfg.shots = shots;
        runs.emplace(shots, run_sweep(cfg, 2));
    }
    bool ok = true;
    std::ostringstream ss;
    for (const auto& obs : {"sx", "sy", "sz"}) {
        const double m2 = summary_median(runs.at(1e2), 100, obs);
        const double m3 = summary_median(runs.at(1e3), 100, obs);
        const double m4 = summary_median(runs.at(1e4), 100, obs);
        const double ratio = m2 / m4;
        ok = ok && m2 > m3 && m3 > m4 && ratio >= 30.0 && ratio <= 300.0;
        ss << obs << " ratio " << std::round(ratio) << "; ";
    }
    const double elapsed = seconds_since(start);
    ss << elapsed << " s (limit 300)";
    detail = ss.str();
    return ok && elapsed < 300.0;
}

// 3. At 1e4 shots the curve improves at least 2x from 5 to 100 training
//    states, and already improves from 2 to 5.
bool criterion_training_curve(std::string& detail) {
    ExperimentConfig cfg;
    cfg.walk = generic_two_step_walk();
    cfg.n_train_grid = {2, 5, 100};
    cfg.repetitions = 100;
    cfg.shots = 1e4;
    cfg.master_seed = 1003;
    const auto res = run_sweep(cfg, 2);
    bool ok = true;
    std::ostringstream ss;
    for (const auto& obs : {"sx", "sy", "sz"}) {
        const double at2 = summary_median(res, 2, obs);
        const double at5 = summary_median(res, 5, obs);
        const double at100 = summary_median(res, 100, obs);
        ok = ok && at5 < at2 && at100 * 2.0 <= at5;
        ss << obs << ": " << format_double(at2) << " -> "
           << format_double(at5) << " -> " << format_double(at100) << "; ";
    }
    detail = ss.str();
    return ok;
}

// 4. A configuration optimized for validation MSE and a generic random
//    rank-4 configuration plateau within one order of magnitude. Individual
//    random draws vary widely (near-degenerate frames still count as rank 4
//    at the 1e-10 threshold), so the generic representative is the median of
//    a small ensemble of rank-4 draws, and the compared quantity is the
//    plateau median averaged over the three Paulis.
bool criterion_optimized_vs_random(std::string& detail) {
    SearchOptions opt;
    opt.budget = 500;
    opt.criterion = SearchCriterion::ValMse;
    opt.seed = 1004;
    opt.shots = 1e4;
    const SearchResult best = optimize_config(opt);

    ExperimentConfig cfg;
    cfg.n_train_grid = {100};
    cfg.repetitions = 100;
    cfg.shots = 1e4;
    cfg.master_seed = 1005;

    const auto plateau = [&](const WalkConfig& walk) {
        cfg.walk = walk;
        const auto res = run_sweep(cfg, 2);
        double mean = 0.0;
        for (const auto& o : {"sx", "sy", "sz"}) {
            mean += summary_median(res, 100, o) / 3.0;
        }
        return mean;
    };

    const double opt_plateau = plateau(best.config);

    std::vector<double> rand_plateaus;
    for (std::uint64_t e = 0; e < 5; ++e) {
        WalkConfig rw;
        for (std::uint64_t i = 0;; ++i) {
            auto rng = substream(9100 + e, Stage::Candidate, i);
            rw = random_config(rng);
            if (frame_rank(effective_povm(reservoir_map(
                               build_walk(rw), rw.projection)))
                    .rank == 4) {
                break;
            }
        }
        rand_plateaus.push_back(plateau(rw));
    }
    const double rand_plateau = median(rand_plateaus);

    const double ratio = std::max(opt_plateau / rand_plateau,
                                  rand_plateau / opt_plateau);
    std::ostringstream ss;
    ss << "optimized " << format_double(opt_plateau) << ", generic random "
       << format_double(rand_plateau) << ", ratio x"
       << std::round(ratio * 100) / 100 << " (limit x10)";
    detail = ss.str();
    return ratio <= 10.0;
}

// 5. Structural suite over 1000 random configurations, probabilities checked
//    against the ket-by-ket brute-force oracle.
bool criterion_povm_structure(std::string& detail) {
    double worst_unitarity = 0.0;
    double worst_eig = 0.0;
    double worst_sum = 0.0;
    double worst_prob = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto rng = substream(1006, Stage::Candidate,
                             static_cast<std::uint64_t>(i));
        const WalkConfig cfg = random_config(rng);
        const Eigen::Matrix2cd coin = coin_operator(*cfg.steps[1].coin);
        worst_unitarity = std::max(
            worst_unitarity,
            (coin.adjoint() * coin - Eigen::Matrix2cd::Identity())
                .cwiseAbs()
                .maxCoeff());
        const auto map = reservoir_map(build_walk(cfg), cfg.projection);
        const auto povm = effective_povm(map);
        Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
        for (const auto& el : povm.elements) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(el);
            worst_eig = std::max(worst_eig, -es.eigenvalues().minCoeff());
            sum += el;
        }
        worst_sum = std::max(
            worst_sum,
            (sum - map.a.adjoint() * map.a).cwiseAbs().maxCoeff());
        auto state_rng = substream(1007, Stage::Single,
                                   static_cast<std::uint64_t>(i));
        for (int k = 0; k < 100; ++k) {
            const auto psi = haar_random_state(state_rng);
            const Eigen::VectorXd p = probabilities(povm, density(psi));
            const Eigen::VectorXd ref = oracle::probabilities(cfg, psi);
            worst_prob =
                std::max(worst_prob, (p - ref).cwiseAbs().maxCoeff());
        }
    }
    std::ostringstream ss;
    ss << "unitarity " << format_double(worst_unitarity) << ", min-eig "
       << format_double(worst_eig) << ", sum rule "
       << format_double(worst_sum) << ", oracle gap "
       << format_double(worst_prob) << " (limits 1e-12)";
    detail = ss.str();
    return worst_unitarity < 1e-12 && worst_eig < 1e-12 &&
           worst_sum < 1e-12 && worst_prob < 1e-12;
}

// 6. Trained readout vs analytic dual-frame readout on unseen states.
bool criterion_estimator_oracle(std::string& detail) {
    const WalkConfig walk = generic_two_step_walk();
    const auto povm =
        effective_povm(reservoir_map(build_walk(walk), walk.projection));
    const auto obs = default_observables();
    const auto ideal = ideal_weights(povm, obs);

    TrainingSet ts;
    const int n_train = 20;
    ts.features.resize(n_train, 5);
    ts.targets.resize(n_train, 3);
    for (int k = 0; k < n_train; ++k) {
        auto rng = substream(1008, Stage::Pool, static_cast<std::uint64_t>(k));
        const auto rho = density(haar_random_state(rng));
        ts.features.row(k) = probabilities(povm, rho).transpose();
        for (int j = 0; j < 3; ++j) {
            ts.targets(k, j) =
                expectation(obs[static_cast<std::size_t>(j)], rho);
        }
    }
    const auto trained = train(ts, FeatureMode::Exact, false);

    double worst = 0.0;
    Xoshiro256 rng(1009);
    for (int i = 0; i < 100; ++i) {
        const auto rho = density(haar_random_state(rng));
        const auto f = exact_features(probabilities(povm, rho), false);
        worst = std::max(worst, (predict(trained, f) -
                                 predict(ideal.weights, f))
                                    .cwiseAbs()
                                    .maxCoeff());
    }
    detail = "max |trained - dual frame| = " + format_double(worst) +
             " (limit 1e-9)";
    return worst < 1e-9;
}

// 7. Identical manifests, different worker counts: byte-identical CSVs.
bool criterion_determinism(std::string& detail) {
    const fs::path tmp =
        fs::temp_directory_path() /
        ("qelm-acceptance-" +
         std::to_string(
             std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(tmp);
    const fs::path cfg_path = tmp / "run.cfg";
    write_text_file(cfg_path, "sweep.pool_size = 120\n"
                              "sweep.test_size = 40\n"
                              "sweep.ntrain = 10,50\n"
                              "sweep.reps = 20\n"
                              "sweep.shots = 1000\n"
                              "sweep.seed = 77\n");
    const fs::path out1 = tmp / "threads1";
    const fs::path out3 = tmp / "threads3";
    const int rc1 = run_cli({"sweep", "--config", cfg_path.string(), "--out",
                             out1.string(), "--threads", "1"});
    const int rc3 = run_cli({"sweep", "--config", cfg_path.string(), "--out",
                             out3.string(), "--threads", "3"});
    bool ok = rc1 == 0 && rc3 == 0;
    std::string why = "exit codes";
    if (ok) {
        const bool same_summary = read_text_file(out1 / "summary.csv") ==
                                  read_text_file(out3 / "summary.csv");
        const bool same_reps = read_text_file(out1 / "repetitions.csv") ==
                               read_text_file(out3 / "repetitions.csv");
        const auto m1 = Json::parse(read_text_file(out1 / "manifest.json"));
        const auto m3 = Json::parse(read_text_file(out3 / "manifest.json"));
        const bool same_config = m1["config"] == m3["config"];
        ok = same_summary && same_reps && same_config;
        why = std::string("summary ") + (same_summary ? "==" : "!=") +
              ", repetitions " + (same_reps ? "==" : "!=") +
              ", manifest config " + (same_config ? "==" : "!=");
    }
    std::error_code ec;
    fs::remove_all(tmp, ec);
    detail = why;
    return ok;
}

struct Criterion {
    const char* name;
    bool (*fn)(std::string&);
};

} // namespace

int main() {
    const Criterion criteria[] = {
        {"exact-recovery", criterion_exact_recovery},
        {"shot-noise-ordering", criterion_shot_noise_ordering},
        {"training-curve-shape", criterion_training_curve},
        {"optimized-vs-random", criterion_optimized_vs_random},
        {"povm-structure-suite", criterion_povm_structure},
        {"estimator-oracle-equivalence", criterion_estimator_oracle},
        {"determinism", criterion_determinism},
    };
    int failures = 0;
    int id = 0;
    for (const auto& c : criteria) {
        ++id;
        std::string detail;
        bool pass = false;
        try {
            pass = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!pass) {
            ++failures;
        }
        std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, c.name,
                    detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/7 acceptance criteria passed\n", 7 - failures);
    return failures == 0 ? 0 : 1;
}
