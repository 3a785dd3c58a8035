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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qelm/config.hpp"
#include "qelm/harness.hpp"
#include "qelm/io.hpp"

namespace qelm {

namespace cli_detail {

inline std::string format_complex(const Complex& z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.6g%+.6gi", z.real(), z.imag());
    return buf;
}

struct FlagValues {
    std::string config_path;
    std::string out_dir;
    std::string seed, shots, reps, ntrain, sampling, features, intercept,
        criterion, budget, fixed_records;
    int threads = 0;
};

/// CLI flags override config-file keys; only flags the user actually passed
/// are applied.
inline KeyValues flag_overrides(const CLI::App& cmd, const FlagValues& f) {
    KeyValues kv;
    const auto set = [&](const char* flag, const char* key,
                         const std::string& value) {
        if (cmd.count(flag) > 0) {
            kv[key] = value;
        }
    };
    set("--seed", "sweep.seed", f.seed);
    set("--shots", "sweep.shots", f.shots);
    set("--reps", "sweep.reps", f.reps);
    set("--ntrain", "sweep.ntrain", f.ntrain);
    set("--sampling", "sweep.sampling", f.sampling);
    set("--features", "sweep.features", f.features);
    set("--intercept", "sweep.intercept", f.intercept);
    set("--fixed-records", "sweep.fixed_records", f.fixed_records);
    set("--criterion", "optimize.criterion", f.criterion);
    set("--budget", "optimize.budget", f.budget);
    return kv;
}

inline void add_common_flags(CLI::App* cmd, FlagValues& f) {
    cmd->add_option("--config", f.config_path,
                    "config file (flat key = value, or a run manifest)");
    cmd->add_option("--seed", f.seed, "master seed (unsigned integer)");
    cmd->add_option("--shots", f.shots, "mean photon counts per state, or 'inf'");
    cmd->add_option("--reps", f.reps, "number of repetitions");
    cmd->add_option("--ntrain", f.ntrain,
                    "training-set sizes, e.g. 2,5,10:10:50");
    cmd->add_option("--sampling", f.sampling, "poisson | multinomial | exact");
    cmd->add_option("--features", f.features, "raw | conditional");
    cmd->add_option("--intercept", f.intercept, "on | off");
    cmd->add_option("--fixed-records", f.fixed_records,
                    "on | off (reuse one count record per state)");
    cmd->add_option("--criterion", f.criterion, "sigma_min | val_mse");
    cmd->add_option("--budget", f.budget, "search budget");
    cmd->add_option("--threads", f.threads,
                    "worker cap (does not affect results)");
}

inline ResolvedConfig resolve_from(const CLI::App& cmd, const FlagValues& f) {
    KeyValues file;
    if (!f.config_path.empty()) {
        file = load_config_file(f.config_path);
    }
    return resolve_config(merge_config(file, flag_overrides(cmd, f)));
}

inline std::filesystem::path ensure_out_dir(const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline int cmd_povm_info(const CLI::App& cmd, const FlagValues& f) {
    const ResolvedConfig rc = resolve_from(cmd, f);
    const WalkConfig& walk = rc.experiment.walk;
    const ReservoirMap map = reservoir_map(build_walk(walk), walk.projection);
    const EffectivePOVM povm = effective_povm(map);
    const FrameDiagnostics diag = frame_rank(povm);

    std::cout << "steps: " << walk.steps.size()
              << ", oam cutoff: " << walk.space.cutoff()
              << ", outcomes: " << povm.elements.size() << "\n";
    std::cout << "frame rank: " << diag.rank << "\n";
    std::cout << "frame singular values:";
    for (Eigen::Index i = 0; i < diag.singular_values.size(); ++i) {
        std::cout << " " << format_double(diag.singular_values(i));
    }
    std::cout << "\n";
    const int cutoff = walk.space.cutoff();
    Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
    char line[256];
    for (std::size_t b = 0; b < povm.elements.size(); ++b) {
        const auto& el = povm.elements[b];
        sum += el;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(el);
        std::snprintf(line, sizeof line,
                      "mu[n=%+d] = [ %s  %s ; %s  %s ]  trace=%.6g  min_eig=%.3g",
                      static_cast<int>(b) - cutoff,
                      format_complex(el(0, 0)).c_str(),
                      format_complex(el(0, 1)).c_str(),
                      format_complex(el(1, 0)).c_str(),
                      format_complex(el(1, 1)).c_str(), el.trace().real(),
                      es.eigenvalues().minCoeff());
        std::cout << line << "\n";
    }
    const Eigen::Matrix2cd gram = map.a.adjoint() * map.a;
    std::snprintf(line, sizeof line, "|sum(mu) - A^dag A|_max = %.3g",
                  (sum - gram).cwiseAbs().maxCoeff());
    std::cout << line << "\n";

    if (cmd.count("--out") > 0) {
        const auto dir = ensure_out_dir(f.out_dir);
        Json j;
        j["frame_rank"] = diag.rank;
        j["singular_values"] = std::vector<double>(
            diag.singular_values.data(),
            diag.singular_values.data() + diag.singular_values.size());
        Json els = Json::array();
        for (const auto& el : povm.elements) {
            els.push_back({{"re", {{el(0, 0).real(), el(0, 1).real()},
                                   {el(1, 0).real(), el(1, 1).real()}}},
                           {"im", {{el(0, 0).imag(), el(0, 1).imag()},
                                   {el(1, 0).imag(), el(1, 1).imag()}}}});
        }
        j["elements"] = els;
        write_text_file(dir / "povm.json", j.dump(2) + "\n");
        const Json manifest = make_manifest(
            "povm-info", rc.experiment.master_seed, rc.echo,
            {{"povm", "povm.json"}});
        write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
        std::cout << "wrote " << (dir / "povm.json").string() << "\n";
    }
    return 0;
}

inline int cmd_sweep(const CLI::App& cmd, const FlagValues& f) {
    const ResolvedConfig rc = resolve_from(cmd, f);
    const SweepResults results = run_sweep(rc.experiment, f.threads);
    if (results.dropped_records > 0) {
        std::cerr << "warning: dropped " << results.dropped_records
                  << " degenerate conditional records\n";
    }
    const auto dir = ensure_out_dir(f.out_dir);
    write_text_file(dir / "summary.csv", summary_csv(results));
    write_text_file(dir / "repetitions.csv", repetitions_csv(results));
    const Json manifest = make_manifest(
        "sweep", rc.experiment.master_seed, rc.echo,
        {{"summary", "summary.csv"}, {"repetitions", "repetitions.csv"}});
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << (dir / "summary.csv").string() << ", "
              << (dir / "repetitions.csv").string() << ", "
              << (dir / "manifest.json").string() << "\n";
    // quick readout: the largest training size per observable
    const int last = results.n_train_grid.back();
    for (const auto& cell : results.summary) {
        if (cell.n_train == last) {
            std::cout << "median mse @ n_train=" << last << " ["
                      << cell.observable
                      << "]: " << format_double(cell.median_mse) << "\n";
        }
    }
    return 0;
}

inline int cmd_optimize(const CLI::App& cmd, const FlagValues& f) {
    const ResolvedConfig rc = resolve_from(cmd, f);
    const SearchResult res = optimize_config(rc.search);
    KeyValues out_keys = rc.echo;
    for (auto it = out_keys.begin(); it != out_keys.end();) {
        it = it->first.rfind("walk.", 0) == 0 ? out_keys.erase(it)
                                              : std::next(it);
    }
    for (const auto& [k, v] : walk_to_keys(res.config)) {
        out_keys[k] = v;
    }
    const auto dir = ensure_out_dir(f.out_dir);
    write_text_file(dir / "optimized.cfg", config_to_text(out_keys));
    const Json manifest =
        make_manifest("optimize", rc.experiment.master_seed, rc.echo,
                      {{"optimized_config", "optimized.cfg"}});
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "criterion: " << to_string(res.criterion)
              << ", evaluated: " << res.evaluated
              << ", score: " << format_double(res.score) << "\n";
    std::cout << "wrote " << (dir / "optimized.cfg").string() << "\n";
    return 0;
}

inline int cmd_simulate(const CLI::App& cmd, const FlagValues& f,
                        const std::string& zeta, const std::string& theta,
                        bool haar, const std::string& weights_path) {
    const ResolvedConfig rc = resolve_from(cmd, f);
    const ExperimentConfig& exp = rc.experiment;

    PolarizationState psi;
    if (haar) {
        auto rng = substream(exp.master_seed, Stage::Single, 0);
        psi = haar_random_state(rng);
    } else {
        psi = input_state({parse_angle(zeta.empty() ? "0" : zeta, "--zeta"),
                           parse_angle(theta.empty() ? "0" : theta,
                                       "--theta")});
    }
    const DensityMatrix rho = density(psi);
    const EffectivePOVM povm = effective_povm(
        reservoir_map(build_walk(exp.walk), exp.walk.projection));
    const Eigen::VectorXd probs = probabilities(povm, rho);

    const bool exact = (exp.sampling == SamplingMode::Exact) ||
                       std::isinf(exp.shots);
    const FeatureMode mode = exact ? FeatureMode::Exact : exp.feature_mode;

    Json j;
    j["input"] = {{"amp_l", {psi.amp_l.real(), psi.amp_l.imag()}},
                  {"amp_r", {psi.amp_r.real(), psi.amp_r.imag()}}};
    Json truth = Json::object();
    for (const auto& obs : exp.observables) {
        truth[observable_name(obs)] = expectation(obs, rho);
    }
    j["truth"] = truth;
    j["probabilities"] =
        std::vector<double>(probs.data(), probs.data() + probs.size());

    FeatureVector feat;
    if (exact) {
        feat = exact_features(probs, exp.intercept);
        j["counts"] = nullptr;
    } else {
        auto rng = substream(exp.master_seed, Stage::Single, 1);
        const CountVector counts =
            sample_counts(probs, exp.shots, exp.sampling, rng);
        feat = features(counts, mode, exp.intercept);
        j["counts"] = counts.counts;
    }
    j["features"] = {{"mode", to_string(mode)},
                     {"intercept", feat.intercept},
                     {"values", std::vector<double>(
                                    feat.values.data(),
                                    feat.values.data() + feat.values.size())}};

    EstimatorWeights w;
    if (!weights_path.empty()) {
        w = weights_from_json(Json::parse(read_text_file(weights_path)));
        j["weights_source"] = "file";
    } else {
        // The dual-frame weights are linear functionals on outcome rates, so
        // they apply unchanged to any feature mode; a zero intercept
        // coefficient is appended when needed.
        const IdealWeights ideal = ideal_weights(povm, exp.observables);
        w = ideal.weights;
        w.mode = mode;
        if (exp.intercept) {
            Eigen::MatrixXd wz(w.w.rows(), w.w.cols() + 1);
            wz << w.w, Eigen::VectorXd::Zero(w.w.rows());
            w.w = wz;
            w.intercept = true;
        }
        j["weights_source"] = "ideal-dual-frame";
    }
    const Eigen::VectorXd pred = predict(w, feat);
    Json prediction = Json::object();
    for (std::size_t m = 0; m < exp.observables.size() &&
                            m < static_cast<std::size_t>(pred.size());
         ++m) {
        prediction[observable_name(exp.observables[m])] =
            pred(static_cast<Eigen::Index>(m));
    }
    j["prediction"] = prediction;

    std::cout << j.dump(2) << "\n";
    if (cmd.count("--out") > 0) {
        const auto dir = ensure_out_dir(f.out_dir);
        write_text_file(dir / "simulate.json", j.dump(2) + "\n");
        const Json manifest =
            make_manifest("simulate", exp.master_seed, rc.echo,
                          {{"simulate", "simulate.json"}});
        write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    }
    return 0;
}

inline int cmd_train(const CLI::App& cmd, const FlagValues& f,
                     const std::string& data_path) {
    const ResolvedConfig rc = resolve_from(cmd, f);
    const ExperimentConfig& exp = rc.experiment;
    TrainingSet ts = read_training_csv(data_path);
    if (exp.intercept) {
        Eigen::MatrixXd with_one(ts.features.rows(), ts.features.cols() + 1);
        with_one << ts.features,
            Eigen::VectorXd::Ones(ts.features.rows());
        ts.features = with_one;
    }
    const FeatureMode mode = exp.feature_mode;
    const EstimatorWeights w =
        train(ts, mode, exp.intercept, exp.rcond, exp.ridge);
    const auto dir = ensure_out_dir(f.out_dir);
    write_text_file(dir / "weights.json", weights_to_json(w).dump(2) + "\n");
    const Json manifest = make_manifest("train", exp.master_seed, rc.echo,
                                        {{"weights", "weights.json"}});
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "trained " << w.w.rows() << " x " << w.w.cols()
              << " readout from " << ts.features.rows() << " rows; wrote "
              << (dir / "weights.json").string() << "\n";
    return 0;
}

} // namespace cli_detail

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name. Returns the process exit status; on failure prints a single
/// `error: ...` line to stderr and emits no partial output files.
inline int run_cli(const std::vector<std::string>& args) {
    using namespace cli_detail;
    CLI::App app{"coined-quantum-walk extreme learning machine toolkit"};
    app.require_subcommand(1);

    FlagValues f;
    f.out_dir = "qelm-run";

    CLI::App* povm = app.add_subcommand(
        "povm-info", "print the effective measurement and its frame rank");
    CLI::App* sweep = app.add_subcommand(
        "sweep", "run the full training sweep and emit CSV + manifest");
    CLI::App* optimize = app.add_subcommand(
        "optimize", "random search over coin angles and projection");
    CLI::App* simulate = app.add_subcommand(
        "simulate", "single state end-to-end: probabilities, counts, readout");
    CLI::App* train_cmd = app.add_subcommand(
        "train", "fit readout weights from a feature/target csv");

    std::string zeta, theta, weights_path, data_path;
    bool haar = false;
    for (CLI::App* cmd : {povm, sweep, optimize, simulate, train_cmd}) {
        add_common_flags(cmd, f);
        cmd->add_option("--out", f.out_dir, "output directory");
    }
    simulate->add_option("--zeta", zeta, "preparation HWP angle (e.g. '22.5 deg')");
    simulate->add_option("--theta", theta, "preparation QWP angle");
    simulate->add_flag("--haar", haar, "draw a Haar-random input state");
    simulate->add_option("--weights", weights_path, "readout weights json");
    train_cmd->add_option("--data", data_path, "feature/target csv")
        ->required();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("qelm");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()),
                  const_cast<char**>(argv.data()));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (povm->parsed()) {
            return cmd_povm_info(*povm, f);
        }
        if (sweep->parsed()) {
            return cmd_sweep(*sweep, f);
        }
        if (optimize->parsed()) {
            return cmd_optimize(*optimize, f);
        }
        if (simulate->parsed()) {
            return cmd_simulate(*simulate, f, zeta, theta, haar,
                                weights_path);
        }
        if (train_cmd->parsed()) {
            return cmd_train(*train_cmd, f, data_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}

} // namespace qelm
