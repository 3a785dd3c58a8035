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
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qelm/config.hpp"
#include "qelm/estimator.hpp"
#include "qelm/harness.hpp"
#include "qelm/version.hpp"

namespace qelm {

using Json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

/// Loads a config from either the flat text format or a run manifest
/// (JSON with a "config" object), selected by content.
inline KeyValues load_config_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        Json manifest = Json::parse(text, nullptr, false);
        if (manifest.is_discarded() || !manifest.contains("config") ||
            !manifest["config"].is_object()) {
            throw ConfigError("config: '" + path.string() +
                              "' is not a manifest with a config object");
        }
        KeyValues kv;
        for (const auto& [k, v] : manifest["config"].items()) {
            kv[k] = v.get<std::string>();
        }
        return kv;
    }
    return parse_config_text(text);
}

// --- sweep output files ---

inline std::string summary_csv(const SweepResults& r) {
    std::string out = "n_train,observable,median_mse,q1,q3,std\n";
    for (const auto& cell : r.summary) {
        out += std::to_string(cell.n_train) + "," + cell.observable + "," +
               format_double(cell.median_mse) + "," + format_double(cell.q1) +
               "," + format_double(cell.q3) + "," +
               format_double(cell.stddev) + "\n";
    }
    return out;
}

inline std::string repetitions_csv(const SweepResults& r) {
    std::string out = "rep,n_train,observable,mse\n";
    for (int rep = 0; rep < r.repetitions; ++rep) {
        for (std::size_t g = 0; g < r.n_train_grid.size(); ++g) {
            for (std::size_t m = 0; m < r.observable_names.size(); ++m) {
                out += std::to_string(rep) + "," +
                       std::to_string(r.n_train_grid[g]) + "," +
                       r.observable_names[m] + "," +
                       format_double(r.mse_at(rep, static_cast<int>(g),
                                              static_cast<int>(m))) +
                       "\n";
            }
        }
    }
    return out;
}

// --- estimator weights ---

inline Json weights_to_json(const EstimatorWeights& w) {
    Json j;
    j["mode"] = to_string(w.mode);
    j["intercept"] = w.intercept;
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < w.w.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(w.w.cols()));
        for (Eigen::Index c = 0; c < w.w.cols(); ++c) {
            row[static_cast<std::size_t>(c)] = w.w(i, c);
        }
        rows.push_back(std::move(row));
    }
    j["matrix"] = rows;
    j["singular_values"] = std::vector<double>(
        w.singular_values.data(),
        w.singular_values.data() + w.singular_values.size());
    return j;
}

inline EstimatorWeights weights_from_json(const Json& j) {
    EstimatorWeights w;
    w.mode = parse_features(j.at("mode").get<std::string>(), "weights.mode");
    w.intercept = j.at("intercept").get<bool>();
    const auto& rows = j.at("matrix");
    if (!rows.is_array() || rows.empty()) {
        throw ConfigError("weights: matrix must be a non-empty array");
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(rows[0].size());
    w.w.resize(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != d) {
            throw ConfigError("weights: ragged matrix");
        }
        for (Eigen::Index c = 0; c < d; ++c) {
            w.w(i, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    if (j.contains("singular_values")) {
        const auto sv = j["singular_values"].get<std::vector<double>>();
        w.singular_values =
            Eigen::Map<const Eigen::VectorXd>(sv.data(),
                                              static_cast<Eigen::Index>(
                                                  sv.size()));
    }
    return w;
}

// --- feature/target table for the train subcommand ---

/// CSV with a header line: columns whose name starts with 'f' are features
/// (in order of appearance), columns starting with 't' are targets.
inline TrainingSet read_training_csv(const std::filesystem::path& path) {
    std::stringstream ss(read_text_file(path));
    std::string line;
    if (!std::getline(ss, line)) {
        throw ConfigError("training csv: empty file");
    }
    std::vector<int> kind; // 0 feature, 1 target
    {
        std::stringstream header(line);
        std::string col;
        while (std::getline(header, col, ',')) {
            col = detail::trim(col);
            if (col.rfind('f', 0) == 0) {
                kind.push_back(0);
            } else if (col.rfind('t', 0) == 0) {
                kind.push_back(1);
            } else {
                throw ConfigError(
                    "training csv: column names must start with f or t");
            }
        }
    }
    const long d = std::count(kind.begin(), kind.end(), 0);
    const long m = std::count(kind.begin(), kind.end(), 1);
    if (d == 0 || m == 0) {
        throw ConfigError(
            "training csv: need at least one feature and one target column");
    }
    std::vector<double> fdata;
    std::vector<double> tdata;
    long rows = 0;
    while (std::getline(ss, line)) {
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            if (col >= kind.size()) {
                throw ConfigError("training csv: too many columns in a row");
            }
            const double v = parse_double(cell, "training csv cell");
            (kind[col] == 0 ? fdata : tdata).push_back(v);
            ++col;
        }
        if (col != kind.size()) {
            throw ConfigError("training csv: short row");
        }
        ++rows;
    }
    if (rows == 0) {
        throw ConfigError("training csv: no data rows");
    }
    TrainingSet ts;
    ts.features.resize(rows, d);
    ts.targets.resize(rows, m);
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < d; ++c) {
            ts.features(r, c) = fdata[static_cast<std::size_t>(r * d + c)];
        }
        for (long c = 0; c < m; ++c) {
            ts.targets(r, c) = tdata[static_cast<std::size_t>(r * m + c)];
        }
    }
    return ts;
}

// --- run manifest ---

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// The manifest fully determines the run: re-feeding it through --config
/// reproduces every output byte for byte (timestamps aside).
inline Json make_manifest(const std::string& subcommand,
                          std::uint64_t master_seed, const KeyValues& echo,
                          const std::vector<std::pair<std::string,
                                                      std::string>>& outputs) {
    Json j;
    j["artifact"] = "qelm";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["created_utc"] = utc_timestamp();
    j["master_seed"] = master_seed;
    j["state_pool"] = "haar-uniform";
    Json cfg = Json::object();
    for (const auto& [k, v] : echo) {
        cfg[k] = v;
    }
    j["config"] = cfg;
    Json outs = Json::object();
    for (const auto& [role, file] : outputs) {
        outs[role] = file;
    }
    j["outputs"] = outs;
    return j;
}

} // namespace qelm
