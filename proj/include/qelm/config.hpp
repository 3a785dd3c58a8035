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

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qelm/errors.hpp"
#include "qelm/harness.hpp"

namespace qelm {

/// Flat key = value configuration, keys namespaced by module
/// (walk.*, sweep.*, optimize.*).
using KeyValues = std::map<std::string, std::string>;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return s.substr(a, b - a);
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace detail

inline double parse_double(const std::string& value, const std::string& key) {
    const std::string v = detail::trim(value);
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) {
        throw ConfigError("config: '" + key + "' is not a number: " + value);
    }
    return out;
}

inline long parse_long(const std::string& value, const std::string& key) {
    const std::string v = detail::trim(value);
    long out = 0;
    const auto [ptr, ec] =
        std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError("config: '" + key + "' is not an integer: " + value);
    }
    return out;
}

inline std::uint64_t parse_u64(const std::string& value,
                               const std::string& key) {
    const std::string v = detail::trim(value);
    std::uint64_t out = 0;
    const auto [ptr, ec] =
        std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError("config: '" + key +
                          "' is not an unsigned integer: " + value);
    }
    return out;
}

/// Angles are radians unless the value carries an explicit `deg` suffix
/// (a `rad` suffix is accepted for symmetry).
inline double parse_angle(const std::string& value, const std::string& key) {
    std::string v = detail::trim(value);
    double scale = 1.0;
    if (detail::has_suffix(v, "deg")) {
        v = detail::trim(v.substr(0, v.size() - 3));
        scale = kPi / 180.0;
    } else if (detail::has_suffix(v, "rad")) {
        v = detail::trim(v.substr(0, v.size() - 3));
    }
    return scale * parse_double(v, key);
}

/// `inf` (or `infinite`) selects exact statistics.
inline double parse_shots(const std::string& value, const std::string& key) {
    const std::string v = detail::trim(value);
    if (v == "inf" || v == "infinite") {
        return std::numeric_limits<double>::infinity();
    }
    const double out = parse_double(v, key);
    if (!(out > 0.0)) {
        throw ConfigError("config: '" + key + "' must be positive or inf");
    }
    return out;
}

inline bool parse_onoff(const std::string& value, const std::string& key) {
    const std::string v = detail::trim(value);
    if (v == "on" || v == "true" || v == "1") {
        return true;
    }
    if (v == "off" || v == "false" || v == "0") {
        return false;
    }
    throw ConfigError("config: '" + key + "' must be on or off: " + value);
}

/// Comma list whose items are integers or ranges `a:b` / `a:step:b`
/// (inclusive), e.g. "2,5,10:10:50".
inline std::vector<int> parse_ntrain(const std::string& value,
                                     const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) {
            continue;
        }
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
            out.push_back(static_cast<int>(parse_long(item, key)));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        const long a = parse_long(item.substr(0, c1), key);
        long step = 1;
        long b = 0;
        if (c2 == std::string::npos) {
            b = parse_long(item.substr(c1 + 1), key);
        } else {
            step = parse_long(item.substr(c1 + 1, c2 - c1 - 1), key);
            b = parse_long(item.substr(c2 + 1), key);
        }
        if (step < 1 || b < a) {
            throw ConfigError("config: bad range in '" + key + "': " + item);
        }
        for (long n = a; n <= b; n += step) {
            out.push_back(static_cast<int>(n));
        }
    }
    if (out.empty()) {
        throw ConfigError("config: '" + key + "' is empty");
    }
    return out;
}

inline SamplingMode parse_sampling(const std::string& value,
                                   const std::string& key) {
    const std::string v = detail::trim(value);
    if (v == "poisson") {
        return SamplingMode::Poisson;
    }
    if (v == "multinomial") {
        return SamplingMode::Multinomial;
    }
    if (v == "exact") {
        return SamplingMode::Exact;
    }
    throw ConfigError("config: '" + key +
                      "' must be poisson, multinomial or exact: " + value);
}

inline FeatureMode parse_features(const std::string& value,
                                  const std::string& key) {
    const std::string v = detail::trim(value);
    if (v == "raw") {
        return FeatureMode::RawRate;
    }
    if (v == "conditional") {
        return FeatureMode::Conditional;
    }
    if (v == "exact") {
        return FeatureMode::Exact;
    }
    throw ConfigError("config: '" + key +
                      "' must be raw, conditional or exact: " + value);
}

inline SearchCriterion parse_criterion(const std::string& value,
                                       const std::string& key) {
    const std::string v = detail::trim(value);
    if (v == "sigma_min") {
        return SearchCriterion::SigmaMin;
    }
    if (v == "val_mse") {
        return SearchCriterion::ValMse;
    }
    throw ConfigError("config: '" + key +
                      "' must be sigma_min or val_mse: " + value);
}

inline std::string to_string(SamplingMode m) {
    switch (m) {
    case SamplingMode::Poisson:
        return "poisson";
    case SamplingMode::Multinomial:
        return "multinomial";
    default:
        return "exact";
    }
}

inline std::string to_string(FeatureMode m) {
    switch (m) {
    case FeatureMode::RawRate:
        return "raw";
    case FeatureMode::Conditional:
        return "conditional";
    default:
        return "exact";
    }
}

inline std::string to_string(SearchCriterion c) {
    return c == SearchCriterion::SigmaMin ? "sigma_min" : "val_mse";
}

/// Parses `key = value` lines; '#' starts a comment, blank lines are
/// skipped, duplicate keys are rejected.
inline KeyValues parse_config_text(const std::string& text) {
    KeyValues out;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config: empty key on line " +
                              std::to_string(lineno));
        }
        if (!out.emplace(key, value).second) {
            throw ConfigError("config: duplicate key '" + key + "'");
        }
    }
    return out;
}

/// Defaults: the two-step walk with its fixed q-plates, a generic coin and
/// projection (chosen to give an informationally complete frame), and the
/// headline sweep settings.
inline KeyValues default_config() {
    KeyValues kv;
    kv["walk.steps"] = "2";
    kv["walk.cutoff"] = "2";
    kv["walk.step1.qplate.alpha"] = "105 deg";
    kv["walk.step1.qplate.delta"] = "90 deg";
    kv["walk.step2.coin.zeta"] = "0.3";
    kv["walk.step2.coin.theta"] = "0.5";
    kv["walk.step2.coin.phi"] = "1.1";
    kv["walk.step2.qplate.alpha"] = "336 deg";
    kv["walk.step2.qplate.delta"] = "180 deg";
    kv["walk.projection.zeta"] = "0.35";
    kv["walk.projection.theta"] = "0.8";
    kv["sweep.pool_size"] = "450";
    kv["sweep.test_size"] = "150";
    kv["sweep.ntrain"] = "2,3,4,5,7,10,15,20,30,50,70,100";
    kv["sweep.reps"] = "500";
    kv["sweep.shots"] = "10000";
    kv["sweep.sampling"] = "poisson";
    kv["sweep.features"] = "raw";
    kv["sweep.intercept"] = "on";
    kv["sweep.fixed_records"] = "off";
    kv["sweep.seed"] = "1";
    kv["sweep.rcond"] = "1e-10";
    kv["sweep.ridge"] = "0";
    kv["optimize.budget"] = "500";
    kv["optimize.criterion"] = "sigma_min";
    kv["optimize.val_pool"] = "80";
    kv["optimize.val_train"] = "40";
    kv["optimize.val_test"] = "30";
    kv["optimize.val_reps"] = "5";
    return kv;
}

/// Layered merge: defaults, then file keys, then flag overrides. A config
/// that touches any walk.* key replaces the default walk section entirely.
inline KeyValues merge_config(const KeyValues& file, const KeyValues& flags) {
    KeyValues out = default_config();
    bool user_walk = false;
    for (const auto* layer : {&file, &flags}) {
        for (const auto& [k, v] : *layer) {
            if (k.rfind("walk.", 0) == 0) {
                user_walk = true;
            }
        }
    }
    if (user_walk) {
        for (auto it = out.begin(); it != out.end();) {
            it = it->first.rfind("walk.", 0) == 0 ? out.erase(it)
                                                  : std::next(it);
        }
    }
    for (const auto* layer : {&file, &flags}) {
        for (const auto& [k, v] : *layer) {
            out[k] = v;
        }
    }
    return out;
}

/// Everything a run needs, plus the normalized key/value echo (all defaults
/// materialized, angles in radians) that goes into the run manifest.
struct ResolvedConfig {
    ExperimentConfig experiment;
    SearchOptions search;
    KeyValues echo;
};

inline ResolvedConfig resolve_config(const KeyValues& merged) {
    std::set<std::string> seen;
    const auto take = [&](const std::string& key) -> const std::string* {
        const auto it = merged.find(key);
        if (it == merged.end()) {
            return nullptr;
        }
        seen.insert(key);
        return &it->second;
    };
    const auto require = [&](const std::string& key) -> const std::string& {
        const auto* v = take(key);
        if (v == nullptr) {
            throw ConfigError("config: missing key '" + key + "'");
        }
        return *v;
    };

    ResolvedConfig out;
    KeyValues& echo = out.echo;

    // --- walk section ---
    const long steps = parse_long(require("walk.steps"), "walk.steps");
    if (steps < 0 || steps > 64) {
        throw ConfigError("config: walk.steps out of range");
    }
    long cutoff = steps;
    if (const auto* v = take("walk.cutoff")) {
        cutoff = parse_long(*v, "walk.cutoff");
        if (cutoff < 0) {
            throw ConfigError("config: walk.cutoff must be >= 0");
        }
    }
    echo["walk.steps"] = std::to_string(steps);
    echo["walk.cutoff"] = std::to_string(cutoff);

    WalkConfig walk;
    walk.space = OAMSpace(static_cast<int>(cutoff));
    for (long k = 1; k <= steps; ++k) {
        const std::string base = "walk.step" + std::to_string(k) + ".";
        WalkStep step;
        const auto* cz = take(base + "coin.zeta");
        const auto* ct = take(base + "coin.theta");
        const auto* cp = take(base + "coin.phi");
        const int coin_keys = (cz != nullptr) + (ct != nullptr) +
                              (cp != nullptr);
        if (coin_keys == 3) {
            step.coin = CoinParams{
                parse_angle(*cz, base + "coin.zeta"),
                parse_angle(*ct, base + "coin.theta"),
                parse_angle(*cp, base + "coin.phi")};
            echo[base + "coin.zeta"] = format_double(step.coin->zeta);
            echo[base + "coin.theta"] = format_double(step.coin->theta);
            echo[base + "coin.phi"] = format_double(step.coin->phi);
        } else if (coin_keys != 0) {
            throw ConfigError("config: step " + std::to_string(k) +
                              " has a partial coin (need zeta, theta, phi)");
        }
        step.qplate.alpha =
            parse_angle(require(base + "qplate.alpha"), base + "qplate.alpha");
        step.qplate.delta =
            parse_angle(require(base + "qplate.delta"), base + "qplate.delta");
        echo[base + "qplate.alpha"] = format_double(step.qplate.alpha);
        echo[base + "qplate.delta"] = format_double(step.qplate.delta);
        walk.steps.push_back(std::move(step));
    }

    if (const auto* amps = take("walk.projection.amps")) {
        std::vector<double> a;
        std::stringstream ss(*amps);
        std::string item;
        while (std::getline(ss, item, ',')) {
            a.push_back(parse_double(item, "walk.projection.amps"));
        }
        if (a.size() != 4) {
            throw ConfigError("config: walk.projection.amps needs 4 values "
                              "(re_l, im_l, re_r, im_r)");
        }
        PolarizationState psi{Complex(a[0], a[1]), Complex(a[2], a[3])};
        const double n = psi.norm();
        if (!(n > 0.0)) {
            throw ConfigError("config: walk.projection.amps is zero");
        }
        psi.amp_l /= n;
        psi.amp_r /= n;
        walk.projection = psi;
        echo["walk.projection.amps"] = format_double(psi.amp_l.real()) + "," +
                                       format_double(psi.amp_l.imag()) + "," +
                                       format_double(psi.amp_r.real()) + "," +
                                       format_double(psi.amp_r.imag());
    } else {
        const double pz = parse_angle(require("walk.projection.zeta"),
                                      "walk.projection.zeta");
        const double pt = parse_angle(require("walk.projection.theta"),
                                      "walk.projection.theta");
        walk.projection = input_state({pz, pt});
        echo["walk.projection.zeta"] = format_double(pz);
        echo["walk.projection.theta"] = format_double(pt);
    }
    out.experiment.walk = walk;

    // --- sweep section ---
    ExperimentConfig& exp = out.experiment;
    exp.pool_size = static_cast<int>(
        parse_long(require("sweep.pool_size"), "sweep.pool_size"));
    exp.test_size = static_cast<int>(
        parse_long(require("sweep.test_size"), "sweep.test_size"));
    exp.n_train_grid = parse_ntrain(require("sweep.ntrain"), "sweep.ntrain");
    exp.repetitions =
        static_cast<int>(parse_long(require("sweep.reps"), "sweep.reps"));
    exp.shots = parse_shots(require("sweep.shots"), "sweep.shots");
    exp.sampling = parse_sampling(require("sweep.sampling"), "sweep.sampling");
    exp.feature_mode =
        parse_features(require("sweep.features"), "sweep.features");
    exp.intercept = parse_onoff(require("sweep.intercept"), "sweep.intercept");
    exp.fixed_records =
        parse_onoff(require("sweep.fixed_records"), "sweep.fixed_records");
    exp.master_seed = parse_u64(require("sweep.seed"), "sweep.seed");
    exp.rcond = parse_double(require("sweep.rcond"), "sweep.rcond");
    exp.ridge = parse_double(require("sweep.ridge"), "sweep.ridge");

    echo["sweep.pool_size"] = std::to_string(exp.pool_size);
    echo["sweep.test_size"] = std::to_string(exp.test_size);
    std::string grid;
    for (std::size_t i = 0; i < exp.n_train_grid.size(); ++i) {
        grid += (i ? "," : "") + std::to_string(exp.n_train_grid[i]);
    }
    echo["sweep.ntrain"] = grid;
    echo["sweep.reps"] = std::to_string(exp.repetitions);
    echo["sweep.shots"] =
        std::isinf(exp.shots) ? "inf" : format_double(exp.shots);
    echo["sweep.sampling"] = to_string(exp.sampling);
    echo["sweep.features"] = to_string(exp.feature_mode);
    echo["sweep.intercept"] = exp.intercept ? "on" : "off";
    echo["sweep.fixed_records"] = exp.fixed_records ? "on" : "off";
    echo["sweep.seed"] = std::to_string(exp.master_seed);
    echo["sweep.rcond"] = format_double(exp.rcond);
    echo["sweep.ridge"] = format_double(exp.ridge);

    // --- optimize section ---
    SearchOptions& search = out.search;
    search.budget = static_cast<int>(
        parse_long(require("optimize.budget"), "optimize.budget"));
    search.criterion =
        parse_criterion(require("optimize.criterion"), "optimize.criterion");
    search.val_pool = static_cast<int>(
        parse_long(require("optimize.val_pool"), "optimize.val_pool"));
    search.val_train = static_cast<int>(
        parse_long(require("optimize.val_train"), "optimize.val_train"));
    search.val_test = static_cast<int>(
        parse_long(require("optimize.val_test"), "optimize.val_test"));
    search.val_reps = static_cast<int>(
        parse_long(require("optimize.val_reps"), "optimize.val_reps"));
    search.seed = exp.master_seed;
    search.shots = exp.shots;
    search.sampling = exp.sampling;
    search.feature_mode = exp.feature_mode;
    search.intercept = exp.intercept;
    search.rcond = exp.rcond;
    search.ridge = exp.ridge;

    echo["optimize.budget"] = std::to_string(search.budget);
    echo["optimize.criterion"] = to_string(search.criterion);
    echo["optimize.val_pool"] = std::to_string(search.val_pool);
    echo["optimize.val_train"] = std::to_string(search.val_train);
    echo["optimize.val_test"] = std::to_string(search.val_test);
    echo["optimize.val_reps"] = std::to_string(search.val_reps);

    for (const auto& [key, value] : merged) {
        if (!seen.count(key)) {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    return out;
}

/// Key/value form of a walk, projection emitted as explicit amplitudes.
inline KeyValues walk_to_keys(const WalkConfig& walk) {
    KeyValues kv;
    kv["walk.steps"] = std::to_string(walk.steps.size());
    kv["walk.cutoff"] = std::to_string(walk.space.cutoff());
    for (std::size_t k = 0; k < walk.steps.size(); ++k) {
        const std::string base = "walk.step" + std::to_string(k + 1) + ".";
        const WalkStep& step = walk.steps[k];
        if (step.coin) {
            kv[base + "coin.zeta"] = format_double(step.coin->zeta);
            kv[base + "coin.theta"] = format_double(step.coin->theta);
            kv[base + "coin.phi"] = format_double(step.coin->phi);
        }
        kv[base + "qplate.alpha"] = format_double(step.qplate.alpha);
        kv[base + "qplate.delta"] = format_double(step.qplate.delta);
    }
    kv["walk.projection.amps"] =
        format_double(walk.projection.amp_l.real()) + "," +
        format_double(walk.projection.amp_l.imag()) + "," +
        format_double(walk.projection.amp_r.real()) + "," +
        format_double(walk.projection.amp_r.imag());
    return kv;
}

inline std::string config_to_text(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k + " = " + v + "\n";
    }
    return out;
}

} // namespace qelm
