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

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qelm/elements.hpp"
#include "qelm/errors.hpp"
#include "qelm/qubit.hpp"

namespace qelm {

/// One walk step: an optional coin followed by a q-plate shift.
struct WalkStep {
    std::optional<CoinParams> coin;
    QPlateParams qplate;
};

/// Full reservoir description: the step sequence, the polarization state
/// projected on after the walk, and the OAM window.
///
/// The walker starts at n = 0, so a sequence of s q-plates reaches at most
/// |n| = s. Requiring steps.size() <= cutoff therefore guarantees that no
/// amplitude is ever truncated away at the window edge.
struct WalkConfig {
    std::vector<WalkStep> steps;
    PolarizationState projection;
    OAMSpace space{0};
};

struct WalkUnitary {
    Eigen::MatrixXcd matrix;
    WalkConfig config;
};

/// Reservoir map A = (<psi_pol| (x) I_OAM) U (I_pol (x) |0_OAM>),
/// a dim_OAM x 2 matrix. A psi is the unnormalized OAM amplitude vector
/// after post-selecting the projection polarization.
struct ReservoirMap {
    Eigen::MatrixXcd a;
};

/// Effective measurement pulled back onto the input qubit:
/// element b is A^dag |b><b| A, for OAM outcomes b = -N..N in basis order.
/// Elements are PSD with rank <= 1 and sum to A^dag A <= I.
struct EffectivePOVM {
    std::vector<Eigen::Matrix2cd> elements;
};

/// Fixed q-plate hardware parameters of the two-step walk this project
/// models: the fabrication angles are 105 deg and 336 deg, driven at
/// retardance pi/2 and pi respectively.
inline constexpr double kQPlateAlpha1 = 105.0 * kPi / 180.0;
inline constexpr double kQPlateAlpha2 = 336.0 * kPi / 180.0;
inline constexpr double kQPlateDelta1 = kPi / 2.0;
inline constexpr double kQPlateDelta2 = kPi;

/// Two-step walk skeleton with the fixed q-plates; the coin and the final
/// projection are the free knobs. Five OAM outcomes (cutoff 2).
inline WalkConfig two_step_walk(const CoinParams& coin,
                                const PolarizationState& projection) {
    WalkConfig cfg;
    cfg.steps = {WalkStep{std::nullopt, {kQPlateAlpha1, kQPlateDelta1}},
                 WalkStep{coin, {kQPlateAlpha2, kQPlateDelta2}}};
    cfg.projection = projection;
    cfg.space = OAMSpace(2);
    return cfg;
}

/// Composes the step operators in order (first step applied first) and
/// verifies that both basis polarizations launched at n = 0 keep unit norm,
/// i.e. that the evolution never drives amplitude through the window edge.
inline WalkUnitary build_walk(const WalkConfig& cfg) {
    if (static_cast<int>(cfg.steps.size()) > cfg.space.cutoff()) {
        throw ConfigError("build_walk: q-plate count exceeds the OAM window; "
                          "raise the cutoff or drop steps");
    }
    const int dim = cfg.space.joint_dim();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto& step : cfg.steps) {
        if (step.coin) {
            u = lift_coin(coin_operator(*step.coin), cfg.space) * u;
        }
        u = qplate_operator(step.qplate, cfg.space).matrix * u;
    }
    for (int pol = 0; pol < 2; ++pol) {
        const double n = u.col(cfg.space.joint_index(pol, 0)).norm();
        if (std::abs(n - 1.0) > 1e-9) {
            throw ConfigError(
                "build_walk: norm lost to OAM truncation on the reachable "
                "subspace; configuration is inconsistent with the window");
        }
    }
    return {std::move(u), cfg};
}

inline ReservoirMap reservoir_map(const WalkUnitary& walk,
                                  const PolarizationState& psi_pol) {
    if (std::abs(psi_pol.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "reservoir_map: projection state is not normalized");
    }
    const OAMSpace& space = walk.config.space;
    const int d = space.dim();
    const Complex pl = std::conj(psi_pol.amp_l);
    const Complex pr = std::conj(psi_pol.amp_r);
    Eigen::MatrixXcd a(d, 2);
    for (int i = 0; i < d; ++i) {
        for (int pol_in = 0; pol_in < 2; ++pol_in) {
            const int col = space.joint_index(pol_in, 0);
            a(i, pol_in) =
                pl * walk.matrix(i, col) + pr * walk.matrix(d + i, col);
        }
    }
    return {std::move(a)};
}

/// Convenience: reservoir map of a config against its own projection state.
inline ReservoirMap reservoir_map(const WalkConfig& cfg) {
    return reservoir_map(build_walk(cfg), cfg.projection);
}

inline EffectivePOVM effective_povm(const ReservoirMap& map) {
    EffectivePOVM povm;
    povm.elements.reserve(static_cast<std::size_t>(map.a.rows()));
    for (Eigen::Index b = 0; b < map.a.rows(); ++b) {
        const Eigen::RowVector2cd row = map.a.row(b);
        povm.elements.push_back(row.adjoint() * row);
    }
    return povm;
}

/// Outcome probabilities p_b = tr(mu_b rho). Subnormalized: the projection
/// post-selection discards norm, so sum_b p_b <= 1. Tiny negative roundoff
/// is clamped to zero.
inline Eigen::VectorXd probabilities(const EffectivePOVM& povm,
                                     const DensityMatrix& rho) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(povm.elements.size()));
    for (std::size_t b = 0; b < povm.elements.size(); ++b) {
        const double v = (povm.elements[b] * rho.m).trace().real();
        p(static_cast<Eigen::Index>(b)) = v < 0.0 ? 0.0 : v;
    }
    return p;
}

/// Real frame matrix of the POVM: row b holds the components of mu_b in the
/// (I, sigma_x, sigma_y, sigma_z) basis, i.e. (tr mu_b, tr mu_b sigma_x, ...).
inline Eigen::MatrixXd frame_matrix(const EffectivePOVM& povm) {
    const Eigen::Matrix2cd sx = pauli(PauliLabel::SigmaX).m;
    const Eigen::Matrix2cd sy = pauli(PauliLabel::SigmaY).m;
    const Eigen::Matrix2cd sz = pauli(PauliLabel::SigmaZ).m;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(povm.elements.size()), 4);
    for (std::size_t b = 0; b < povm.elements.size(); ++b) {
        const auto& el = povm.elements[b];
        const auto i = static_cast<Eigen::Index>(b);
        m(i, 0) = el.trace().real();
        m(i, 1) = (el * sx).trace().real();
        m(i, 2) = (el * sy).trace().real();
        m(i, 3) = (el * sz).trace().real();
    }
    return m;
}

struct FrameDiagnostics {
    int rank{0};
    Eigen::VectorXd singular_values;
};

/// Numerical rank of the frame matrix (singular values above 1e-10 times the
/// largest). Rank 4 means every qubit observable is linearly recoverable
/// from the outcome probabilities.
inline FrameDiagnostics frame_rank(const EffectivePOVM& povm) {
    const Eigen::MatrixXd m = frame_matrix(povm);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd sv = svd.singularValues();
    FrameDiagnostics diag;
    diag.singular_values = sv;
    if (sv.size() > 0 && sv(0) > 0.0) {
        const double cut = 1e-10 * sv(0);
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv(i) > cut) {
                ++diag.rank;
            }
        }
    }
    return diag;
}

} // namespace qelm
