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

#include "oracles.hpp"
#include "qelm/harness.hpp"
#include "qelm/reservoir.hpp"

using namespace qelm;

namespace {

WalkConfig generic_two_step_walk() {
    return two_step_walk({0.3, 0.5, 1.1}, input_state({0.35, 0.8}));
}

} // namespace

TEST_CASE("build_walk validates the window", "[reservoir]") {
    SECTION("two-step walk is an isometry on the reachable subspace") {
        const auto walk = build_walk(generic_two_step_walk());
        for (int pol = 0; pol < 2; ++pol) {
            const double n =
                walk.matrix.col(walk.config.space.joint_index(pol, 0)).norm();
            CHECK(std::abs(n - 1.0) < 1e-12);
        }
    }
    SECTION("empty walk with cutoff 0 is the 2x2 identity") {
        WalkConfig cfg;
        cfg.projection = {1.0, 0.0};
        cfg.space = OAMSpace(0);
        const auto walk = build_walk(cfg);
        CHECK(walk.matrix.rows() == 2);
        CHECK((walk.matrix - Eigen::MatrixXcd::Identity(2, 2))
                  .cwiseAbs()
                  .maxCoeff() < 1e-15);
    }
    SECTION("single full-shift step sends |L,0> to i|R,1>") {
        WalkConfig cfg;
        cfg.steps = {WalkStep{CoinParams{0.0, 0.0, 0.0}, {0.0, kPi}}};
        cfg.projection = {1.0, 0.0};
        cfg.space = OAMSpace(1);
        const auto walk = build_walk(cfg);
        Eigen::VectorXcd in = Eigen::VectorXcd::Zero(6);
        in(cfg.space.joint_index(0, 0)) = 1.0;
        const Eigen::VectorXcd out = walk.matrix * in;
        CHECK(std::abs(out(cfg.space.joint_index(1, 1)) - Complex(0, 1)) <
              1e-14);
    }
    SECTION("too many q-plates for the window is a configuration error") {
        WalkConfig cfg = generic_two_step_walk();
        cfg.space = OAMSpace(1); // two q-plates need cutoff >= 2
        CHECK_THROWS_AS(build_walk(cfg), ConfigError);
    }
}

TEST_CASE("reservoir map shape and projection identity", "[reservoir]") {
    const WalkConfig cfg = generic_two_step_walk();
    const auto walk = build_walk(cfg);
    const auto map = reservoir_map(walk, cfg.projection);

    CHECK(map.a.rows() == 5);
    CHECK(map.a.cols() == 2);

    SECTION("identity walk reduces to the polarization overlap") {
        WalkConfig id_cfg;
        id_cfg.projection = input_state({0.1, 0.2});
        id_cfg.space = OAMSpace(0);
        const auto id_map = reservoir_map(build_walk(id_cfg),
                                          id_cfg.projection);
        Xoshiro256 rng(5);
        for (int i = 0; i < 50; ++i) {
            const auto psi = haar_random_state(rng);
            const double p =
                probabilities(effective_povm(id_map), density(psi))(0);
            const Complex overlap =
                std::conj(id_cfg.projection.amp_l) * psi.amp_l +
                std::conj(id_cfg.projection.amp_r) * psi.amp_r;
            CHECK(p == Approx(std::norm(overlap)).margin(1e-14));
        }
    }

    SECTION("projection and its orthogonal complement resolve the identity") {
        const auto map_perp = reservoir_map(walk, cfg.projection.orthogonal());
        Xoshiro256 rng(6);
        for (int i = 0; i < 100; ++i) {
            const Eigen::Vector2cd psi = haar_random_state(rng).vec();
            const double total = (map.a * psi).squaredNorm() +
                                 (map_perp.a * psi).squaredNorm();
            CHECK(total == Approx(1.0).margin(1e-12));
        }
    }
}

TEST_CASE("effective povm structure", "[reservoir]") {
    const WalkConfig cfg = generic_two_step_walk();
    const auto map = reservoir_map(build_walk(cfg), cfg.projection);
    const auto povm = effective_povm(map);

    CHECK(povm.elements.size() == 5);

    SECTION("elements sum to the gram matrix of the map") {
        Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
        for (const auto& el : povm.elements) {
            sum += el;
        }
        CHECK((sum - map.a.adjoint() * map.a).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("elements are PSD with rank at most one") {
        for (const auto& el : povm.elements) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(el);
            CHECK(es.eigenvalues().minCoeff() > -1e-12);
            // second-largest eigenvalue vanishes for rank <= 1
            CHECK(es.eigenvalues()(0) < 1e-12);
        }
    }
    SECTION("gram matrix is a contraction") {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(map.a.adjoint() *
                                                           map.a);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
        CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-12);
    }
}

TEST_CASE("probabilities agree with the full-space oracle", "[reservoir]") {
    Xoshiro256 cfg_rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const WalkConfig cfg = random_config(cfg_rng);
        const auto povm =
            effective_povm(reservoir_map(build_walk(cfg), cfg.projection));
        Xoshiro256 state_rng(trial);
        for (int i = 0; i < 100; ++i) {
            const auto psi = haar_random_state(state_rng);
            const Eigen::VectorXd p = probabilities(povm, density(psi));
            const Eigen::VectorXd ref = oracle::probabilities(cfg, psi);
            CHECK((p - ref).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(p.minCoeff() >= 0.0);
            CHECK(p.sum() <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("probabilities of the maximally mixed state", "[reservoir]") {
    const WalkConfig cfg = generic_two_step_walk();
    const auto povm =
        effective_povm(reservoir_map(build_walk(cfg), cfg.projection));
    DensityMatrix mixed; // I/2
    const Eigen::VectorXd p = probabilities(povm, mixed);
    for (std::size_t b = 0; b < povm.elements.size(); ++b) {
        CHECK(p(static_cast<Eigen::Index>(b)) ==
              Approx(povm.elements[b].trace().real() / 2.0).margin(1e-14));
    }
}

TEST_CASE("frame rank diagnostics", "[reservoir]") {
    SECTION("generic two-step configuration reaches rank 4") {
        const WalkConfig cfg = generic_two_step_walk();
        const auto diag = frame_rank(
            effective_povm(reservoir_map(build_walk(cfg), cfg.projection)));
        CHECK(diag.rank == 4);
        CHECK(diag.singular_values.size() == 4);
    }
    SECTION("a diagonal coin (eta = 0) degrades the frame to rank 3") {
        // zeta + phi - 2 theta = 0 makes the coin diagonal, the two extreme
        // OAM outcomes dark, and one Pauli direction unrecoverable.
        const WalkConfig cfg =
            two_step_walk({0.3, 0.7, 1.1}, input_state({0.35, 0.8}));
        const auto diag = frame_rank(
            effective_povm(reservoir_map(build_walk(cfg), cfg.projection)));
        CHECK(diag.rank == 3);
    }
    SECTION("identity walk has a single outcome and rank 1") {
        WalkConfig cfg;
        cfg.projection = input_state({0.1, 0.2});
        cfg.space = OAMSpace(0);
        const auto diag = frame_rank(
            effective_povm(reservoir_map(build_walk(cfg), cfg.projection)));
        CHECK(diag.rank == 1);
    }
    SECTION("duplicated elements do not change the rank") {
        const WalkConfig cfg = generic_two_step_walk();
        const auto povm =
            effective_povm(reservoir_map(build_walk(cfg), cfg.projection));
        EffectivePOVM doubled;
        doubled.elements = povm.elements;
        doubled.elements.insert(doubled.elements.end(), povm.elements.begin(),
                                povm.elements.end());
        CHECK(frame_rank(doubled).rank == frame_rank(povm).rank);
    }
    SECTION("rank never exceeds min(outcomes, 4)") {
        Xoshiro256 rng(2);
        for (int i = 0; i < 100; ++i) {
            const WalkConfig cfg = random_config(rng);
            const auto diag = frame_rank(effective_povm(
                reservoir_map(build_walk(cfg), cfg.projection)));
            CHECK(diag.rank <= 4);
        }
    }
}
