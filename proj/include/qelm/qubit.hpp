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
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "qelm/rng.hpp"

namespace qelm {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Waveplate angles of the polarization preparation stage, in radians.
struct PrepParams {
    double zeta{0.0};  // half-wave plate
    double theta{0.0}; // quarter-wave plate
};

/// Pure polarization qubit in the circular basis, ordered (|L>, |R>).
/// All 2x2 matrices in this library use the same basis ordering.
struct PolarizationState {
    Complex amp_l{1.0, 0.0};
    Complex amp_r{0.0, 0.0};

    double norm() const {
        return std::sqrt(std::norm(amp_l) + std::norm(amp_r));
    }

    Eigen::Vector2cd vec() const { return Eigen::Vector2cd(amp_l, amp_r); }

    /// The state orthogonal to this one (unique up to phase).
    PolarizationState orthogonal() const {
        return {-std::conj(amp_r), std::conj(amp_l)};
    }
};

struct DensityMatrix {
    Eigen::Matrix2cd m{Eigen::Matrix2cd::Identity() * 0.5};
};

enum class PauliLabel { SigmaX, SigmaY, SigmaZ, Custom };

struct Observable {
    PauliLabel label{PauliLabel::Custom};
    Eigen::Matrix2cd m{Eigen::Matrix2cd::Zero()};
};

inline std::string observable_name(const Observable& obs) {
    switch (obs.label) {
    case PauliLabel::SigmaX:
        return "sx";
    case PauliLabel::SigmaY:
        return "sy";
    case PauliLabel::SigmaZ:
        return "sz";
    default:
        return "custom";
    }
}

/// Pauli matrix in the (|L>, |R>) basis, with sigma_z = |L><L| - |R><R|.
inline Observable pauli(PauliLabel label) {
    Eigen::Matrix2cd m;
    switch (label) {
    case PauliLabel::SigmaX:
        m << 0.0, 1.0, 1.0, 0.0;
        break;
    case PauliLabel::SigmaY:
        m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
        break;
    case PauliLabel::SigmaZ:
        m << 1.0, 0.0, 0.0, -1.0;
        break;
    default:
        throw std::invalid_argument("pauli: unknown label");
    }
    return {label, m};
}

/// State produced by the HWP(zeta) + QWP(theta) preparation stage:
///   |psi> = [ e^{ i theta} (cos(2 zeta - theta) - sin(2 zeta - theta)) |L>
///           + e^{-i theta} (cos(2 zeta - theta) + sin(2 zeta - theta)) |R> ] / sqrt(2).
/// Normalized for any angles.
inline PolarizationState input_state(const PrepParams& p) {
    if (!std::isfinite(p.zeta) || !std::isfinite(p.theta)) {
        throw std::invalid_argument("input_state: angles must be finite");
    }
    const double u = 2.0 * p.zeta - p.theta;
    const double c = std::cos(u);
    const double s = std::sin(u);
    const Complex phase = std::exp(Complex(0.0, p.theta));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    return {phase * ((c - s) * inv_sqrt2),
            std::conj(phase) * ((c + s) * inv_sqrt2)};
}

/// |psi><psi| for a normalized pure state.
inline DensityMatrix density(const PolarizationState& psi) {
    if (std::abs(psi.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("density: state is not normalized");
    }
    const Eigen::Vector2cd v = psi.vec();
    return {v * v.adjoint()};
}

/// tr(obs * rho). Real for Hermitian observables.
inline double expectation(const Observable& obs, const DensityMatrix& rho) {
    return (obs.m * rho.m).trace().real();
}

/// Haar-uniform pure qubit state: two complex Gaussian amplitudes, normalized.
inline PolarizationState haar_random_state(Xoshiro256& rng) {
    for (;;) {
        const auto [a, b] = normal_pair(rng);
        const auto [c, d] = normal_pair(rng);
        const Complex l(a, b);
        const Complex r(c, d);
        const double n = std::sqrt(std::norm(l) + std::norm(r));
        if (n > 0.0) {
            return {l / n, r / n};
        }
    }
}

} // namespace qelm
