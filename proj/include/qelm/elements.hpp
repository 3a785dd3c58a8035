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
#include <stdexcept>

#include <Eigen/Dense>

#include "qelm/qubit.hpp"

namespace qelm {

/// QWP(zeta) HWP(theta) QWP(phi) composite coin, parametrized by the three
/// waveplate angles (radians).
struct CoinParams {
    double zeta{0.0};
    double theta{0.0};
    double phi{0.0};
};

/// Q-plate parameters: optic-axis orientation alpha and phase retardance
/// delta, both in radians. delta = pi gives the full conditional shift.
struct QPlateParams {
    double alpha{0.0};
    double delta{kPi};
};

/// Truncated orbital-angular-momentum window: azimuthal index n in
/// [-cutoff, +cutoff], basis ordered by ascending n.
class OAMSpace {
  public:
    explicit OAMSpace(int cutoff) : cutoff_(cutoff) {
        if (cutoff < 0) {
            throw std::invalid_argument("OAMSpace: cutoff must be >= 0");
        }
    }

    int cutoff() const { return cutoff_; }
    int dim() const { return 2 * cutoff_ + 1; }
    int joint_dim() const { return 2 * dim(); }

    /// Basis index of azimuthal number n.
    int index(int n) const {
        if (n < -cutoff_ || n > cutoff_) {
            throw std::out_of_range("OAMSpace: azimuthal index outside window");
        }
        return n + cutoff_;
    }

    /// Azimuthal number of basis index i.
    int azimuthal(int i) const {
        if (i < 0 || i >= dim()) {
            throw std::out_of_range("OAMSpace: basis index outside window");
        }
        return i - cutoff_;
    }

    /// Joint polarization (x) OAM index, pol-major layout:
    /// (|L,-N>, ..., |L,N>, |R,-N>, ..., |R,N>). pol: 0 = L, 1 = R.
    int joint_index(int pol, int n) const { return pol * dim() + index(n); }

  private:
    int cutoff_;
};

/// Operator on the joint polarization (x) OAM space.
struct JointOperator {
    Eigen::MatrixXcd matrix;
    OAMSpace space;
};

namespace detail {
inline void require_finite_angle(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) +
                                    ": angle must be finite");
    }
}
} // namespace detail

/// Composite coin acting on polarization only, with eta = zeta + phi - 2 theta:
///   [  e^{-i(zeta-phi)} cos(eta)   e^{ i(zeta+phi)} sin(eta) ]
///   [ -e^{-i(zeta+phi)} sin(eta)   e^{ i(zeta-phi)} cos(eta) ]
/// Unitary with determinant 1 for all parameters.
inline Eigen::Matrix2cd coin_operator(const CoinParams& p) {
    detail::require_finite_angle(p.zeta, "coin_operator");
    detail::require_finite_angle(p.theta, "coin_operator");
    detail::require_finite_angle(p.phi, "coin_operator");
    const double eta = p.zeta + p.phi - 2.0 * p.theta;
    const double c = std::cos(eta);
    const double s = std::sin(eta);
    Eigen::Matrix2cd m;
    m(0, 0) = std::exp(Complex(0.0, -(p.zeta - p.phi))) * c;
    m(0, 1) = std::exp(Complex(0.0, p.zeta + p.phi)) * s;
    m(1, 0) = -std::exp(Complex(0.0, -(p.zeta + p.phi))) * s;
    m(1, 1) = std::exp(Complex(0.0, p.zeta - p.phi)) * c;
    return m;
}

/// Q-plate conditional shift on the truncated window:
///   S(alpha,delta) = sum_n cos(delta/2) (|L,n><L,n| + |R,n><R,n|)
///                  + i sin(delta/2) ( e^{ 2i alpha} |L,n><R,n+1|
///                                   + e^{-2i alpha} |R,n><L,n-1| ).
/// Terms referencing |n| > cutoff are dropped, so the operator is unitary
/// only when restricted to states supported on |n| <= cutoff - 1.
inline JointOperator qplate_operator(const QPlateParams& p,
                                     const OAMSpace& space) {
    detail::require_finite_angle(p.alpha, "qplate_operator");
    detail::require_finite_angle(p.delta, "qplate_operator");
    const int cut = space.cutoff();
    const double c = std::cos(0.5 * p.delta);
    const Complex raise = Complex(0.0, std::sin(0.5 * p.delta)) *
                          std::exp(Complex(0.0, 2.0 * p.alpha));
    const Complex lower = Complex(0.0, std::sin(0.5 * p.delta)) *
                          std::exp(Complex(0.0, -2.0 * p.alpha));
    Eigen::MatrixXcd m =
        Eigen::MatrixXcd::Zero(space.joint_dim(), space.joint_dim());
    for (int n = -cut; n <= cut; ++n) {
        m(space.joint_index(0, n), space.joint_index(0, n)) = c;
        m(space.joint_index(1, n), space.joint_index(1, n)) = c;
        if (n + 1 <= cut) {
            m(space.joint_index(0, n), space.joint_index(1, n + 1)) = raise;
        }
        if (n - 1 >= -cut) {
            m(space.joint_index(1, n), space.joint_index(0, n - 1)) = lower;
        }
    }
    return {std::move(m), space};
}

/// Lift a coin to the joint space: C (x) I_OAM in pol-major layout.
inline Eigen::MatrixXcd lift_coin(const Eigen::Matrix2cd& coin,
                                  const OAMSpace& space) {
    const int d = space.dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            out.block(i * d, j * d, d, d) =
                coin(i, j) * Eigen::MatrixXcd::Identity(d, d);
        }
    }
    return out;
}

} // namespace qelm
