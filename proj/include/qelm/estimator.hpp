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

#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qelm/qubit.hpp"
#include "qelm/reservoir.hpp"
#include "qelm/sampling.hpp"

namespace qelm {

/// Paired rows of feature vectors and target expectation values.
struct TrainingSet {
    Eigen::MatrixXd features; // n_train x d
    Eigen::MatrixXd targets;  // n_train x m
};

/// Trained linear readout mapping a feature vector to m observable
/// estimates, together with the metadata needed to apply it consistently.
struct EstimatorWeights {
    Eigen::MatrixXd w; // m x d
    FeatureMode mode{FeatureMode::Exact};
    bool intercept{false};
    Eigen::VectorXd singular_values; // of the solved feature matrix
};

/// Least-squares readout: minimizes ||features W^T - targets||_F and returns
/// the minimum-norm minimizer. Singular values below rcond times the largest
/// are treated as zero; ridge > 0 switches the filtered inverse to
/// sigma / (sigma^2 + ridge).
inline EstimatorWeights train(const TrainingSet& ts, FeatureMode mode,
                              bool intercept, double rcond = 1e-10,
                              double ridge = 0.0) {
    const Eigen::Index n = ts.features.rows();
    if (n == 0) {
        throw std::invalid_argument("train: empty training set");
    }
    if (ts.targets.rows() != n) {
        throw std::invalid_argument(
            "train: feature and target row counts differ");
    }
    if (!ts.features.allFinite() || !ts.targets.allFinite()) {
        throw std::invalid_argument("train: non-finite training data");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        ts.features, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cut = sv.size() > 0 ? rcond * sv(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cut && sv(i) > 0.0) {
            inv(i) = ridge > 0.0 ? sv(i) / (sv(i) * sv(i) + ridge)
                                 : 1.0 / sv(i);
        }
    }
    const Eigen::MatrixXd x = svd.matrixV() * inv.asDiagonal() *
                              svd.matrixU().transpose() * ts.targets;
    return {x.transpose(), mode, intercept, sv};
}

inline Eigen::VectorXd predict(const EstimatorWeights& w,
                               const FeatureVector& f) {
    if (f.mode != w.mode || f.intercept != w.intercept) {
        throw std::invalid_argument(
            "predict: feature mode does not match the trained weights");
    }
    if (f.values.size() != w.w.cols()) {
        throw std::invalid_argument("predict: feature dimension mismatch");
    }
    return w.w * f.values;
}

/// Row-batched prediction for feature rows already known to match the
/// weights' layout.
inline Eigen::MatrixXd predict_rows(const EstimatorWeights& w,
                                    const Eigen::MatrixXd& rows) {
    if (rows.cols() != w.w.cols()) {
        throw std::invalid_argument("predict_rows: dimension mismatch");
    }
    return rows * w.w.transpose();
}

/// Per-observable mean squared error between prediction and truth rows.
inline Eigen::VectorXd mse(const Eigen::MatrixXd& pred,
                           const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols() ||
        pred.rows() < 1) {
        throw std::invalid_argument("mse: shape mismatch");
    }
    return (pred - truth).array().square().colwise().mean().transpose();
}

struct IdealWeights {
    EstimatorWeights weights;  // mode Exact, no intercept
    Eigen::VectorXd residuals; // Frobenius reconstruction residual per obs
    std::vector<bool> in_span; // residual below 1e-10
};

/// Analytic dual-frame readout: for each observable O, solves
/// min || M^T w - o ||_2 where M is the POVM frame matrix and o the Pauli
/// components (tr O, tr O sx, tr O sy, tr O sz). When O lies in the span of
/// the POVM elements, sum_b w_b mu_b reconstructs O exactly and the weights
/// read tr(O rho) directly off exact probabilities.
inline IdealWeights ideal_weights(const EffectivePOVM& povm,
                                  const std::vector<Observable>& observables) {
    const Eigen::MatrixXd mt = frame_matrix(povm).transpose(); // 4 x B
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mt, Eigen::ComputeThinU |
                                                  Eigen::ComputeThinV);
    svd.setThreshold(1e-10); // same rank convention as frame_rank
    const Eigen::Matrix2cd sx = pauli(PauliLabel::SigmaX).m;
    const Eigen::Matrix2cd sy = pauli(PauliLabel::SigmaY).m;
    const Eigen::Matrix2cd sz = pauli(PauliLabel::SigmaZ).m;

    const auto b_count = static_cast<Eigen::Index>(povm.elements.size());
    const auto m_count = static_cast<Eigen::Index>(observables.size());
    IdealWeights out;
    out.weights.w.resize(m_count, b_count);
    out.weights.mode = FeatureMode::Exact;
    out.weights.intercept = false;
    out.weights.singular_values = svd.singularValues();
    out.residuals.resize(m_count);
    out.in_span.resize(static_cast<std::size_t>(m_count));

    for (Eigen::Index j = 0; j < m_count; ++j) {
        const auto& obs = observables[static_cast<std::size_t>(j)].m;
        Eigen::Vector4d o;
        o << obs.trace().real(), (obs * sx).trace().real(),
            (obs * sy).trace().real(), (obs * sz).trace().real();
        const Eigen::VectorXd w = svd.solve(o);
        out.weights.w.row(j) = w.transpose();
        Eigen::Matrix2cd recon = Eigen::Matrix2cd::Zero();
        for (Eigen::Index b = 0; b < b_count; ++b) {
            recon += w(b) * povm.elements[static_cast<std::size_t>(b)];
        }
        const double res = (recon - obs).norm();
        out.residuals(j) = res;
        out.in_span[static_cast<std::size_t>(j)] = res < 1e-10;
    }
    return out;
}

} // namespace qelm
