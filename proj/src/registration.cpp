// Copyright 2026 The semgraph authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "semgraph/registration.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "semgraph/errors.hpp"

namespace semgraph {

template <typename Scalar>
Pose<Scalar> SolveWeightedAlignment(const std::vector<Vector3<Scalar>> &source,
                                    const std::vector<Vector3<Scalar>> &target,
                                    const std::vector<Scalar> &weights) {
    Scalar total = 0;
    Vector3<Scalar> mu_s = Vector3<Scalar>::Zero();
    Vector3<Scalar> mu_t = Vector3<Scalar>::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (weights[i] <= 0) continue;
        total += weights[i];
        mu_s += weights[i] * source[i];
        mu_t += weights[i] * target[i];
    }
    if (total <= 0) throw DegenerateError("alignment without positive weights");
    mu_s /= total;
    mu_t /= total;

    Matrix3<Scalar> cross = Matrix3<Scalar>::Zero();
    Matrix3<Scalar> spread = Matrix3<Scalar>::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (weights[i] <= 0) continue;
        const Vector3<Scalar> ds = source[i] - mu_s;
        cross += weights[i] * (target[i] - mu_t) * ds.transpose();
        spread += weights[i] * ds * ds.transpose();
    }

    // Rank < 2 of the source scatter leaves a rotation about the line free.
    Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> eig(spread);
    const Scalar largest = eig.eigenvalues()(2);
    if (!(largest > 0) || eig.eigenvalues()(1) <= largest * Scalar(1e-12)) {
        throw DegenerateError("collinear or coincident correspondences");
    }

    Eigen::JacobiSVD<Matrix3<Scalar>> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix3<Scalar> d = Matrix3<Scalar>::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
    const Matrix3<Scalar> rotation = svd.matrixU() * d * svd.matrixV().transpose();
    return Pose<Scalar>(rotation, mu_t - rotation * mu_s);
}

template Pose<double> SolveWeightedAlignment(const std::vector<Vector3<double>> &,
                                             const std::vector<Vector3<double>> &,
                                             const std::vector<double> &);
template Pose<float> SolveWeightedAlignment(const std::vector<Vector3<float>> &,
                                            const std::vector<Vector3<float>> &,
                                            const std::vector<float> &);

Pose3d SolveWeightedAlignment(const std::vector<WeightedCorrespondence> &correspondences) {
    std::vector<Eigen::Vector3d> source, target;
    std::vector<double> weights;
    source.reserve(correspondences.size());
    target.reserve(correspondences.size());
    weights.reserve(correspondences.size());
    for (const auto &c : correspondences) {
        source.push_back(c.source);
        target.push_back(c.target);
        weights.push_back(c.weight);
    }
    return SolveWeightedAlignment<double>(source, target, weights);
}

RegistrationParams RegistrationParams::FromConfig(const RunConfig &config) {
    RegistrationParams p;
    p.convergence_threshold = config.convergence_threshold;
    p.max_correspondence_distance = config.max_correspondence_distance;
    p.max_iterations = config.max_iterations;
    p.weights = config.weights;
    return p;
}

RegistrationResult RegisterScan(const std::vector<LabeledPoint> &scan, const VoxelHashMap &map,
                                const Pose3d &initial, const RegistrationParams &params) {
    RegistrationResult result;
    result.pose = initial;
    const double max_corr = params.max_correspondence_distance;
    const double cap = max_corr * max_corr;

    std::vector<Eigen::Vector3d> source, target;
    std::vector<double> weights;
    source.reserve(scan.size());
    target.reserve(scan.size());
    weights.reserve(scan.size());

    // Associates every transformed point; returns the truncated cost.
    const auto associate = [&](const Pose3d &pose) {
        source.clear();
        target.clear();
        weights.clear();
        double cost = 0.0;
        for (const auto &p : scan) {
            const Eigen::Vector3d world = pose * p.position;
            const double w = params.weights(p.label);
            const auto nn = map.NearestNeighbor(world, max_corr);
            if (!nn) {
                cost += w * cap;
                continue;
            }
            cost += w * nn->distance * nn->distance;
            source.push_back(world);
            target.push_back(nn->point);
            weights.push_back(w);
        }
        return cost;
    };

    for (int it = 0; it < params.max_iterations; ++it) {
        result.cost_history.push_back(associate(result.pose));
        result.correspondences = source.size();
        if (static_cast<int>(source.size()) < params.min_correspondences) {
            result.degenerate = true;
            result.failed = true;
            return result;
        }
        Pose3d correction;
        try {
            correction = SolveWeightedAlignment<double>(source, target, weights);
        } catch (const DegenerateError &) {
            result.degenerate = true;
            result.failed = true;
            return result;
        }
        result.pose = correction * result.pose;
        result.iterations = it + 1;
        result.correction = correction.Log().norm();
        if (result.correction < params.convergence_threshold) break;
    }
    result.cost_history.push_back(associate(result.pose));
    result.correspondences = source.size();
    return result;
}

FailureCheck DetectFailure(const Pose3d &initial, const Pose3d &final_pose,
                           double max_translation, double max_rotation) {
    FailureCheck check;
    check.error = initial.Inverse() * final_pose;
    check.translation_error = check.error.translation().norm();
    check.rotation_error = RotationAngle(check.error.rotation());
    check.failed = check.translation_error > max_translation || check.rotation_error > max_rotation;
    return check;
}

void MotionModel::Reset(const Pose3d &pose) {
    previous_ = pose;
    last_ = pose;
    count_ = 1;
}

void MotionModel::Push(const Pose3d &pose) {
    previous_ = last_;
    last_ = pose;
    count_ = std::min(count_ + 1, 2);
}

Pose3d MotionModel::Velocity() const {
    if (count_ < 2) return Pose3d();
    return previous_.Inverse() * last_;
}

Pose3d MotionModel::Predict() const { return last_ * Velocity(); }

}  // namespace semgraph
