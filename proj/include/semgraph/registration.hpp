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

#pragma once

#include <optional>
#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/geometry.hpp"
#include "semgraph/types.hpp"
#include "semgraph/voxel_hash_map.hpp"

namespace semgraph {

struct WeightedCorrespondence {
    Eigen::Vector3d source;
    Eigen::Vector3d target;
    double weight = 1.0;
};

// Closed-form minimiser of sum w * |T source - target|^2 (weighted
// centroids, weighted cross-covariance, SVD with reflection correction).
// Zero-weight pairs are ignored. Throws DegenerateError when the weighted
// source points do not span a plane.
template <typename Scalar>
Pose<Scalar> SolveWeightedAlignment(const std::vector<Vector3<Scalar>> &source,
                                    const std::vector<Vector3<Scalar>> &target,
                                    const std::vector<Scalar> &weights);

Pose3d SolveWeightedAlignment(const std::vector<WeightedCorrespondence> &correspondences);

struct RegistrationParams {
    double convergence_threshold = 1e-4;
    double max_correspondence_distance = 2.0;
    int max_iterations = 100;
    int min_correspondences = 10;
    LabelWeights weights = LabelWeights::Defaults();

    static RegistrationParams FromConfig(const RunConfig &config);
};

struct RegistrationResult {
    Pose3d pose;  // sensor -> world
    int iterations = 0;
    double correction = 0.0;  // twist norm of the last correction
    std::size_t correspondences = 0;
    bool degenerate = false;
    bool failed = false;
    // Truncated objective sum w * min(d^2, max_corr^2) before each iteration
    // and once more at the returned pose.
    std::vector<double> cost_history;
};

// Iterative semantically weighted point-to-point ICP of a sensor-frame scan
// against the map, starting from `initial`.
RegistrationResult RegisterScan(const std::vector<LabeledPoint> &scan, const VoxelHashMap &map,
                                const Pose3d &initial, const RegistrationParams &params);

struct FailureCheck {
    bool failed = false;
    Pose3d error;  // (initial)^-1 * final
    double translation_error = 0.0;
    double rotation_error = 0.0;
};

FailureCheck DetectFailure(const Pose3d &initial, const Pose3d &final_pose,
                           double max_translation, double max_rotation);

// Constant-velocity motion model over the last two accepted poses.
class MotionModel {
public:
    void Reset(const Pose3d &pose);
    void Push(const Pose3d &pose);

    // Relative motion of the last step, identity until two poses exist.
    Pose3d Velocity() const;
    // World-frame initial guess for the next scan.
    Pose3d Predict() const;
    // True when the prediction is backed by two consecutive tracked poses.
    bool HasVelocity() const { return count_ >= 2; }
    bool Empty() const { return count_ == 0; }
    const Pose3d &Last() const { return last_; }

private:
    Pose3d previous_;
    Pose3d last_;
    int count_ = 0;
};

}  // namespace semgraph
