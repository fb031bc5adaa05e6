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

#include <random>
#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/geometry.hpp"
#include "semgraph/graph_map.hpp"
#include "semgraph/registration.hpp"

namespace semgraph {

struct RelocalizationParams {
    double inlier_distance = 0.2;
    double inlier_ratio = 0.43;
    int trials = 500;
    double early_exit_ratio = 0.8;

    static RelocalizationParams FromConfig(const RunConfig &config);
};

struct RelocalizationOutcome {
    bool success = false;
    Pose3d pose;  // maps query coordinates onto reference coordinates
    double inlier_ratio = 0.0;
    std::size_t inliers = 0;
    std::vector<std::size_t> inlier_indices;
};

// Fraction of pairs with |pose * query - reference| < inlier_distance.
double InlierRatio(const Pose3d &pose, const std::vector<Eigen::Vector3d> &query,
                   const std::vector<Eigen::Vector3d> &reference, double inlier_distance);

// RANSAC over minimal 3-pair samples with SVD alignment, then a refit on the
// inliers. No pose prior is used.
RelocalizationOutcome Relocalize(const std::vector<Eigen::Vector3d> &query,
                                 const std::vector<Eigen::Vector3d> &reference,
                                 const RelocalizationParams &params, std::mt19937_64 &rng);

// Convenience overload over node correspondences (surviving pairs only).
RelocalizationOutcome Relocalize(const NodeMatchSet &matches, const SemanticGraph &current,
                                 const SemanticGraph &reference,
                                 const RelocalizationParams &params, std::mt19937_64 &rng);

// Dense ICP seeded with the relocalized pose. `failed` is set when the
// refinement leaves the basin of the seed (moves farther than the
// correspondence distance) or fewer than `min_overlap` of the scan points
// end up with a correspondence.
RegistrationResult RefineAndResume(const std::vector<LabeledPoint> &scan,
                                   const Pose3d &relocalized, const VoxelHashMap &map,
                                   const RegistrationParams &params, double min_overlap = 0.5);

// Scan indices kept after removing, in every window of `window` scans, one
// run of `run` consecutive scans at a seeded random offset.
std::vector<std::size_t> SimulateDroppedFrames(std::size_t num_scans, int run, int window,
                                               std::uint64_t seed);

}  // namespace semgraph
