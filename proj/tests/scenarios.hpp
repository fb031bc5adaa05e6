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

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <random>
#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/geometry.hpp"
#include "semgraph/io.hpp"
#include "semgraph/loop_closing.hpp"
#include "semgraph/metrics.hpp"
#include "semgraph/pipeline.hpp"
#include "semgraph/preprocess.hpp"
#include "semgraph/semantic_graph.hpp"
#include "semgraph/synthetic.hpp"

namespace semgraph::testing {

inline double Uniform(std::mt19937_64 &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::Vector3d RandomUnitVector(std::mt19937_64 &rng) {
    std::normal_distribution<double> n;
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    while (v.norm() < 1e-9) v = Eigen::Vector3d(n(rng), n(rng), n(rng));
    return v.normalized();
}

inline Pose3d RandomPose(std::mt19937_64 &rng, double max_translation, double max_angle) {
    Twist xi;
    xi.head<3>() = RandomUnitVector(rng) * Uniform(rng, 0.0, max_angle);
    const Eigen::Vector3d t = RandomUnitVector(rng) * Uniform(rng, 0.0, max_translation);
    Pose3d out = Pose3d::Exp(xi);
    return Pose3d(out.rotation(), t);
}

inline double TranslationError(const Pose3d &a, const Pose3d &b) {
    return (a.Inverse() * b).translation().norm();
}

inline double RotationError(const Pose3d &a, const Pose3d &b) {
    return RotationAngle((a.Inverse() * b).rotation());
}

// Ground-truth poses expressed relative to the first one, which is the frame
// the pipeline estimates in.
inline std::vector<Pose3d> RelativeTruth(const std::vector<Pose3d> &poses) {
    std::vector<Pose3d> out;
    out.reserve(poses.size());
    for (const auto &p : poses) out.push_back(poses.front().Inverse() * p);
    return out;
}

// Counter-clockwise loop that starts from rest and ends past its start.
inline TrajectoryParams LoopTrajectory(std::size_t scans, double radius, std::size_t ramp) {
    TrajectoryParams t;
    t.kind = TrajectoryKind::kCircle;
    t.num_scans = scans;
    t.step = 1.0;
    t.radius = radius;
    t.ramp_scans = ramp;
    return t;
}

inline ScanParams CleanScans(double sensor_radius) {
    ScanParams s;
    s.sensor_radius = sensor_radius;
    s.motion_distortion = true;
    return s;
}

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("semgraph_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;
    const std::filesystem::path &path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline SlamResult RunSequence(const SyntheticSequence &sequence, const RunConfig &config,
                              bool single_thread = true) {
    RunOptions options;
    options.single_thread = single_thread;
    options.export_cloud = false;
    return RunSlam(config, sequence.size(), [&](std::size_t i) { return sequence(i); },
                   options);
}

// Keyframe of an undistorted scan at `pose`, with random point dropout.
inline KeyframeRecord KeyframeAt(const SyntheticWorld &world, const Pose3d &pose, std::size_t index,
                                 const RunConfig &config, double dropout, std::mt19937_64 &rng) {
    ScanParams scan_params;
    scan_params.motion_distortion = false;
    auto scan = GenerateScan(world, pose, Pose3d(), index, scan_params).scan;
    if (dropout > 0.0) {
        std::bernoulli_distribution drop(dropout);
        std::erase_if(scan.points, [&](const LabeledPoint &) { return drop(rng); });
    }
    auto graph = BuildSemanticGraph(scan.points, config);
    std::vector<NodeId> ids;
    for (const auto &node : graph.nodes) ids.push_back(node.id);
    return MakeKeyframe(index, pose, VoxelDownsample(scan.points, config.voxel_size),
                        std::move(graph), std::move(ids), config);
}

}  // namespace semgraph::testing
