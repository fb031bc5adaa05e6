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

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "semgraph/geometry.hpp"
#include "semgraph/types.hpp"

namespace semgraph {

// Procedural test worlds: a flat ground plane plus labelled poles, trunks,
// vehicles, building walls and vegetation, sampled densely on their
// surfaces. Scans are cut out around a known trajectory.

enum class ShapeKind { kCylinder, kBox, kWalls, kBlob };

struct SyntheticObject {
    int instance = 0;
    Label label = Label::kOther;
    ShapeKind shape = ShapeKind::kCylinder;
    Eigen::Vector3d center = Eigen::Vector3d::Zero();  // base center, on the ground
    Eigen::Vector3d size = Eigen::Vector3d::Zero();    // radius/half extents, height
    double yaw = 0.0;
    std::vector<Eigen::Vector3d> points;  // fixed surface samples, world frame
};

struct WorldParams {
    double extent = 120.0;  // world is [-extent, extent]^2
    double ground_spacing = 0.7;
    int poles = 80;
    int trunks = 60;
    int vehicles = 30;
    int buildings = 16;
    int bushes = 30;
    double min_separation = 3.0;   // between object footprints
    double path_clearance = 3.0;   // between objects and the trajectory
    std::uint64_t seed = 1;
};

struct SyntheticWorld {
    WorldParams params;
    std::vector<SyntheticObject> objects;
};

// Objects never come closer than `path_clearance` to the given positions.
SyntheticWorld GenerateWorld(const WorldParams &params, const std::vector<Eigen::Vector3d> &path);

struct ScanParams {
    double sensor_radius = 60.0;
    double noise_sigma = 0.0;
    // Fresh surface samples for every scan instead of the fixed ones.
    bool resample = false;
    // Apply the in-sweep motion of `sweep_motion` to the points.
    bool motion_distortion = true;
    std::uint64_t seed = 0;
};

struct SyntheticScan {
    Scan scan;
    std::vector<int> instance;  // per point, -1 for ground/background
};

// Scan at mid-sweep pose `pose`, with `sweep_motion` the sensor motion over
// the sweep. Points are ordered by sweep time and carry exact stamps.
SyntheticScan GenerateScan(const SyntheticWorld &world, const Pose3d &pose,
                           const Pose3d &sweep_motion, std::size_t index,
                           const ScanParams &params);

enum class TrajectoryKind { kStraight, kCircle };

struct TrajectoryParams {
    TrajectoryKind kind = TrajectoryKind::kCircle;
    std::size_t num_scans = 100;
    double step = 1.0;      // meters per scan
    double radius = 50.0;   // circle only
    double height = 1.8;    // sensor height above ground
    // Start from rest: the speed rises smoothly to `step` over this many scans.
    std::size_t ramp_scans = 0;
};

std::vector<Pose3d> GenerateTrajectory(const TrajectoryParams &params);

// Instances of the given classes whose footprint center lies within the
// sensor radius of at least one pose.
std::set<int> VisibleInstances(const SyntheticWorld &world, const std::vector<Pose3d> &poses,
                               double sensor_radius, const std::vector<Label> &classes);

// A complete synthetic sequence generated on demand.
class SyntheticSequence {
public:
    SyntheticSequence(const WorldParams &world, const TrajectoryParams &trajectory,
                      const ScanParams &scan);

    std::size_t size() const { return poses_.size(); }
    const std::vector<Pose3d> &poses() const { return poses_; }
    const SyntheticWorld &world() const { return world_; }
    const ScanParams &scan_params() const { return scan_; }

    SyntheticScan Generate(std::size_t index) const;
    Scan operator()(std::size_t index) const { return Generate(index).scan; }

    // KITTI layout: <dir>/velodyne/NNNNNN.bin, <dir>/labels/NNNNNN.label and
    // <dir>/poses.txt.
    void Write(const std::filesystem::path &dir) const;

private:
    SyntheticWorld world_;
    std::vector<Pose3d> poses_;
    ScanParams scan_;
};

}  // namespace semgraph
