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

#include "semgraph/preprocess.hpp"

#include <unordered_set>

#include "semgraph/voxel.hpp"

namespace semgraph {

Scan Deskew(const Scan &scan, const Pose3d &prediction) {
    Scan out;
    out.index = scan.index;
    out.points = scan.points;
    const Twist xi = prediction.Log();
    if (xi.squaredNorm() == 0.0) return out;
    for (auto &p : out.points) {
        p.position = Pose3d::Exp((p.stamp - 0.5) * xi) * p.position;
    }
    return out;
}

std::vector<LabeledPoint> VoxelDownsample(const std::vector<LabeledPoint> &points,
                                          double voxel_size) {
    std::unordered_set<Voxel, VoxelHash> occupied;
    occupied.reserve(points.size());
    std::vector<LabeledPoint> out;
    out.reserve(points.size());
    for (const auto &p : points) {
        if (occupied.insert(PointToVoxel(p.position, voxel_size)).second) out.push_back(p);
    }
    return out;
}

Scan VoxelDownsample(const Scan &scan, double voxel_size) {
    return Scan{scan.index, VoxelDownsample(scan.points, voxel_size)};
}

std::vector<LabeledPoint> TransformPoints(const Pose3d &pose,
                                          const std::vector<LabeledPoint> &points) {
    std::vector<LabeledPoint> out = points;
    for (auto &p : out) p.position = pose * p.position;
    return out;
}

}  // namespace semgraph
