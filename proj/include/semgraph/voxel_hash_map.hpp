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

#include <Eigen/Core>
#include <absl/container/flat_hash_map.h>
#include <optional>
#include <vector>

#include "semgraph/types.hpp"
#include "semgraph/voxel.hpp"

namespace semgraph {

struct Neighbor {
    Eigen::Vector3d point;
    Label label;
    double distance;
};

// Sparse local point map: integer voxel coordinates -> bounded bucket of
// world-frame points. Buckets are keyed by exact voxel coordinates, the hash
// only spreads them.
class VoxelHashMap {
public:
    VoxelHashMap(double voxel_size, int max_points_per_voxel, double max_distance);

    void Insert(const std::vector<LabeledPoint> &points);
    void Insert(const Eigen::Vector3d &point, Label label);

    // Closest stored point within max_dist of the query (exact).
    std::optional<Neighbor> NearestNeighbor(const Eigen::Vector3d &query, double max_dist) const;

    // Drops every voxel whose center is farther than max_distance from origin.
    void RemoveFarVoxels(const Eigen::Vector3d &origin);

    void Clear() {
        map_.clear();
        blocks_.clear();
    }
    bool Empty() const { return map_.empty(); }
    std::size_t NumVoxels() const { return map_.size(); }
    std::size_t NumPoints() const;
    std::vector<Eigen::Vector3d> Points() const;

    double voxel_size() const { return voxel_size_; }
    int max_points_per_voxel() const { return max_points_per_voxel_; }
    double max_distance() const { return max_distance_; }

    struct Bucket {
        std::vector<Eigen::Vector3d> points;
        std::vector<Label> labels;
    };
    using BucketMap = absl::flat_hash_map<Voxel, Bucket, VoxelHash>;
    const BucketMap &buckets() const { return map_; }

private:
    Eigen::Vector3d VoxelCenter(const Voxel &voxel) const;

    double voxel_size_;
    int max_points_per_voxel_;
    double max_distance_;
    double min_separation2_;
    BucketMap map_;
    absl::flat_hash_map<Voxel, int, VoxelHash> blocks_;  // voxel count per coarse block
};

}  // namespace semgraph
