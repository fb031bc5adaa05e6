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

#include "semgraph/voxel_hash_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace semgraph {

VoxelHashMap::VoxelHashMap(double voxel_size, int max_points_per_voxel, double max_distance)
    : voxel_size_(voxel_size),
      max_points_per_voxel_(max_points_per_voxel),
      max_distance_(max_distance),
      min_separation2_(std::pow(voxel_size / 10.0, 2)) {}

namespace {

constexpr int kBlockVoxels = 4;

inline int FloorDiv(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

inline Voxel BlockOf(const Voxel &voxel) {
    return {FloorDiv(voxel.x(), kBlockVoxels), FloorDiv(voxel.y(), kBlockVoxels),
            FloorDiv(voxel.z(), kBlockVoxels)};
}

}  // namespace

void VoxelHashMap::Insert(const Eigen::Vector3d &point, Label label) {
    const Voxel voxel = PointToVoxel(point, voxel_size_);
    auto [it, created] = map_.try_emplace(voxel);
    if (created) ++blocks_[BlockOf(voxel)];
    auto &bucket = it->second;
    if (static_cast<int>(bucket.points.size()) >= max_points_per_voxel_) return;
    const bool crowded = std::any_of(bucket.points.cbegin(), bucket.points.cend(),
                                     [&](const Eigen::Vector3d &q) {
                                         return (q - point).squaredNorm() < min_separation2_;
                                     });
    if (crowded) return;
    bucket.points.push_back(point);
    bucket.labels.push_back(label);
}

void VoxelHashMap::Insert(const std::vector<LabeledPoint> &points) {
    for (const auto &p : points) Insert(p.position, p.label);
}

namespace {

struct Offset {
    Voxel delta;
    int bound;  // min squared distance in voxel units from any point of the center voxel
};

// Offsets of the (2k+1)^3 block sorted by their lower distance bound.
const std::vector<Offset> &SortedOffsets(int shells) {
    thread_local std::vector<std::vector<Offset>> cache;
    if (static_cast<int>(cache.size()) <= shells) cache.resize(shells + 1);
    auto &offsets = cache[shells];
    if (!offsets.empty()) return offsets;
    for (int dx = -shells; dx <= shells; ++dx) {
        for (int dy = -shells; dy <= shells; ++dy) {
            for (int dz = -shells; dz <= shells; ++dz) {
                int bound = 0;
                for (int d : {dx, dy, dz}) {
                    const int gap = std::max(std::abs(d) - 1, 0);
                    bound += gap * gap;
                }
                offsets.push_back({Voxel(dx, dy, dz), bound});
            }
        }
    }
    std::stable_sort(offsets.begin(), offsets.end(),
                     [](const Offset &a, const Offset &b) {
                         if (a.bound != b.bound) return a.bound < b.bound;
                         return a.delta.squaredNorm() < b.delta.squaredNorm();
                     });
    return offsets;
}

}  // namespace

std::optional<Neighbor> VoxelHashMap::NearestNeighbor(const Eigen::Vector3d &query,
                                                      double max_dist) const {
    if (map_.empty()) return std::nullopt;
    const Voxel center = PointToVoxel(query, voxel_size_);
    const int shells = static_cast<int>(std::ceil(max_dist / voxel_size_));
    const double max_dist2 = max_dist * max_dist;
    const double voxel2 = voxel_size_ * voxel_size_;

    // Squared gap along each axis between the query and the voxel at offset d.
    thread_local std::vector<double> gaps[3];
    for (int a = 0; a < 3; ++a) {
        gaps[a].resize(2 * shells + 1);
        const double within = query[a] - center[a] * voxel_size_;
        for (int d = -shells; d <= shells; ++d) {
            double g = 0.0;
            if (d > 0) g = d * voxel_size_ - within;
            if (d < 0) g = within - (d + 1) * voxel_size_;
            gaps[a][d + shells] = g * g;
        }
    }

    // Occupancy of the coarse blocks covering the search cube. Lets queries
    // far from any surface bail out after a handful of lookups.
    const Voxel block_lo = BlockOf(center - Voxel::Constant(shells));
    const Voxel block_hi = BlockOf(center + Voxel::Constant(shells));
    const Voxel block_dims = block_hi - block_lo + Voxel::Ones();
    std::array<bool, 64> occupied{};
    const bool use_blocks = block_dims.prod() <= static_cast<int>(occupied.size());
    if (use_blocks) {
        bool any = false;
        for (int x = 0; x < block_dims.x(); ++x) {
            for (int y = 0; y < block_dims.y(); ++y) {
                for (int z = 0; z < block_dims.z(); ++z) {
                    const bool hit = blocks_.contains(block_lo + Voxel(x, y, z));
                    occupied[(x * block_dims.y() + y) * block_dims.z() + z] = hit;
                    any = any || hit;
                }
            }
        }
        if (!any) return std::nullopt;
    }

    double best2 = std::numeric_limits<double>::infinity();
    const Eigen::Vector3d *best_point = nullptr;
    Label best_label = Label::kOther;

    for (const auto &offset : SortedOffsets(shells)) {
        const double bound2 = offset.bound * voxel2;
        if (bound2 >= best2 || bound2 > max_dist2) break;
        const Voxel &d = offset.delta;
        const double gap2 =
            gaps[0][d.x() + shells] + gaps[1][d.y() + shells] + gaps[2][d.z() + shells];
        if (gap2 >= best2 || gap2 > max_dist2) continue;
        const Voxel voxel = center + d;
        if (use_blocks) {
            const Voxel b = BlockOf(voxel) - block_lo;
            if (!occupied[(b.x() * block_dims.y() + b.y()) * block_dims.z() + b.z()]) continue;
        }
        const auto it = map_.find(voxel);
        if (it == map_.end()) continue;
        const auto &bucket = it->second;
        for (std::size_t i = 0; i < bucket.points.size(); ++i) {
            const double d2 = (bucket.points[i] - query).squaredNorm();
            if (d2 < best2) {
                best2 = d2;
                best_point = &bucket.points[i];
                best_label = bucket.labels[i];
            }
        }
    }

    if (best_point == nullptr || best2 > max_dist2) return std::nullopt;
    return Neighbor{*best_point, best_label, std::sqrt(best2)};
}

Eigen::Vector3d VoxelHashMap::VoxelCenter(const Voxel &voxel) const {
    return (voxel.cast<double>() + Eigen::Vector3d::Constant(0.5)) * voxel_size_;
}

void VoxelHashMap::RemoveFarVoxels(const Eigen::Vector3d &origin) {
    const double max2 = max_distance_ * max_distance_;
    absl::erase_if(map_, [&](const auto &entry) {
        if ((VoxelCenter(entry.first) - origin).squaredNorm() <= max2) return false;
        const auto block = blocks_.find(BlockOf(entry.first));
        if (--block->second == 0) blocks_.erase(block);
        return true;
    });
}

std::size_t VoxelHashMap::NumPoints() const {
    std::size_t n = 0;
    for (const auto &[voxel, bucket] : map_) n += bucket.points.size();
    return n;
}

std::vector<Eigen::Vector3d> VoxelHashMap::Points() const {
    std::vector<Eigen::Vector3d> points;
    points.reserve(NumPoints());
    for (const auto &[voxel, bucket] : map_) {
        points.insert(points.end(), bucket.points.begin(), bucket.points.end());
    }
    return points;
}

}  // namespace semgraph
