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
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace semgraph {

using Voxel = Eigen::Vector3i;

inline Voxel PointToVoxel(const Eigen::Vector3d &point, double voxel_size) {
    return {static_cast<int>(std::floor(point.x() / voxel_size)),
            static_cast<int>(std::floor(point.y() / voxel_size)),
            static_cast<int>(std::floor(point.z() / voxel_size))};
}

struct VoxelHash {
    std::size_t operator()(const Voxel &voxel) const {
        const auto *v = reinterpret_cast<const std::uint32_t *>(voxel.data());
        std::uint64_t h = (static_cast<std::uint64_t>(v[0]) * 73856093u) ^
                          (static_cast<std::uint64_t>(v[1]) * 19349669u) ^
                          (static_cast<std::uint64_t>(v[2]) * 83492791u);
        // open-addressing tables use both low and high bits
        h ^= h >> 31;
        h *= 0xbf58476d1ce4e5b9ULL;
        h ^= h >> 29;
        return static_cast<std::size_t>(h);
    }
};

}  // namespace semgraph
