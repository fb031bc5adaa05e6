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

#include <vector>

#include "semgraph/geometry.hpp"
#include "semgraph/types.hpp"

namespace semgraph {

// Motion-compensates a sweep. `prediction` is the sensor motion over one
// full sweep; every point is moved into the mid-sweep sensor frame.
Scan Deskew(const Scan &scan, const Pose3d &prediction);

// Keeps the first point (in scan order) of every occupied voxel.
Scan VoxelDownsample(const Scan &scan, double voxel_size);
std::vector<LabeledPoint> VoxelDownsample(const std::vector<LabeledPoint> &points,
                                          double voxel_size);

std::vector<LabeledPoint> TransformPoints(const Pose3d &pose,
                                          const std::vector<LabeledPoint> &points);

}  // namespace semgraph
