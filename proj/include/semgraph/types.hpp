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
#include <cstdint>
#include <string_view>
#include <vector>

namespace semgraph {

enum class Label : std::uint8_t {
    kOther = 0,  // also used for unlabeled points
    kVehicle = 1,
    kPole = 2,
    kTrunk = 3,
    kBuilding = 4,
    kRoad = 5,
    kVegetation = 6,
};

inline constexpr int kNumLabels = 7;

inline constexpr int LabelIndex(Label label) { return static_cast<int>(label); }

std::string_view LabelName(Label label);
Label LabelFromName(std::string_view name);

// Maps a SemanticKITTI class id (low 16 bits of a .label entry) onto Label.
// Moving classes (>= 252) map to kOther.
Label FromSemanticKittiId(std::uint32_t class_id);
std::uint32_t ToSemanticKittiId(Label label);

struct LabeledPoint {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Label label = Label::kOther;
    // Fraction of the sweep in [0, 1] at which the point was measured.
    double stamp = 0.0;
};

struct Scan {
    std::size_t index = 0;
    std::vector<LabeledPoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

}  // namespace semgraph
