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

#include "semgraph/types.hpp"

#include <stdexcept>
#include <string>

#include "semgraph/errors.hpp"

namespace semgraph {

std::string_view LabelName(Label label) {
    switch (label) {
        case Label::kVehicle:
            return "vehicle";
        case Label::kPole:
            return "pole";
        case Label::kTrunk:
            return "trunk";
        case Label::kBuilding:
            return "building";
        case Label::kRoad:
            return "road";
        case Label::kVegetation:
            return "vegetation";
        case Label::kOther:
            break;
    }
    return "other";
}

Label LabelFromName(std::string_view name) {
    for (int i = 0; i < kNumLabels; ++i) {
        const auto label = static_cast<Label>(i);
        if (LabelName(label) == name) return label;
    }
    throw ConfigError("unknown label name '" + std::string(name) + "'");
}

Label FromSemanticKittiId(std::uint32_t class_id) {
    switch (class_id) {
        case 10:  // car
        case 13:  // bus
        case 16:  // on-rails
        case 18:  // truck
        case 20:  // other-vehicle
            return Label::kVehicle;
        case 80:  // pole
        case 81:  // traffic-sign
            return Label::kPole;
        case 71:
            return Label::kTrunk;
        case 50:  // building
        case 51:  // fence
        case 52:  // other-structure
            return Label::kBuilding;
        case 40:  // road
        case 44:  // parking
        case 48:  // sidewalk
        case 49:  // other-ground
        case 60:  // lane-marking
            return Label::kRoad;
        case 70:  // vegetation
        case 72:  // terrain
            return Label::kVegetation;
        default:
            return Label::kOther;
    }
}

std::uint32_t ToSemanticKittiId(Label label) {
    switch (label) {
        case Label::kVehicle:
            return 10;
        case Label::kPole:
            return 80;
        case Label::kTrunk:
            return 71;
        case Label::kBuilding:
            return 50;
        case Label::kRoad:
            return 40;
        case Label::kVegetation:
            return 70;
        case Label::kOther:
            break;
    }
    return 0;
}

}  // namespace semgraph
