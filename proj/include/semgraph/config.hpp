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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semgraph/types.hpp"

namespace semgraph {

// Per-label residual weight used by the registration objective.
struct LabelWeights {
    std::array<double, kNumLabels> values{};

    static LabelWeights Defaults();
    double operator()(Label label) const { return values[LabelIndex(label)]; }
    double &operator[](Label label) { return values[LabelIndex(label)]; }
};

struct ClusteringParams {
    double vehicle_distance = 0.5;
    double pole_distance = 0.3;  // poles and trunks
    int min_points = 5;
};

struct DescriptorParams {
    double bin_size = 10.0;
    int num_bins = 6;
};

struct ScanDescriptorParams {
    int height_bins = 8;
    int range_bins = 8;
    double min_height = -3.0;
    double max_height = 15.0;
    double max_range = 80.0;
    double background_voxel = 1.0;
};

struct NoiseModel {
    double sigma_translation;
    double sigma_rotation;
};

// Every tunable of the system. Defaults reproduce the reference parameter
// table; see README.md for the YAML schema accepted by LoadConfig.
struct RunConfig {
    // preprocessing
    bool deskew = true;
    double voxel_size = 0.5;
    double min_range = 1.0;
    double max_range = 120.0;

    // local point map
    int max_points_per_voxel = 20;
    double local_map_radius = 100.0;

    // odometry
    double convergence_threshold = 1e-4;
    double max_correspondence_distance = 2.0;
    int max_iterations = 100;
    LabelWeights weights = LabelWeights::Defaults();

    // relocalization
    bool relocalization = true;
    double failure_translation = 0.12;
    double failure_rotation = 0.01;  // radians
    double inlier_distance = 0.2;
    double inlier_ratio = 0.43;
    int ransac_trials = 500;
    double ransac_early_exit_ratio = 0.8;

    // semantic graph
    std::vector<Label> graph_classes{Label::kVehicle, Label::kPole, Label::kTrunk};
    ClusteringParams clustering;
    DescriptorParams descriptor;
    double edge_radius = 60.0;
    int match_candidates = 3;
    double consistency_slack = 0.4;
    double association_radius = 1.0;

    // loop closing
    bool loop_closing = true;
    double loop_descriptor_distance = 0.1;
    double loop_graph_similarity = 0.5;
    double loop_background_similarity = 0.58;
    int keyframe_interval = 5;
    int loop_exclusion_keyframes = 50;
    double background_match_distance = 0.5;
    ScanDescriptorParams scan_descriptor;

    // pose graph
    NoiseModel odometry_noise{0.05, 0.005};
    NoiseModel loop_noise{0.1, 0.01};
    int optimizer_iterations = 50;
    double optimizer_tolerance = 1e-6;

    // global map
    double merge_distance = 0.5;

    // dropped-frame simulation; drop_run == 0 disables it
    int drop_run = 0;
    int drop_window = 200;
    std::uint64_t seed = 0;

    // runtime
    int queue_capacity = 8;
};

// Throws ConfigError when an invariant is violated.
void Validate(const RunConfig &config);

// Reads a YAML key/value file; unspecified keys keep their defaults.
RunConfig LoadConfig(const std::string &path);
RunConfig ParseConfig(const std::string &yaml_text);
// Overwrites the keys present in `yaml_text`; does not validate.
void ApplyConfig(RunConfig &config, const std::string &yaml_text);

}  // namespace semgraph
