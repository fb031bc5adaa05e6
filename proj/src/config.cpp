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

#include "semgraph/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "semgraph/errors.hpp"

namespace semgraph {

LabelWeights LabelWeights::Defaults() {
    LabelWeights w;
    w.values.fill(1.0);
    w[Label::kPole] = 1.2;
    w[Label::kTrunk] = 1.2;
    return w;
}

namespace {

void RequirePositive(double value, const char *key) {
    if (!(value > 0.0)) {
        throw ConfigError(std::string(key) + " must be strictly positive");
    }
}

template <typename T>
T As(const YAML::Node &node, const std::string &key) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception &e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

using Setter = std::function<void(RunConfig &, const YAML::Node &, const std::string &)>;

template <typename T, typename Member>
Setter Field(Member member) {
    return [member](RunConfig &c, const YAML::Node &n, const std::string &key) {
        std::invoke(member, c) = As<T>(n, key);
    };
}

const std::map<std::string, Setter> &Setters() {
    static const std::map<std::string, Setter> setters = {
        {"deskew", Field<bool>(&RunConfig::deskew)},
        {"voxel_size", Field<double>(&RunConfig::voxel_size)},
        {"min_range", Field<double>(&RunConfig::min_range)},
        {"max_range", Field<double>(&RunConfig::max_range)},
        {"max_points_per_voxel", Field<int>(&RunConfig::max_points_per_voxel)},
        {"local_map_radius", Field<double>(&RunConfig::local_map_radius)},
        {"convergence_threshold", Field<double>(&RunConfig::convergence_threshold)},
        {"max_correspondence_distance", Field<double>(&RunConfig::max_correspondence_distance)},
        {"max_iterations", Field<int>(&RunConfig::max_iterations)},
        {"relocalization", Field<bool>(&RunConfig::relocalization)},
        {"failure_translation", Field<double>(&RunConfig::failure_translation)},
        {"failure_rotation", Field<double>(&RunConfig::failure_rotation)},
        {"inlier_distance", Field<double>(&RunConfig::inlier_distance)},
        {"inlier_ratio", Field<double>(&RunConfig::inlier_ratio)},
        {"ransac_trials", Field<int>(&RunConfig::ransac_trials)},
        {"ransac_early_exit_ratio", Field<double>(&RunConfig::ransac_early_exit_ratio)},
        {"edge_radius", Field<double>(&RunConfig::edge_radius)},
        {"match_candidates", Field<int>(&RunConfig::match_candidates)},
        {"consistency_slack", Field<double>(&RunConfig::consistency_slack)},
        {"association_radius", Field<double>(&RunConfig::association_radius)},
        {"loop_closing", Field<bool>(&RunConfig::loop_closing)},
        {"loop_descriptor_distance", Field<double>(&RunConfig::loop_descriptor_distance)},
        {"loop_graph_similarity", Field<double>(&RunConfig::loop_graph_similarity)},
        {"loop_background_similarity", Field<double>(&RunConfig::loop_background_similarity)},
        {"keyframe_interval", Field<int>(&RunConfig::keyframe_interval)},
        {"loop_exclusion_keyframes", Field<int>(&RunConfig::loop_exclusion_keyframes)},
        {"background_match_distance", Field<double>(&RunConfig::background_match_distance)},
        {"optimizer_iterations", Field<int>(&RunConfig::optimizer_iterations)},
        {"optimizer_tolerance", Field<double>(&RunConfig::optimizer_tolerance)},
        {"merge_distance", Field<double>(&RunConfig::merge_distance)},
        {"drop_run", Field<int>(&RunConfig::drop_run)},
        {"drop_window", Field<int>(&RunConfig::drop_window)},
        {"seed", Field<std::uint64_t>(&RunConfig::seed)},
        {"queue_capacity", Field<int>(&RunConfig::queue_capacity)},
        {"cluster_vehicle_distance",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.clustering.vehicle_distance = As<double>(n, k);
         }},
        {"cluster_pole_distance",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.clustering.pole_distance = As<double>(n, k);
         }},
        {"cluster_min_points",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.clustering.min_points = As<int>(n, k);
         }},
        {"descriptor_bin_size",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.descriptor.bin_size = As<double>(n, k);
         }},
        {"descriptor_num_bins",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.descriptor.num_bins = As<int>(n, k);
         }},
        {"odometry_sigma_translation",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.odometry_noise.sigma_translation = As<double>(n, k);
         }},
        {"odometry_sigma_rotation",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.odometry_noise.sigma_rotation = As<double>(n, k);
         }},
        {"loop_sigma_translation",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.loop_noise.sigma_translation = As<double>(n, k);
         }},
        {"loop_sigma_rotation",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             c.loop_noise.sigma_rotation = As<double>(n, k);
         }},
        {"graph_classes",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             if (!n.IsSequence()) throw ConfigError(k + " must be a list of label names");
             c.graph_classes.clear();
             for (const auto &item : n) {
                 c.graph_classes.push_back(LabelFromName(As<std::string>(item, k)));
             }
         }},
        {"weights",
         [](RunConfig &c, const YAML::Node &n, const std::string &k) {
             if (!n.IsMap()) throw ConfigError(k + " must map label names to weights");
             for (const auto &item : n) {
                 const auto label = LabelFromName(As<std::string>(item.first, k));
                 c.weights[label] = As<double>(item.second, k);
             }
         }},
    };
    return setters;
}

}  // namespace

void Validate(const RunConfig &c) {
    RequirePositive(c.voxel_size, "voxel_size");
    RequirePositive(c.min_range, "min_range");
    RequirePositive(c.max_range, "max_range");
    RequirePositive(c.max_points_per_voxel, "max_points_per_voxel");
    RequirePositive(c.local_map_radius, "local_map_radius");
    RequirePositive(c.convergence_threshold, "convergence_threshold");
    RequirePositive(c.max_correspondence_distance, "max_correspondence_distance");
    RequirePositive(c.max_iterations, "max_iterations");
    RequirePositive(c.failure_translation, "failure_translation");
    RequirePositive(c.failure_rotation, "failure_rotation");
    RequirePositive(c.inlier_distance, "inlier_distance");
    RequirePositive(c.ransac_trials, "ransac_trials");
    RequirePositive(c.edge_radius, "edge_radius");
    RequirePositive(c.match_candidates, "match_candidates");
    RequirePositive(c.consistency_slack, "consistency_slack");
    RequirePositive(c.association_radius, "association_radius");
    RequirePositive(c.loop_descriptor_distance, "loop_descriptor_distance");
    RequirePositive(c.loop_graph_similarity, "loop_graph_similarity");
    RequirePositive(c.loop_background_similarity, "loop_background_similarity");
    RequirePositive(c.keyframe_interval, "keyframe_interval");
    RequirePositive(c.background_match_distance, "background_match_distance");
    RequirePositive(c.merge_distance, "merge_distance");
    RequirePositive(c.queue_capacity, "queue_capacity");
    RequirePositive(c.clustering.vehicle_distance, "cluster_vehicle_distance");
    RequirePositive(c.clustering.pole_distance, "cluster_pole_distance");
    RequirePositive(c.clustering.min_points, "cluster_min_points");
    RequirePositive(c.descriptor.bin_size, "descriptor_bin_size");
    RequirePositive(c.descriptor.num_bins, "descriptor_num_bins");
    RequirePositive(c.odometry_noise.sigma_translation, "odometry_sigma_translation");
    RequirePositive(c.odometry_noise.sigma_rotation, "odometry_sigma_rotation");
    RequirePositive(c.loop_noise.sigma_translation, "loop_sigma_translation");
    RequirePositive(c.loop_noise.sigma_rotation, "loop_sigma_rotation");
    if (!(c.inlier_ratio > 0.0 && c.inlier_ratio <= 1.0)) {
        throw ConfigError("inlier_ratio must lie in (0, 1]");
    }
    if (c.min_range >= c.max_range) throw ConfigError("min_range must be below max_range");
    if (c.loop_exclusion_keyframes < 0) throw ConfigError("loop_exclusion_keyframes < 0");
    for (double w : c.weights.values) RequirePositive(w, "weights");
    if (c.graph_classes.empty()) throw ConfigError("graph_classes must not be empty");
    if (c.drop_run < 0 || (c.drop_run > 0 && c.drop_run >= c.drop_window)) {
        throw ConfigError("drop_run must satisfy 0 <= drop_run < drop_window");
    }
}

void ApplyConfig(RunConfig &config, const std::string &yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (root.IsNull()) return;
    if (!root.IsMap()) throw ConfigError("config root must be a key/value map");
    const auto &setters = Setters();
    for (const auto &item : root) {
        const auto key = As<std::string>(item.first, "key");
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(config, item.second, key);
    }
}

RunConfig ParseConfig(const std::string &yaml_text) {
    RunConfig config;
    ApplyConfig(config, yaml_text);
    Validate(config);
    return config;
}

RunConfig LoadConfig(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return ParseConfig(buffer.str());
}

}  // namespace semgraph
