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
#include <optional>
#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/geometry.hpp"
#include "semgraph/types.hpp"

namespace semgraph {

using NodeId = std::uint64_t;

struct InstanceNode {
    NodeId id = 0;
    Label label = Label::kOther;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    Eigen::Vector3d bbox_min = Eigen::Vector3d::Zero();
    Eigen::Vector3d bbox_max = Eigen::Vector3d::Zero();
    std::size_t point_count = 0;
    Eigen::VectorXd descriptor;
    int observations = 1;
};

// Undirected proximity edge between nodes[a] and nodes[b] (a < b).
struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    double length = 0.0;
};

struct SemanticGraph {
    std::vector<InstanceNode> nodes;
    std::vector<Edge> edges;

    std::optional<std::size_t> IndexOf(NodeId id) const;
};

// Euclidean clustering of the points of each graph class; clusters below
// the minimum size are discarded. Node ids are 0..n-1 in a deterministic
// (label, centroid) order.
std::vector<InstanceNode> ClusterInstances(const std::vector<LabeledPoint> &points,
                                           const std::vector<Label> &graph_classes,
                                           const ClusteringParams &params);

std::vector<Edge> BuildEdges(const std::vector<InstanceNode> &nodes, double edge_radius);

int DescriptorSize(std::size_t num_classes, const DescriptorParams &params);

// Neighbour histogram over (neighbour class x distance bin) plus a one-hot
// of the node's own class, L2-normalised. Isolated nodes get a zero vector.
Eigen::VectorXd ComputeDescriptor(const SemanticGraph &graph, std::size_t node_index,
                                  const std::vector<Label> &graph_classes,
                                  const DescriptorParams &params);

// Rebuilds edges and every descriptor from the node set.
void RefreshTopology(SemanticGraph &graph, const std::vector<Label> &graph_classes,
                     const DescriptorParams &params, double edge_radius);

SemanticGraph BuildSemanticGraph(const std::vector<LabeledPoint> &points,
                                 const RunConfig &config);

SemanticGraph TransformGraph(const Pose3d &pose, const SemanticGraph &graph);

// Points whose label is not a graph class.
std::vector<LabeledPoint> BackgroundPoints(const std::vector<LabeledPoint> &points,
                                           const std::vector<Label> &graph_classes);

}  // namespace semgraph
