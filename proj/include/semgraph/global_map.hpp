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

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "semgraph/geometry.hpp"
#include "semgraph/semantic_graph.hpp"
#include "semgraph/types.hpp"

namespace semgraph {

// One sighting of a node, kept in the sensor frame of its scan so that the
// world attributes can be recomputed after pose-graph optimisation.
struct NodeObservation {
    std::size_t scan_index = 0;
    NodeId local_id = 0;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    Eigen::Vector3d bbox_min = Eigen::Vector3d::Zero();
    Eigen::Vector3d bbox_max = Eigen::Vector3d::Zero();
    std::size_t point_count = 0;
};

struct GlobalNode {
    NodeId id = 0;
    Label label = Label::kOther;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    Eigen::Vector3d bbox_min = Eigen::Vector3d::Zero();
    Eigen::Vector3d bbox_max = Eigen::Vector3d::Zero();
    std::size_t point_count = 0;
    std::vector<NodeObservation> provenance;

    int observations() const { return static_cast<int>(provenance.size()); }
};

using PoseLookup = std::function<std::optional<Pose3d>(std::size_t scan_index)>;

class GlobalGraphMap {
public:
    explicit GlobalGraphMap(double merge_distance = 0.5, double edge_radius = 60.0);

    // Adds the nodes of one scan. `ids` are the local-map ids assigned by
    // tracking; ids already known (or aliased) are fused, others appended.
    void Absorb(std::size_t scan_index, const Pose3d &pose, const SemanticGraph &sensor_graph,
                const std::vector<NodeId> &ids);

    // Merges every (query id, candidate id) pair of an accepted loop into the
    // candidate node, then removes remaining duplicates. Returns the number
    // of merges.
    std::size_t Reconcile(const std::vector<std::pair<NodeId, NodeId>> &pairs);

    // Merges same-class nodes closer than the merge distance until none are
    // left. Returns the number of merges.
    std::size_t SuppressDuplicates();

    // Recomputes world attributes from the provenance under new scan poses.
    void Reanchor(const PoseLookup &pose_of);

    NodeId Resolve(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }
    const std::map<NodeId, GlobalNode> &nodes() const { return nodes_; }

    // Nodes in id order with edges recomputed from the final positions.
    SemanticGraph Graph() const;

private:
    void Merge(NodeId from, NodeId into);

    double merge_distance_;
    double edge_radius_;
    std::map<NodeId, GlobalNode> nodes_;
    std::unordered_map<NodeId, NodeId> aliases_;
};

// Line-oriented text: a header, one "node" line per node, one "edge" line
// per edge.
void WriteGraphFile(const std::filesystem::path &path, const SemanticGraph &graph);
SemanticGraph ReadGraphFile(const std::filesystem::path &path);

// Binary little-endian PLY with float x, y, z and a ushort SemanticKITTI label.
void WritePointCloud(const std::filesystem::path &path, const std::vector<LabeledPoint> &points);
std::vector<LabeledPoint> ReadPointCloud(const std::filesystem::path &path);

}  // namespace semgraph
