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

#include <map>
#include <optional>
#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/geometry.hpp"
#include "semgraph/kdtree.hpp"
#include "semgraph/semantic_graph.hpp"

namespace semgraph {

struct NodeMatch {
    std::size_t current = 0;    // index into the query graph
    std::size_t reference = 0;  // index into the reference graph
    double distance = 0.0;      // descriptor distance
    bool pruned = false;
};

struct NodeMatchSet {
    std::vector<NodeMatch> pairs;

    std::vector<NodeMatch> Surviving() const;
    std::size_t NumSurviving() const;
};

// Per-class k-d trees over the node descriptors of a graph.
class DescriptorIndex {
public:
    DescriptorIndex() = default;
    explicit DescriptorIndex(const SemanticGraph &graph) { Build(graph); }

    void Build(const SemanticGraph &graph);

    // Up to k nearest nodes of the given class, as (graph index, distance).
    std::vector<std::pair<std::size_t, double>> Query(Label label,
                                                      const Eigen::VectorXd &descriptor,
                                                      std::size_t k) const;

private:
    std::map<Label, KdTree> trees_;
    std::map<Label, std::vector<std::size_t>> members_;
};

// Descriptor matching restricted to equal classes, one-to-one: a reference
// node claimed twice goes to the smaller descriptor distance and the loser
// falls back to its next candidate.
NodeMatchSet MatchNodes(const SemanticGraph &current, const SemanticGraph &reference,
                        const DescriptorIndex &index, int candidates);
NodeMatchSet MatchNodes(const SemanticGraph &current, const SemanticGraph &reference,
                        int candidates);

// Pairwise-distance consistency check: two pairs agree when the centroid
// distances on both sides differ by less than `slack`. Keeps a greedily grown
// mutually consistent set and flags the rest as pruned.
NodeMatchSet PruneOutliers(const NodeMatchSet &matches, const SemanticGraph &current,
                           const SemanticGraph &reference, double slack);

struct GraphMapUpdate {
    // Map id assigned to every node of the current graph.
    std::vector<NodeId> assigned;
    std::vector<NodeId> new_ids;
    std::vector<NodeId> updated_ids;
    std::vector<NodeId> evicted_ids;
};

// Local semantic graph map in world frame. Node ids are unique and stable;
// edges, descriptors and the descriptor index are rebuilt after each update.
class LocalGraphMap {
public:
    explicit LocalGraphMap(const RunConfig &config);

    // Matches and prunes a sensor-frame graph against the map.
    NodeMatchSet Match(const SemanticGraph &current) const;

    // Fuses a sensor-frame graph observed at `pose` into the map.
    GraphMapUpdate Update(const SemanticGraph &current, const Pose3d &pose,
                          const NodeMatchSet &matches);

    const SemanticGraph &graph() const { return graph_; }
    std::size_t size() const { return graph_.nodes.size(); }
    bool empty() const { return graph_.nodes.empty(); }
    NodeId next_id() const { return next_id_; }

private:
    void Rebuild();

    std::vector<Label> classes_;
    DescriptorParams descriptor_;
    double edge_radius_;
    double radius_;
    double association_radius_;
    double slack_;
    int candidates_;
    SemanticGraph graph_;
    DescriptorIndex index_;
    NodeId next_id_ = 0;
};

// Running-mean fusion of an observation into a node (bbox union).
void FuseNode(InstanceNode &node, const InstanceNode &observation);

}  // namespace semgraph
