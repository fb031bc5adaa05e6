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

#include "semgraph/semantic_graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "semgraph/voxel.hpp"

namespace semgraph {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t Find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void Union(std::size_t a, std::size_t b) {
        a = Find(a);
        b = Find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

double ClusterDistance(Label label, const ClusteringParams &params) {
    return label == Label::kVehicle ? params.vehicle_distance : params.pole_distance;
}

std::optional<std::size_t> ClassSlot(Label label, const std::vector<Label> &classes) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - classes.begin());
}

// Connected components of the radius graph over `points`.
std::vector<std::vector<std::size_t>> EuclideanComponents(
    const std::vector<Eigen::Vector3d> &points, double radius) {
    std::unordered_map<Voxel, std::vector<std::size_t>, VoxelHash> grid;
    for (std::size_t i = 0; i < points.size(); ++i) {
        grid[PointToVoxel(points[i], radius)].push_back(i);
    }
    DisjointSets sets(points.size());
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Voxel v = PointToVoxel(points[i], radius);
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dz = -1; dz <= 1; ++dz) {
                    const auto it = grid.find(v + Voxel(dx, dy, dz));
                    if (it == grid.end()) continue;
                    for (std::size_t j : it->second) {
                        if (j > i && (points[i] - points[j]).squaredNorm() <= r2) sets.Union(i, j);
                    }
                }
            }
        }
    }
    std::unordered_map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < points.size(); ++i) by_root[sets.Find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> components;
    components.reserve(by_root.size());
    for (auto &[root, members] : by_root) components.push_back(std::move(members));
    return components;
}

}  // namespace

std::optional<std::size_t> SemanticGraph::IndexOf(NodeId id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    return std::nullopt;
}

std::vector<InstanceNode> ClusterInstances(const std::vector<LabeledPoint> &points,
                                           const std::vector<Label> &graph_classes,
                                           const ClusteringParams &params) {
    std::vector<InstanceNode> nodes;
    for (const Label label : graph_classes) {
        std::vector<Eigen::Vector3d> members;
        for (const auto &p : points) {
            if (p.label == label) members.push_back(p.position);
        }
        if (members.empty()) continue;
        for (const auto &component : EuclideanComponents(members, ClusterDistance(label, params))) {
            if (static_cast<int>(component.size()) < params.min_points) continue;
            InstanceNode node;
            node.label = label;
            node.point_count = component.size();
            node.bbox_min = members[component.front()];
            node.bbox_max = node.bbox_min;
            Eigen::Vector3d sum = Eigen::Vector3d::Zero();
            for (std::size_t i : component) {
                sum += members[i];
                node.bbox_min = node.bbox_min.cwiseMin(members[i]);
                node.bbox_max = node.bbox_max.cwiseMax(members[i]);
            }
            node.centroid = sum / static_cast<double>(component.size());
            nodes.push_back(std::move(node));
        }
    }
    std::sort(nodes.begin(), nodes.end(), [](const InstanceNode &a, const InstanceNode &b) {
        return std::make_tuple(LabelIndex(a.label), a.centroid.x(), a.centroid.y(),
                               a.centroid.z()) < std::make_tuple(LabelIndex(b.label),
                                                                  b.centroid.x(), b.centroid.y(),
                                                                  b.centroid.z());
    });
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = i;
    return nodes;
}

std::vector<Edge> BuildEdges(const std::vector<InstanceNode> &nodes, double edge_radius) {
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            const double length = (nodes[a].centroid - nodes[b].centroid).norm();
            if (length <= edge_radius) edges.push_back({a, b, length});
        }
    }
    return edges;
}

int DescriptorSize(std::size_t num_classes, const DescriptorParams &params) {
    return static_cast<int>(num_classes) * (params.num_bins + 1);
}

Eigen::VectorXd ComputeDescriptor(const SemanticGraph &graph, std::size_t node_index,
                                  const std::vector<Label> &graph_classes,
                                  const DescriptorParams &params) {
    const std::size_t num_classes = graph_classes.size();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(DescriptorSize(num_classes, params));
    bool has_neighbor = false;
    for (const auto &edge : graph.edges) {
        if (edge.a != node_index && edge.b != node_index) continue;
        const std::size_t other = edge.a == node_index ? edge.b : edge.a;
        const auto slot = ClassSlot(graph.nodes[other].label, graph_classes);
        if (!slot) continue;
        const int bin = std::min(static_cast<int>(edge.length / params.bin_size),
                                 params.num_bins - 1);
        d[static_cast<Eigen::Index>(*slot) * params.num_bins + bin] += 1.0;
        has_neighbor = true;
    }
    if (!has_neighbor) return Eigen::VectorXd::Zero(d.size());
    if (const auto own = ClassSlot(graph.nodes[node_index].label, graph_classes)) {
        d[static_cast<Eigen::Index>(num_classes * params.num_bins + *own)] = 1.0;
    }
    return d.normalized();
}

void RefreshTopology(SemanticGraph &graph, const std::vector<Label> &graph_classes,
                     const DescriptorParams &params, double edge_radius) {
    graph.edges = BuildEdges(graph.nodes, edge_radius);
    // Single pass over the edges; equivalent to ComputeDescriptor per node.
    const std::size_t num_classes = graph_classes.size();
    const int size = DescriptorSize(num_classes, params);
    std::vector<Eigen::VectorXd> hist(graph.nodes.size(), Eigen::VectorXd::Zero(size));
    std::vector<bool> has_neighbor(graph.nodes.size(), false);
    for (const auto &edge : graph.edges) {
        const int bin = std::min(static_cast<int>(edge.length / params.bin_size),
                                 params.num_bins - 1);
        for (const auto &[self, other] : {std::pair{edge.a, edge.b}, std::pair{edge.b, edge.a}}) {
            const auto slot = ClassSlot(graph.nodes[other].label, graph_classes);
            if (!slot) continue;
            hist[self][static_cast<Eigen::Index>(*slot) * params.num_bins + bin] += 1.0;
            has_neighbor[self] = true;
        }
    }
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        if (has_neighbor[i]) {
            if (const auto own = ClassSlot(graph.nodes[i].label, graph_classes)) {
                hist[i][static_cast<Eigen::Index>(num_classes * params.num_bins + *own)] = 1.0;
            }
            hist[i].normalize();
        }
        graph.nodes[i].descriptor = std::move(hist[i]);
    }
}

SemanticGraph BuildSemanticGraph(const std::vector<LabeledPoint> &points,
                                 const RunConfig &config) {
    SemanticGraph graph;
    graph.nodes = ClusterInstances(points, config.graph_classes, config.clustering);
    RefreshTopology(graph, config.graph_classes, config.descriptor, config.edge_radius);
    return graph;
}

SemanticGraph TransformGraph(const Pose3d &pose, const SemanticGraph &graph) {
    SemanticGraph out = graph;
    for (auto &node : out.nodes) {
        node.centroid = pose * node.centroid;
        // axis-aligned box of the transformed corners
        Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
        Eigen::Vector3d hi = -lo;
        for (int corner = 0; corner < 8; ++corner) {
            const Eigen::Vector3d c((corner & 1) ? node.bbox_max.x() : node.bbox_min.x(),
                                    (corner & 2) ? node.bbox_max.y() : node.bbox_min.y(),
                                    (corner & 4) ? node.bbox_max.z() : node.bbox_min.z());
            const Eigen::Vector3d t = pose * c;
            lo = lo.cwiseMin(t);
            hi = hi.cwiseMax(t);
        }
        node.bbox_min = lo;
        node.bbox_max = hi;
    }
    return out;
}

std::vector<LabeledPoint> BackgroundPoints(const std::vector<LabeledPoint> &points,
                                           const std::vector<Label> &graph_classes) {
    std::vector<LabeledPoint> out;
    out.reserve(points.size());
    for (const auto &p : points) {
        if (std::find(graph_classes.begin(), graph_classes.end(), p.label) == graph_classes.end()) {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace semgraph
