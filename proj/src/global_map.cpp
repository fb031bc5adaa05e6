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

#include "semgraph/global_map.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>

#include "semgraph/errors.hpp"
#include "semgraph/voxel.hpp"

namespace semgraph {

namespace {

struct Box {
    Eigen::Vector3d min;
    Eigen::Vector3d max;
};

Box TransformBox(const Pose3d &pose, const Eigen::Vector3d &lo, const Eigen::Vector3d &hi) {
    Box box{Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity()),
            Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity())};
    for (int corner = 0; corner < 8; ++corner) {
        const Eigen::Vector3d c((corner & 1) ? hi.x() : lo.x(), (corner & 2) ? hi.y() : lo.y(),
                                (corner & 4) ? hi.z() : lo.z());
        const Eigen::Vector3d t = pose * c;
        box.min = box.min.cwiseMin(t);
        box.max = box.max.cwiseMax(t);
    }
    return box;
}

}  // namespace

GlobalGraphMap::GlobalGraphMap(double merge_distance, double edge_radius)
    : merge_distance_(merge_distance), edge_radius_(edge_radius) {}

NodeId GlobalGraphMap::Resolve(NodeId id) const {
    auto it = aliases_.find(id);
    while (it != aliases_.end()) {
        id = it->second;
        it = aliases_.find(id);
    }
    return id;
}

void GlobalGraphMap::Absorb(std::size_t scan_index, const Pose3d &pose,
                            const SemanticGraph &sensor_graph, const std::vector<NodeId> &ids) {
    for (std::size_t i = 0; i < sensor_graph.nodes.size() && i < ids.size(); ++i) {
        const auto &local = sensor_graph.nodes[i];
        NodeObservation obs{scan_index, ids[i], local.centroid, local.bbox_min, local.bbox_max,
                            local.point_count};
        const Eigen::Vector3d world = pose * local.centroid;
        const Box box = TransformBox(pose, local.bbox_min, local.bbox_max);
        const NodeId id = Resolve(ids[i]);
        auto it = nodes_.find(id);
        if (it == nodes_.end()) {
            GlobalNode node;
            node.id = id;
            node.label = local.label;
            node.centroid = world;
            node.bbox_min = box.min;
            node.bbox_max = box.max;
            node.point_count = local.point_count;
            node.provenance.push_back(obs);
            nodes_.emplace(id, std::move(node));
            continue;
        }
        auto &node = it->second;
        const double n = static_cast<double>(node.provenance.size());
        node.centroid = (node.centroid * n + world) / (n + 1.0);
        node.bbox_min = node.bbox_min.cwiseMin(box.min);
        node.bbox_max = node.bbox_max.cwiseMax(box.max);
        node.point_count = std::max(node.point_count, local.point_count);
        node.provenance.push_back(obs);
    }
}

void GlobalGraphMap::Merge(NodeId from, NodeId into) {
    if (from == into) return;
    auto src = nodes_.find(from);
    auto dst = nodes_.find(into);
    if (src == nodes_.end() || dst == nodes_.end()) return;
    auto &a = src->second;
    auto &b = dst->second;
    const double na = static_cast<double>(a.provenance.size());
    const double nb = static_cast<double>(b.provenance.size());
    b.centroid = (a.centroid * na + b.centroid * nb) / (na + nb);
    b.bbox_min = b.bbox_min.cwiseMin(a.bbox_min);
    b.bbox_max = b.bbox_max.cwiseMax(a.bbox_max);
    b.point_count = std::max(a.point_count, b.point_count);
    b.provenance.insert(b.provenance.end(), a.provenance.begin(), a.provenance.end());
    std::sort(b.provenance.begin(), b.provenance.end(),
              [](const NodeObservation &x, const NodeObservation &y) {
                  return std::tie(x.scan_index, x.local_id) < std::tie(y.scan_index, y.local_id);
              });
    nodes_.erase(src);
    aliases_[from] = into;
}

std::size_t GlobalGraphMap::Reconcile(const std::vector<std::pair<NodeId, NodeId>> &pairs) {
    std::size_t merges = 0;
    for (const auto &[query_id, candidate_id] : pairs) {
        const NodeId from = Resolve(query_id);
        const NodeId into = Resolve(candidate_id);
        if (from == into) continue;
        const auto a = nodes_.find(from);
        const auto b = nodes_.find(into);
        if (a == nodes_.end() || b == nodes_.end() || a->second.label != b->second.label) continue;
        Merge(from, into);
        ++merges;
    }
    return merges + SuppressDuplicates();
}

std::size_t GlobalGraphMap::SuppressDuplicates() {
    std::size_t merges = 0;
    const double cell = std::max(merge_distance_, 1e-6);
    const double limit2 = merge_distance_ * merge_distance_;
    for (bool changed = true; changed;) {
        changed = false;
        std::unordered_map<Voxel, std::vector<NodeId>, VoxelHash> grid;
        for (const auto &[id, node] : nodes_) grid[PointToVoxel(node.centroid, cell)].push_back(id);
        // the closest same-class pair overall is merged first
        std::optional<std::pair<NodeId, NodeId>> best;
        double best_d2 = limit2;
        for (const auto &[id, node] : nodes_) {
            const Voxel v = PointToVoxel(node.centroid, cell);
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dz = -1; dz <= 1; ++dz) {
                        const auto it = grid.find(v + Voxel(dx, dy, dz));
                        if (it == grid.end()) continue;
                        for (NodeId other : it->second) {
                            if (other <= id) continue;
                            const auto &o = nodes_.at(other);
                            if (o.label != node.label) continue;
                            const double d2 = (o.centroid - node.centroid).squaredNorm();
                            if (d2 < best_d2) {
                                best_d2 = d2;
                                best = std::make_pair(other, id);
                            }
                        }
                    }
                }
            }
        }
        if (best) {
            Merge(best->first, best->second);
            ++merges;
            changed = true;
        }
    }
    return merges;
}

void GlobalGraphMap::Reanchor(const PoseLookup &pose_of) {
    for (auto &[id, node] : nodes_) {
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        Box box{Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity()),
                Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity())};
        int count = 0;
        for (const auto &obs : node.provenance) {
            const auto pose = pose_of(obs.scan_index);
            if (!pose) continue;
            sum += *pose * obs.centroid;
            const Box b = TransformBox(*pose, obs.bbox_min, obs.bbox_max);
            box.min = box.min.cwiseMin(b.min);
            box.max = box.max.cwiseMax(b.max);
            ++count;
        }
        if (count == 0) continue;
        node.centroid = sum / count;
        node.bbox_min = box.min;
        node.bbox_max = box.max;
    }
}

SemanticGraph GlobalGraphMap::Graph() const {
    SemanticGraph graph;
    graph.nodes.reserve(nodes_.size());
    for (const auto &[id, node] : nodes_) {
        InstanceNode out;
        out.id = id;
        out.label = node.label;
        out.centroid = node.centroid;
        out.bbox_min = node.bbox_min;
        out.bbox_max = node.bbox_max;
        out.point_count = node.point_count;
        out.observations = node.observations();
        graph.nodes.push_back(std::move(out));
    }
    graph.edges = BuildEdges(graph.nodes, edge_radius_);
    return graph;
}

void WriteGraphFile(const std::filesystem::path &path, const SemanticGraph &graph) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "semgraph-graph 1\n";
    out << "nodes " << graph.nodes.size() << "\n";
    out << "edges " << graph.edges.size() << "\n";
    char buffer[512];
    for (const auto &n : graph.nodes) {
        std::snprintf(buffer, sizeof(buffer),
                      "node %llu %s %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %zu %d\n",
                      static_cast<unsigned long long>(n.id), std::string(LabelName(n.label)).c_str(),
                      n.centroid.x(), n.centroid.y(), n.centroid.z(), n.bbox_min.x(),
                      n.bbox_min.y(), n.bbox_min.z(), n.bbox_max.x(), n.bbox_max.y(),
                      n.bbox_max.z(), n.point_count, n.observations);
        out << buffer;
    }
    for (const auto &e : graph.edges) {
        std::snprintf(buffer, sizeof(buffer), "edge %llu %llu %.6f\n",
                      static_cast<unsigned long long>(graph.nodes[e.a].id),
                      static_cast<unsigned long long>(graph.nodes[e.b].id), e.length);
        out << buffer;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

SemanticGraph ReadGraphFile(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    int version = 0;
    std::string key;
    std::size_t num_nodes = 0, num_edges = 0;
    if (!(in >> magic >> version) || magic != "semgraph-graph" ||
        !(in >> key >> num_nodes) || key != "nodes" || !(in >> key >> num_edges) ||
        key != "edges") {
        throw IoError("malformed graph header in " + path.string());
    }
    SemanticGraph graph;
    for (std::size_t i = 0; i < num_nodes; ++i) {
        InstanceNode n;
        std::string tag, label;
        unsigned long long id = 0;
        if (!(in >> tag >> id >> label >> n.centroid.x() >> n.centroid.y() >> n.centroid.z() >>
              n.bbox_min.x() >> n.bbox_min.y() >> n.bbox_min.z() >> n.bbox_max.x() >>
              n.bbox_max.y() >> n.bbox_max.z() >> n.point_count >> n.observations) ||
            tag != "node") {
            throw IoError("malformed node line in " + path.string());
        }
        n.id = id;
        n.label = LabelFromName(label);
        graph.nodes.push_back(std::move(n));
    }
    for (std::size_t i = 0; i < num_edges; ++i) {
        std::string tag;
        unsigned long long a = 0, b = 0;
        double length = 0.0;
        if (!(in >> tag >> a >> b >> length) || tag != "edge") {
            throw IoError("malformed edge line in " + path.string());
        }
        const auto ia = graph.IndexOf(a);
        const auto ib = graph.IndexOf(b);
        if (!ia || !ib) throw IoError("edge references unknown node in " + path.string());
        graph.edges.push_back({*ia, *ib, length});
    }
    return graph;
}

void WritePointCloud(const std::filesystem::path &path, const std::vector<LabeledPoint> &points) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << points.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property ushort label\nend_header\n";
    for (const auto &p : points) {
        const float xyz[3] = {static_cast<float>(p.position.x()), static_cast<float>(p.position.y()),
                              static_cast<float>(p.position.z())};
        const auto label = static_cast<std::uint16_t>(ToSemanticKittiId(p.label));
        out.write(reinterpret_cast<const char *>(xyz), sizeof(xyz));
        out.write(reinterpret_cast<const char *>(&label), sizeof(label));
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<LabeledPoint> ReadPointCloud(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t count = 0;
    bool header_ok = false;
    while (std::getline(in, line)) {
        if (line.rfind("element vertex ", 0) == 0) count = std::stoull(line.substr(15));
        if (line == "end_header") {
            header_ok = true;
            break;
        }
    }
    if (!header_ok) throw IoError("malformed point-cloud header in " + path.string());
    std::vector<LabeledPoint> points(count);
    for (auto &p : points) {
        float xyz[3];
        std::uint16_t label = 0;
        in.read(reinterpret_cast<char *>(xyz), sizeof(xyz));
        in.read(reinterpret_cast<char *>(&label), sizeof(label));
        if (!in) throw IoError("truncated point cloud " + path.string());
        p.position = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
        p.label = FromSemanticKittiId(label);
    }
    return points;
}

}  // namespace semgraph
