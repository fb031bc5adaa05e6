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

#include "semgraph/graph_map.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

namespace semgraph {

std::vector<NodeMatch> NodeMatchSet::Surviving() const {
    std::vector<NodeMatch> out;
    for (const auto &p : pairs) {
        if (!p.pruned) out.push_back(p);
    }
    return out;
}

std::size_t NodeMatchSet::NumSurviving() const {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const NodeMatch &p) { return !p.pruned; }));
}

void DescriptorIndex::Build(const SemanticGraph &graph) {
    trees_.clear();
    members_.clear();
    std::map<Label, std::vector<Eigen::VectorXd>> descriptors;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto &node = graph.nodes[i];
        descriptors[node.label].push_back(node.descriptor);
        members_[node.label].push_back(i);
    }
    for (auto &[label, points] : descriptors) trees_[label].Build(std::move(points));
}

std::vector<std::pair<std::size_t, double>> DescriptorIndex::Query(
    Label label, const Eigen::VectorXd &descriptor, std::size_t k) const {
    std::vector<std::pair<std::size_t, double>> out;
    const auto it = trees_.find(label);
    if (it == trees_.end()) return out;
    const auto &members = members_.at(label);
    for (const auto &r : it->second.Knn(descriptor, k)) {
        out.emplace_back(members[r.index], r.distance);
    }
    return out;
}

NodeMatchSet MatchNodes(const SemanticGraph &current, const SemanticGraph &reference,
                        const DescriptorIndex &index, int candidates) {
    NodeMatchSet result;
    if (current.nodes.empty() || reference.nodes.empty()) return result;

    std::vector<std::vector<std::pair<std::size_t, double>>> options(current.nodes.size());
    for (std::size_t i = 0; i < current.nodes.size(); ++i) {
        const auto &node = current.nodes[i];
        options[i] = index.Query(node.label, node.descriptor, static_cast<std::size_t>(candidates));
    }

    // Resolve conflicts in order of increasing descriptor distance, each
    // node taking its best still-free candidate.
    struct Proposal {
        double distance;
        std::size_t current;
        std::size_t rank;
    };
    std::vector<Proposal> queue;
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (!options[i].empty()) queue.push_back({options[i][0].second, i, 0});
    }
    std::vector<bool> taken(reference.nodes.size(), false);
    std::vector<std::optional<NodeMatch>> chosen(current.nodes.size());
    const auto order = [](const Proposal &a, const Proposal &b) {
        return std::tie(a.distance, a.current) > std::tie(b.distance, b.current);
    };
    std::make_heap(queue.begin(), queue.end(), order);
    while (!queue.empty()) {
        std::pop_heap(queue.begin(), queue.end(), order);
        const Proposal p = queue.back();
        queue.pop_back();
        const auto [ref, dist] = options[p.current][p.rank];
        if (!taken[ref]) {
            taken[ref] = true;
            chosen[p.current] = NodeMatch{p.current, ref, dist, false};
        } else if (p.rank + 1 < options[p.current].size()) {
            queue.push_back({options[p.current][p.rank + 1].second, p.current, p.rank + 1});
            std::push_heap(queue.begin(), queue.end(), order);
        }
    }
    for (const auto &m : chosen) {
        if (m) result.pairs.push_back(*m);
    }
    return result;
}

NodeMatchSet MatchNodes(const SemanticGraph &current, const SemanticGraph &reference,
                        int candidates) {
    return MatchNodes(current, reference, DescriptorIndex(reference), candidates);
}

NodeMatchSet PruneOutliers(const NodeMatchSet &matches, const SemanticGraph &current,
                           const SemanticGraph &reference, double slack) {
    NodeMatchSet out = matches;
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < out.pairs.size(); ++i) {
        if (!out.pairs[i].pruned) live.push_back(i);
    }
    if (live.size() < 2) return out;

    const std::size_t m = live.size();
    std::vector<std::vector<bool>> consistent(m, std::vector<bool>(m, false));
    for (std::size_t i = 0; i < m; ++i) {
        const auto &pi = out.pairs[live[i]];
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto &pj = out.pairs[live[j]];
            const double dc =
                (current.nodes[pi.current].centroid - current.nodes[pj.current].centroid).norm();
            const double dr = (reference.nodes[pi.reference].centroid -
                               reference.nodes[pj.reference].centroid)
                                  .norm();
            consistent[i][j] = consistent[j][i] = std::abs(dc - dr) < slack;
        }
    }

    // Greedy growth: among the pairs consistent with everything selected so
    // far, take the one with the most consistent partners inside that pool.
    std::vector<std::size_t> pool(m);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<bool> selected(m, false);
    while (!pool.empty()) {
        std::size_t best = pool.front();
        int best_degree = -1;
        for (std::size_t a : pool) {
            int degree = 0;
            for (std::size_t b : pool) degree += consistent[a][b] ? 1 : 0;
            if (degree > best_degree) {
                best_degree = degree;
                best = a;
            }
        }
        selected[best] = true;
        std::vector<std::size_t> next;
        for (std::size_t a : pool) {
            if (a != best && consistent[a][best]) next.push_back(a);
        }
        pool = std::move(next);
    }
    for (std::size_t i = 0; i < m; ++i) out.pairs[live[i]].pruned = !selected[i];
    return out;
}

void FuseNode(InstanceNode &node, const InstanceNode &observation) {
    const double n = static_cast<double>(node.observations);
    node.centroid = (node.centroid * n + observation.centroid) / (n + 1.0);
    node.bbox_min = node.bbox_min.cwiseMin(observation.bbox_min);
    node.bbox_max = node.bbox_max.cwiseMax(observation.bbox_max);
    node.point_count = std::max(node.point_count, observation.point_count);
    node.observations += 1;
}

LocalGraphMap::LocalGraphMap(const RunConfig &config)
    : classes_(config.graph_classes),
      descriptor_(config.descriptor),
      edge_radius_(config.edge_radius),
      radius_(config.local_map_radius),
      association_radius_(config.association_radius),
      slack_(config.consistency_slack),
      candidates_(config.match_candidates) {}

NodeMatchSet LocalGraphMap::Match(const SemanticGraph &current) const {
    const auto raw = MatchNodes(current, graph_, index_, candidates_);
    return PruneOutliers(raw, current, graph_, slack_);
}

GraphMapUpdate LocalGraphMap::Update(const SemanticGraph &current, const Pose3d &pose,
                                     const NodeMatchSet &matches) {
    GraphMapUpdate update;
    const SemanticGraph world = TransformGraph(pose, current);
    const std::size_t n = world.nodes.size();
    std::vector<std::optional<std::size_t>> target(n);
    std::vector<bool> claimed(graph_.nodes.size(), false);
    const double gate2 = association_radius_ * association_radius_;

    // Descriptor matches are kept when the pose agrees with them.
    for (const auto &m : matches.Surviving()) {
        if (m.current >= n || m.reference >= graph_.nodes.size() || claimed[m.reference]) continue;
        const double d2 =
            (world.nodes[m.current].centroid - graph_.nodes[m.reference].centroid).squaredNorm();
        if (d2 <= gate2) {
            target[m.current] = m.reference;
            claimed[m.reference] = true;
        }
    }
    // Remaining nodes: nearest unclaimed same-class map node inside the gate.
    for (std::size_t i = 0; i < n; ++i) {
        if (target[i]) continue;
        double best = gate2;
        std::optional<std::size_t> best_j;
        for (std::size_t j = 0; j < graph_.nodes.size(); ++j) {
            if (claimed[j] || graph_.nodes[j].label != world.nodes[i].label) continue;
            const double d2 = (world.nodes[i].centroid - graph_.nodes[j].centroid).squaredNorm();
            if (d2 <= best) {
                best = d2;
                best_j = j;
            }
        }
        if (best_j) {
            target[i] = best_j;
            claimed[*best_j] = true;
        }
    }

    update.assigned.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (target[i]) {
            auto &node = graph_.nodes[*target[i]];
            FuseNode(node, world.nodes[i]);
            update.assigned[i] = node.id;
            update.updated_ids.push_back(node.id);
        } else {
            InstanceNode node = world.nodes[i];
            node.id = next_id_++;
            node.observations = 1;
            update.assigned[i] = node.id;
            update.new_ids.push_back(node.id);
            graph_.nodes.push_back(std::move(node));
        }
    }

    const double radius2 = radius_ * radius_;
    std::erase_if(graph_.nodes, [&](const InstanceNode &node) {
        if ((node.centroid - pose.translation()).squaredNorm() <= radius2) return false;
        update.evicted_ids.push_back(node.id);
        return true;
    });
    Rebuild();
    return update;
}

void LocalGraphMap::Rebuild() {
    RefreshTopology(graph_, classes_, descriptor_, edge_radius_);
    index_.Build(graph_);
}

}  // namespace semgraph
