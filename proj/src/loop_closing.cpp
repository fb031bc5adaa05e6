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

#include "semgraph/loop_closing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semgraph/preprocess.hpp"
#include "semgraph/voxel_hash_map.hpp"

namespace semgraph {

namespace {

std::optional<std::size_t> ClassSlot(Label label, const std::vector<Label> &classes) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - classes.begin());
}

// Index of the unordered pair (a, b), a <= b, among c classes.
std::size_t PairSlot(std::size_t a, std::size_t b, std::size_t c) {
    if (a > b) std::swap(a, b);
    return a * c - a * (a - 1) / 2 + (b - a);
}

void NormalizeBlock(Eigen::VectorXd &v, Eigen::Index begin, Eigen::Index size) {
    auto block = v.segment(begin, size);
    const double norm = block.norm();
    if (norm > 0.0) block /= norm;
}

}  // namespace

Eigen::VectorXd EncodeScan(const SemanticGraph &graph, const std::vector<LabeledPoint> &background,
                           const std::vector<Label> &graph_classes,
                           const DescriptorParams &edge_bins,
                           const ScanDescriptorParams &params) {
    const std::size_t c = graph_classes.size();
    const auto counts_size = static_cast<Eigen::Index>(c);
    const auto pairs_size = static_cast<Eigen::Index>(c * (c + 1) / 2 * edge_bins.num_bins);
    const auto background_size = static_cast<Eigen::Index>(params.height_bins * params.range_bins);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(counts_size + pairs_size + background_size);

    for (const auto &node : graph.nodes) {
        if (const auto slot = ClassSlot(node.label, graph_classes)) d[*slot] += 1.0;
    }
    for (const auto &edge : graph.edges) {
        const auto a = ClassSlot(graph.nodes[edge.a].label, graph_classes);
        const auto b = ClassSlot(graph.nodes[edge.b].label, graph_classes);
        if (!a || !b) continue;
        const int bin = std::min(static_cast<int>(edge.length / edge_bins.bin_size),
                                 edge_bins.num_bins - 1);
        d[counts_size + static_cast<Eigen::Index>(PairSlot(*a, *b, c) * edge_bins.num_bins) +
          bin] += 1.0;
    }
    const double height_step = (params.max_height - params.min_height) / params.height_bins;
    const double range_step = params.max_range / params.range_bins;
    for (const auto &p : background) {
        const double z = p.position.z();
        const double r = p.position.head<2>().norm();
        if (z < params.min_height || z >= params.max_height || r >= params.max_range) continue;
        const int hb = std::min(static_cast<int>((z - params.min_height) / height_step),
                                params.height_bins - 1);
        const int rb = std::min(static_cast<int>(r / range_step), params.range_bins - 1);
        d[counts_size + pairs_size + hb * params.range_bins + rb] += 1.0;
    }

    NormalizeBlock(d, 0, counts_size);
    NormalizeBlock(d, counts_size, pairs_size);
    NormalizeBlock(d, counts_size + pairs_size, background_size);
    const double norm = d.norm();
    if (norm > 0.0) d /= norm;
    return d;
}

KeyframeRecord MakeKeyframe(std::size_t scan_index, const Pose3d &pose,
                            const std::vector<LabeledPoint> &points, SemanticGraph graph,
                            std::vector<NodeId> node_ids, const RunConfig &config) {
    KeyframeRecord record;
    record.scan_index = scan_index;
    record.pose = pose;
    record.points = VoxelDownsample(points, config.voxel_size);
    const auto coarse = VoxelDownsample(points, config.scan_descriptor.background_voxel);
    record.descriptor = EncodeScan(graph, BackgroundPoints(coarse, config.graph_classes),
                                   config.graph_classes, config.descriptor,
                                   config.scan_descriptor);
    record.graph = std::move(graph);
    record.node_ids = std::move(node_ids);
    return record;
}

void LoopDatabase::Add(KeyframeRecord record) { records_.push_back(std::move(record)); }

std::size_t LoopDatabase::Eligible() const {
    const auto excluded = static_cast<std::size_t>(std::max(exclusion_, 0));
    return records_.size() > excluded ? records_.size() - excluded : 0;
}

std::optional<std::pair<std::size_t, double>> LoopDatabase::Query(
    const Eigen::VectorXd &descriptor) const {
    const std::size_t eligible = Eligible();
    if (eligible == 0) return std::nullopt;
    if (indexed_ != eligible) {
        std::vector<Eigen::VectorXd> descriptors;
        descriptors.reserve(eligible);
        for (std::size_t i = 0; i < eligible; ++i) descriptors.push_back(records_[i].descriptor);
        tree_.Build(std::move(descriptors));
        indexed_ = eligible;
    }
    const auto nearest = tree_.Knn(descriptor, 1);
    if (nearest.empty()) return std::nullopt;
    return std::make_pair(nearest.front().index, nearest.front().distance);
}

LoopParams LoopParams::FromConfig(const RunConfig &config) {
    LoopParams p;
    p.descriptor_distance = config.loop_descriptor_distance;
    p.graph_similarity = config.loop_graph_similarity;
    p.background_similarity = config.loop_background_similarity;
    p.background_match_distance = config.background_match_distance;
    p.consistency_slack = config.consistency_slack;
    p.match_candidates = config.match_candidates;
    p.graph_classes = config.graph_classes;
    p.voxel_size = config.voxel_size;
    p.max_points_per_voxel = config.max_points_per_voxel;
    p.ransac = RelocalizationParams::FromConfig(config);
    p.icp = RegistrationParams::FromConfig(config);
    return p;
}

LoopCandidate VerifyAndEstimate(const KeyframeRecord &query, const KeyframeRecord &candidate,
                                double descriptor_distance, const LoopParams &params,
                                std::mt19937_64 &rng) {
    LoopCandidate out;
    out.query_index = query.scan_index;
    out.candidate_index = candidate.scan_index;
    out.descriptor_distance = descriptor_distance;

    const NodeMatchSet raw = MatchNodes(query.graph, candidate.graph, params.match_candidates);
    if (raw.pairs.size() < 3) return out;
    const NodeMatchSet pruned =
        PruneOutliers(raw, query.graph, candidate.graph, params.consistency_slack);
    const auto ransac = Relocalize(pruned, query.graph, candidate.graph, params.ransac, rng);
    if (ransac.inliers < 3) return out;
    const Pose3d initial = ransac.pose;

    std::vector<Eigen::Vector3d> q, c;
    for (const auto &m : raw.pairs) {
        q.push_back(query.graph.nodes[m.current].centroid);
        c.push_back(candidate.graph.nodes[m.reference].centroid);
    }
    out.graph_similarity = InlierRatio(initial, q, c, params.ransac.inlier_distance);

    const auto query_background = BackgroundPoints(query.points, params.graph_classes);
    const auto candidate_background = BackgroundPoints(candidate.points, params.graph_classes);
    if (!query_background.empty()) {
        VoxelHashMap lookup(params.voxel_size, params.max_points_per_voxel,
                            std::numeric_limits<double>::infinity());
        lookup.Insert(candidate_background);
        std::size_t hits = 0;
        for (const auto &p : query_background) {
            if (lookup.NearestNeighbor(initial * p.position, params.background_match_distance)) {
                ++hits;
            }
        }
        out.background_similarity =
            static_cast<double>(hits) / static_cast<double>(query_background.size());
    }
    out.transform = initial;
    out.accepted = descriptor_distance < params.descriptor_distance &&
                   out.graph_similarity > params.graph_similarity &&
                   out.background_similarity > params.background_similarity;
    if (!out.accepted) return out;

    VoxelHashMap target(params.voxel_size, params.max_points_per_voxel,
                        std::numeric_limits<double>::infinity());
    target.Insert(candidate.points);
    const auto refined = RegisterScan(query.points, target, initial, params.icp);
    if (!refined.degenerate) out.transform = refined.pose;

    for (std::size_t i = 0; i < raw.pairs.size(); ++i) {
        if ((out.transform * q[i] - c[i]).norm() < params.ransac.inlier_distance) {
            out.node_pairs.emplace_back(raw.pairs[i].current, raw.pairs[i].reference);
        }
    }
    return out;
}

LoopCloser::LoopCloser(const RunConfig &config)
    : params_(LoopParams::FromConfig(config)),
      database_(config.loop_exclusion_keyframes),
      rng_(config.seed) {}

std::optional<LoopCandidate> LoopCloser::Process(KeyframeRecord keyframe) {
    std::optional<LoopCandidate> result;
    if (const auto hit = database_.Query(keyframe.descriptor)) {
        const auto [position, distance] = *hit;
        if (distance < params_.descriptor_distance) {
            ++verifications_;
            result = VerifyAndEstimate(keyframe, database_.record(position), distance, params_,
                                       rng_);
            result->candidate_record = position;
        }
    }
    database_.Add(std::move(keyframe));
    return result;
}

}  // namespace semgraph
