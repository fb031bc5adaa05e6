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

#include <optional>
#include <random>
#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/geometry.hpp"
#include "semgraph/graph_map.hpp"
#include "semgraph/kdtree.hpp"
#include "semgraph/registration.hpp"
#include "semgraph/relocalization.hpp"
#include "semgraph/semantic_graph.hpp"

namespace semgraph {

// Snapshot of a keyframe in its own sensor frame.
struct KeyframeRecord {
    std::size_t scan_index = 0;
    Eigen::VectorXd descriptor;
    SemanticGraph graph;
    std::vector<NodeId> node_ids;      // local-map id of every graph node
    std::vector<LabeledPoint> points;  // downsampled cloud, all classes
    Pose3d pose;
};

// Three L2-normalised blocks, concatenated and normalised again:
// per-class node counts, class-pair edge-length histograms, and a
// height x range occupancy histogram of the background points.
Eigen::VectorXd EncodeScan(const SemanticGraph &graph, const std::vector<LabeledPoint> &background,
                           const std::vector<Label> &graph_classes,
                           const DescriptorParams &edge_bins,
                           const ScanDescriptorParams &params);

KeyframeRecord MakeKeyframe(std::size_t scan_index, const Pose3d &pose,
                            const std::vector<LabeledPoint> &points, SemanticGraph graph,
                            std::vector<NodeId> node_ids, const RunConfig &config);

// Keyframe descriptors with nearest-neighbour retrieval. The newest
// `exclusion` records are never returned.
class LoopDatabase {
public:
    explicit LoopDatabase(int exclusion = 50) : exclusion_(exclusion) {}

    void Add(KeyframeRecord record);

    // Nearest eligible record as (record position, descriptor distance).
    std::optional<std::pair<std::size_t, double>> Query(const Eigen::VectorXd &descriptor) const;

    const KeyframeRecord &record(std::size_t i) const { return records_[i]; }
    std::size_t size() const { return records_.size(); }
    int exclusion() const { return exclusion_; }

private:
    std::size_t Eligible() const;

    int exclusion_;
    std::vector<KeyframeRecord> records_;
    mutable KdTree tree_;
    mutable std::size_t indexed_ = 0;
};

struct LoopCandidate {
    std::size_t query_index = 0;
    std::size_t candidate_index = 0;
    std::size_t candidate_record = 0;  // position in the loop database
    double descriptor_distance = 0.0;
    double graph_similarity = 0.0;
    double background_similarity = 0.0;
    Pose3d transform;  // query sensor frame -> candidate sensor frame
    bool accepted = false;
    // Surviving node pairs (query graph index, candidate graph index) that
    // agree with the final transform.
    std::vector<std::pair<std::size_t, std::size_t>> node_pairs;
};

struct LoopParams {
    double descriptor_distance = 0.1;
    double graph_similarity = 0.5;
    double background_similarity = 0.58;
    double background_match_distance = 0.5;
    double consistency_slack = 0.4;
    int match_candidates = 3;
    std::vector<Label> graph_classes{Label::kVehicle, Label::kPole, Label::kTrunk};
    double voxel_size = 0.5;
    int max_points_per_voxel = 20;
    RelocalizationParams ransac;
    RegistrationParams icp;

    static LoopParams FromConfig(const RunConfig &config);
};

// Geometric verification of a retrieved pair: node matching and RANSAC give
// T_0 and the graph similarity, background overlap under T_0 gives the second
// score, and ICP refines T_0 into the loop transform.
LoopCandidate VerifyAndEstimate(const KeyframeRecord &query, const KeyframeRecord &candidate,
                                double descriptor_distance, const LoopParams &params,
                                std::mt19937_64 &rng);

// Database plus verification, one keyframe at a time.
class LoopCloser {
public:
    explicit LoopCloser(const RunConfig &config);

    // Queries with the keyframe, verifies a candidate that passes the
    // descriptor gate, then stores the keyframe.
    std::optional<LoopCandidate> Process(KeyframeRecord keyframe);

    const LoopDatabase &database() const { return database_; }
    std::size_t verifications() const { return verifications_; }

private:
    LoopParams params_;
    LoopDatabase database_;
    std::mt19937_64 rng_;
    std::size_t verifications_ = 0;
};

}  // namespace semgraph
