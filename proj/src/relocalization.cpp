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

#include "semgraph/relocalization.hpp"

#include <algorithm>

#include "semgraph/errors.hpp"

namespace semgraph {

RelocalizationParams RelocalizationParams::FromConfig(const RunConfig &config) {
    RelocalizationParams p;
    p.inlier_distance = config.inlier_distance;
    p.inlier_ratio = config.inlier_ratio;
    p.trials = config.ransac_trials;
    p.early_exit_ratio = config.ransac_early_exit_ratio;
    return p;
}

namespace {

std::vector<std::size_t> Inliers(const Pose3d &pose, const std::vector<Eigen::Vector3d> &query,
                                 const std::vector<Eigen::Vector3d> &reference,
                                 double inlier_distance) {
    std::vector<std::size_t> inliers;
    const double t2 = inlier_distance * inlier_distance;
    for (std::size_t i = 0; i < query.size(); ++i) {
        if ((pose * query[i] - reference[i]).squaredNorm() < t2) inliers.push_back(i);
    }
    return inliers;
}

std::optional<Pose3d> Fit(const std::vector<Eigen::Vector3d> &query,
                          const std::vector<Eigen::Vector3d> &reference,
                          const std::vector<std::size_t> &subset) {
    std::vector<Eigen::Vector3d> s, t;
    for (std::size_t i : subset) {
        s.push_back(query[i]);
        t.push_back(reference[i]);
    }
    try {
        return SolveWeightedAlignment<double>(s, t, std::vector<double>(s.size(), 1.0));
    } catch (const DegenerateError &) {
        return std::nullopt;
    }
}

bool Collinear(const Eigen::Vector3d &a, const Eigen::Vector3d &b, const Eigen::Vector3d &c) {
    const Eigen::Vector3d u = b - a;
    const Eigen::Vector3d v = c - a;
    return u.cross(v).norm() <= 1e-6 * std::max(1.0, u.norm() * v.norm());
}

}  // namespace

double InlierRatio(const Pose3d &pose, const std::vector<Eigen::Vector3d> &query,
                   const std::vector<Eigen::Vector3d> &reference, double inlier_distance) {
    if (query.empty()) return 0.0;
    return static_cast<double>(Inliers(pose, query, reference, inlier_distance).size()) /
           static_cast<double>(query.size());
}

RelocalizationOutcome Relocalize(const std::vector<Eigen::Vector3d> &query,
                                 const std::vector<Eigen::Vector3d> &reference,
                                 const RelocalizationParams &params, std::mt19937_64 &rng) {
    RelocalizationOutcome outcome;
    const std::size_t m = query.size();
    if (m < 3 || reference.size() != m) return outcome;

    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::vector<std::size_t> best_inliers;
    Pose3d best_pose;
    // Collinear draws are redrawn, up to a bounded number of attempts.
    const int max_draws = params.trials * 10;
    int trials = 0;
    for (int draws = 0; draws < max_draws && trials < params.trials; ++draws) {
        const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
        if (a == b || b == c || a == c) continue;
        if (Collinear(query[a], query[b], query[c]) ||
            Collinear(reference[a], reference[b], reference[c])) {
            continue;
        }
        ++trials;
        const auto model = Fit(query, reference, {a, b, c});
        if (!model) continue;
        auto inliers = Inliers(*model, query, reference, params.inlier_distance);
        if (inliers.size() > best_inliers.size()) {
            best_inliers = std::move(inliers);
            best_pose = *model;
            if (static_cast<double>(best_inliers.size()) >= params.early_exit_ratio * m) break;
        }
    }
    if (best_inliers.size() < 3) {
        outcome.pose = best_pose;
        outcome.inliers = best_inliers.size();
        outcome.inlier_indices = best_inliers;
        outcome.inlier_ratio = static_cast<double>(best_inliers.size()) / m;
        return outcome;
    }

    if (const auto refit = Fit(query, reference, best_inliers)) {
        auto inliers = Inliers(*refit, query, reference, params.inlier_distance);
        if (inliers.size() >= best_inliers.size()) {
            best_pose = *refit;
            best_inliers = std::move(inliers);
        }
    }
    outcome.pose = best_pose;
    outcome.inliers = best_inliers.size();
    outcome.inlier_indices = std::move(best_inliers);
    outcome.inlier_ratio = static_cast<double>(outcome.inliers) / static_cast<double>(m);
    outcome.success = outcome.inlier_ratio > params.inlier_ratio;
    return outcome;
}

RelocalizationOutcome Relocalize(const NodeMatchSet &matches, const SemanticGraph &current,
                                 const SemanticGraph &reference,
                                 const RelocalizationParams &params, std::mt19937_64 &rng) {
    std::vector<Eigen::Vector3d> query, ref;
    for (const auto &m : matches.Surviving()) {
        query.push_back(current.nodes[m.current].centroid);
        ref.push_back(reference.nodes[m.reference].centroid);
    }
    return Relocalize(query, ref, params, rng);
}

RegistrationResult RefineAndResume(const std::vector<LabeledPoint> &scan,
                                   const Pose3d &relocalized, const VoxelHashMap &map,
                                   const RegistrationParams &params, double min_overlap) {
    auto result = RegisterScan(scan, map, relocalized, params);
    if (result.degenerate) return result;
    const double shift = (relocalized.Inverse() * result.pose).translation().norm();
    const double overlap =
        scan.empty() ? 0.0 : static_cast<double>(result.correspondences) / scan.size();
    result.failed = shift > params.max_correspondence_distance || overlap < min_overlap;
    return result;
}

std::vector<std::size_t> SimulateDroppedFrames(std::size_t num_scans, int run, int window,
                                               std::uint64_t seed) {
    std::vector<std::size_t> kept;
    kept.reserve(num_scans);
    if (run <= 0 || window <= 0) {
        for (std::size_t i = 0; i < num_scans; ++i) kept.push_back(i);
        return kept;
    }
    std::mt19937_64 rng(seed);
    const auto r = static_cast<std::size_t>(run);
    const auto w = static_cast<std::size_t>(window);
    for (std::size_t start = 0; start < num_scans; start += w) {
        const std::size_t length = std::min(w, num_scans - start);
        std::size_t drop_begin = length, drop_end = length;
        if (length > r) {
            std::uniform_int_distribution<std::size_t> offset(0, length - r);
            drop_begin = offset(rng);
            drop_end = drop_begin + r;
        }
        for (std::size_t i = 0; i < length; ++i) {
            if (i < drop_begin || i >= drop_end) kept.push_back(start + i);
        }
    }
    return kept;
}

}  // namespace semgraph
