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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "scenarios.hpp"
#include "semgraph/errors.hpp"
#include "semgraph/global_map.hpp"
#include "semgraph/loop_closing.hpp"
#include "semgraph/metrics.hpp"
#include "semgraph/pose_graph.hpp"

namespace semgraph {
namespace {

using testing::RandomPose;
using testing::RotationError;
using testing::TempDir;
using testing::TranslationError;
using testing::Uniform;

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------- loop closing

SyntheticWorld SmallWorld(std::uint64_t seed, const std::vector<Eigen::Vector3d> &path) {
    WorldParams params;
    params.extent = 60.0;
    params.poles = 40;
    params.trunks = 25;
    params.vehicles = 12;
    params.buildings = 6;
    params.bushes = 10;
    params.seed = seed;
    return GenerateWorld(params, path);
}

TEST(ScanDescriptor, Examples) {
    const RunConfig config;
    const auto empty = EncodeScan(SemanticGraph{}, {}, config.graph_classes, config.descriptor,
                                  config.scan_descriptor);
    EXPECT_EQ(empty.norm(), 0.0);

    std::mt19937_64 rng(1);
    const Pose3d at = RotZ(0.7, Eigen::Vector3d(3, -2, 1.8));
    const auto world = SmallWorld(1, {at.translation()});
    const auto a = testing::KeyframeAt(world, at, 0, config, 0.0, rng);
    const auto b = testing::KeyframeAt(world, at, 0, config, 0.0, rng);
    EXPECT_EQ((a.descriptor - b.descriptor).norm(), 0.0);
    EXPECT_NEAR(a.descriptor.norm(), 1.0, 1e-12);
}

TEST(ScanDescriptorProperty, InvariantToYawAboutSensor) {
    const RunConfig config;
    std::mt19937_64 rng(2);
    const Pose3d at = RotZ(0.2, Eigen::Vector3d(0, 0, 1.8));
    const auto world = SmallWorld(2, {at.translation()});
    ScanParams scan_params;
    scan_params.motion_distortion = false;
    const auto points = GenerateScan(world, at, Pose3d(), 0, scan_params).scan.points;
    const auto encode = [&](const std::vector<LabeledPoint> &pts) {
        const auto graph = BuildSemanticGraph(pts, config);
        const auto background = BackgroundPoints(pts, config.graph_classes);
        return EncodeScan(graph, background, config.graph_classes, config.descriptor,
                          config.scan_descriptor);
    };
    const auto base = encode(points);
    for (int trial = 0; trial < 5; ++trial) {
        const auto rotated = TransformPoints(RotZ(Uniform(rng, -kPi, kPi)), points);
        EXPECT_LT((encode(rotated) - base).norm(), 1e-9);
    }
}

TEST(LoopDatabase, QueriesAndExclusion) {
    LoopDatabase empty(2);
    EXPECT_FALSE(empty.Query(Eigen::VectorXd::Ones(4)));

    std::mt19937_64 rng(3);
    LoopDatabase db(3);
    std::vector<Eigen::VectorXd> stored;
    for (std::size_t i = 0; i < 40; ++i) {
        KeyframeRecord r;
        r.scan_index = 5 * i;
        r.descriptor = Eigen::VectorXd::NullaryExpr(6, [&] { return Uniform(rng, 0, 1); }).normalized();
        stored.push_back(r.descriptor);
        db.Add(r);
        for (int q = 0; q < 5; ++q) {
            const Eigen::VectorXd query =
                Eigen::VectorXd::NullaryExpr(6, [&] { return Uniform(rng, 0, 1); }).normalized();
            const auto hit = db.Query(query);
            const std::size_t eligible = db.size() > 3 ? db.size() - 3 : 0;
            ASSERT_EQ(hit.has_value(), eligible > 0);
            if (!hit) continue;
            ASSERT_LT(hit->first, eligible);
            double best = 1e9;
            for (std::size_t k = 0; k < eligible; ++k) best = std::min(best, (stored[k] - query).norm());
            ASSERT_NEAR(hit->second, best, 1e-12);
        }
    }
    const auto self = db.Query(stored[10]);
    ASSERT_TRUE(self);
    EXPECT_EQ(self->first, 10u);
    EXPECT_EQ(self->second, 0.0);
}

TEST(LoopCloser, DescriptorGateSkipsVerification) {
    RunConfig config;
    config.loop_exclusion_keyframes = 0;
    LoopCloser closer(config);
    KeyframeRecord a;
    a.descriptor = Eigen::VectorXd::Unit(4, 0);
    KeyframeRecord b;
    b.scan_index = 5;
    b.descriptor = Eigen::VectorXd::Unit(4, 1);
    EXPECT_FALSE(closer.Process(a));
    EXPECT_FALSE(closer.Process(b));
    EXPECT_EQ(closer.verifications(), 0u);
    EXPECT_EQ(closer.database().size(), 2u);
}

TEST(LoopVerification, ExactCopyAndSymmetry) {
    const RunConfig config;
    const auto params = LoopParams::FromConfig(config);
    std::mt19937_64 rng(4);
    const Pose3d place = RotZ(0.3, Eigen::Vector3d(5, 5, 1.8));
    const auto world = SmallWorld(4, {place.translation()});
    const auto keyframe = testing::KeyframeAt(world, place, 0, config, 0.0, rng);
    const auto self = VerifyAndEstimate(keyframe, keyframe, 0.0, params, rng);
    EXPECT_TRUE(self.accepted);
    EXPECT_NEAR(self.graph_similarity, 1.0, 1e-12);
    EXPECT_NEAR(self.background_similarity, 1.0, 1e-12);
    EXPECT_LT(TranslationError(self.transform, Pose3d()), 1e-6);
    EXPECT_LT(RotationError(self.transform, Pose3d()), 1e-6);

    // swapping the roles inverts the transform
    const Pose3d offset = RotZ(0.2, Eigen::Vector3d(1.5, -0.8, 0));
    const Pose3d revisit = place * offset;
    const auto world2 = SmallWorld(5, {place.translation(), revisit.translation()});
    const auto c = testing::KeyframeAt(world2, place, 0, config, 0.0, rng);
    const auto q = testing::KeyframeAt(world2, revisit, 1, config, 0.0, rng);
    const double d = (q.descriptor - c.descriptor).norm();
    const auto forward = VerifyAndEstimate(q, c, d, params, rng);
    const auto backward = VerifyAndEstimate(c, q, d, params, rng);
    ASSERT_TRUE(forward.accepted);
    ASSERT_TRUE(backward.accepted);
    EXPECT_LT(TranslationError(forward.transform, offset), 0.05);
    EXPECT_LT(TranslationError(backward.transform.Inverse(), forward.transform), 0.05);
    EXPECT_LT(RotationError(backward.transform.Inverse(), forward.transform), 0.5 * kPi / 180);
}

TEST(LoopVerification, NoGraphMeansRejected) {
    const RunConfig config;
    const auto params = LoopParams::FromConfig(config);
    std::mt19937_64 rng(5);
    KeyframeRecord bare;
    bare.descriptor = Eigen::VectorXd::Unit(4, 0);
    const auto loop = VerifyAndEstimate(bare, bare, 0.0, params, rng);
    EXPECT_FALSE(loop.accepted);
}

// ------------------------------------------------------------------ pose graph

TEST(PoseGraph, StructuralContracts) {
    PoseGraph graph;
    for (int i = 0; i < 101; ++i) graph.AddVariable(Pose3d());
    EXPECT_EQ(graph.NumFactors(), 1u);  // the prior
    for (std::size_t i = 0; i + 1 < 101; ++i) graph.AddOdometryFactor(i, i + 1, Pose3d());
    const auto before = graph.NumFactors();
    EXPECT_TRUE(graph.AddLoopFactor(0, 100, Pose3d()));
    EXPECT_EQ(graph.NumFactors(), before + 1);
    EXPECT_FALSE(graph.AddLoopFactor(0, 100, Pose3d()));
    EXPECT_EQ(graph.NumFactors(), before + 1);
    EXPECT_EQ(graph.NumLoopFactors(), 1u);
    EXPECT_THROW(graph.AddLoopFactor(5, 5, Pose3d()), StructuralError);
    EXPECT_THROW(graph.AddLoopFactor(7, 3, Pose3d()), StructuralError);
    EXPECT_THROW(graph.AddOdometryFactor(3, 200, Pose3d()), StructuralError);
    EXPECT_THROW(graph.AddFactor({FactorKind::kPrior, 0, 3, Pose3d(), Matrix6d::Identity()}),
                 StructuralError);
    graph.Optimize();
    for (const auto &v : graph.values()) EXPECT_TRUE(v.Matrix().isIdentity(1e-12));

    PoseGraph split;
    split.AddVariable(Pose3d());
    split.AddVariable(Pose3d());
    EXPECT_THROW(split.Optimize(), StructuralError);
}

TEST(PoseGraph, PriorOnly) {
    const Pose3d p = RotZ(0.4, Eigen::Vector3d(1, 2, 3));
    PoseGraph graph;
    graph.AddVariable(p);
    graph.Optimize();
    EXPECT_TRUE(graph.value(0).Matrix().isApprox(p.Matrix(), 1e-12));
    EXPECT_LT(graph.Cost(), 1e-20);
}

TEST(PoseGraph, LinearizationMatchesFiniteDifferences) {
    std::mt19937_64 rng(6);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const Pose3d xi = RandomPose(rng, 10, 2.5), xj = RandomPose(rng, 10, 2.5);
        const Pose3d z = xi.Inverse() * xj * RandomPose(rng, 0.3, 0.3);
        const auto lin = LinearizeBetween(xi, xj, z);
        const auto residual = [&](const Pose3d &a, const Pose3d &b) {
            return (z.Inverse() * a.Inverse() * b).Log();
        };
        ASSERT_LT((lin.residual - residual(xi, xj)).norm(), 1e-12);
        Matrix6d ji, jj;
        for (int k = 0; k < 6; ++k) {
            Twist d = Twist::Zero();
            d[k] = h;
            ji.col(k) = (residual(xi * Pose3d::Exp(d), xj) - residual(xi * Pose3d::Exp(-d), xj)) / (2 * h);
            jj.col(k) = (residual(xi, xj * Pose3d::Exp(d)) - residual(xi, xj * Pose3d::Exp(-d))) / (2 * h);
        }
        ASSERT_LT((ji - lin.jacobian_i).norm(), 1e-5 * std::max(1.0, ji.norm()));
        ASSERT_LT((jj - lin.jacobian_j).norm(), 1e-5 * std::max(1.0, jj.norm()));

        const auto prior = LinearizePrior(xj, z);
        Matrix6d jp;
        for (int k = 0; k < 6; ++k) {
            Twist d = Twist::Zero();
            d[k] = h;
            jp.col(k) = ((z.Inverse() * xj * Pose3d::Exp(d)).Log() -
                         (z.Inverse() * xj * Pose3d::Exp(-d)).Log()) / (2 * h);
        }
        ASSERT_LT((jp - prior.jacobian_j).norm(), 1e-5 * std::max(1.0, jp.norm()));
    }
}

struct RandomGraphCase {
    std::vector<Pose3d> truth;
    PoseGraph graph;
};

RandomGraphCase MakeGraph(std::mt19937_64 &rng, std::size_t n, double noise) {
    RandomGraphCase c;
    c.truth.push_back(Pose3d());
    for (std::size_t i = 1; i < n; ++i) c.truth.push_back(c.truth.back() * RandomPose(rng, 2.0, 0.4));
    for (std::size_t i = 0; i < n; ++i) {
        c.graph.AddVariable(i == 0 ? c.truth[0] : c.truth[i] * RandomPose(rng, noise, noise / 5));
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        c.graph.AddOdometryFactor(i, i + 1, c.truth[i].Inverse() * c.truth[i + 1]);
    }
    for (int k = 0; k < 3 && n > 3; ++k) {
        const std::size_t i = rng() % (n - 2);
        const std::size_t j = i + 2 + rng() % (n - i - 2);
        c.graph.AddLoopFactor(i, j, c.truth[i].Inverse() * c.truth[j]);
    }
    return c;
}

TEST(PoseGraphProperty, ZeroResidualAndMonotoneCost) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        auto c = MakeGraph(rng, 2 + rng() % 19, 0.5);
        const auto summary = c.graph.Optimize(50, 1e-12);
        ASSERT_LT(summary.final_cost, 1e-10);
        for (std::size_t k = 1; k < summary.cost_history.size(); ++k) {
            ASSERT_LE(summary.cost_history[k], summary.cost_history[k - 1] * (1 + 1e-12));
        }
        for (std::size_t i = 0; i < c.truth.size(); ++i) {
            ASSERT_LT(TranslationError(c.graph.value(i), c.truth[i]), 1e-6);
        }
    }
}

TEST(PoseGraphProperty, GradientVanishesAtOptimum) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        // inconsistent measurements so the optimum has non-zero cost
        auto c = MakeGraph(rng, 3 + rng() % 10, 0.3);
        c.graph.AddLoopFactor(0, c.truth.size() - 1,
                              c.truth[0].Inverse() * c.truth.back() * RandomPose(rng, 0.5, 0.05));
        c.graph.Optimize(100, 1e-14);
        const double h = 1e-6;
        double grad2 = 0.0, scale = 0.0;
        for (std::size_t v = 0; v < c.graph.NumVariables(); ++v) {
            const Pose3d x = c.graph.value(v);
            for (int k = 0; k < 6; ++k) {
                Twist d = Twist::Zero();
                d[k] = h;
                c.graph.SetValue(v, x * Pose3d::Exp(d));
                const double up = c.graph.Cost();
                c.graph.SetValue(v, x * Pose3d::Exp(-d));
                const double down = c.graph.Cost();
                c.graph.SetValue(v, x);
                const double g = (up - down) / (2 * h);
                grad2 += g * g;
            }
        }
        scale = std::max(1.0, c.graph.Cost());
        EXPECT_LT(std::sqrt(grad2) / scale, 1e-4) << trial;
    }
}

TEST(PoseGraphProperty, GaugeShiftCarriesThrough) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        auto c = MakeGraph(rng, 8, 0.3);
        const Pose3d g = RandomPose(rng, 50, 3.0);
        PoseGraph shifted;
        for (std::size_t i = 0; i < c.graph.NumVariables(); ++i) shifted.AddVariable(g * c.graph.value(i));
        for (const auto &f : c.graph.factors()) {
            if (f.kind != FactorKind::kPrior) shifted.AddFactor(f);
        }
        c.graph.AddLoopFactor(0, 7, c.truth[0].Inverse() * c.truth[7] * RandomPose(rng, 0.4, 0.05));
        shifted.AddLoopFactor(0, 7, c.graph.factors().back().measurement);
        c.graph.Optimize(100, 1e-14);
        shifted.Optimize(100, 1e-14);
        EXPECT_NEAR(c.graph.Cost(), shifted.Cost(), 1e-9 * std::max(1.0, c.graph.Cost()));
        for (std::size_t i = 0; i < 8; ++i) {
            EXPECT_LT(TranslationError(g * c.graph.value(i), shifted.value(i)), 1e-6);
        }
    }
}

// ------------------------------------------------------------------ global map

SemanticGraph NodesAt(const std::vector<Eigen::Vector3d> &centroids, Label label = Label::kPole) {
    SemanticGraph g;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        InstanceNode n;
        n.id = i;
        n.label = label;
        n.centroid = centroids[i];
        n.bbox_min = centroids[i] - Eigen::Vector3d::Constant(0.1);
        n.bbox_max = centroids[i] + Eigen::Vector3d::Constant(0.1);
        n.point_count = 12;
        g.nodes.push_back(n);
    }
    return g;
}

TEST(GlobalMap, AbsorbCounts) {
    GlobalGraphMap map;
    std::vector<Eigen::Vector3d> five;
    for (int i = 0; i < 5; ++i) five.emplace_back(3.0 * i, 1, 0);
    map.Absorb(0, Pose3d(), NodesAt(five), {0, 1, 2, 3, 4});
    EXPECT_EQ(map.size(), 5u);
    map.Absorb(5, Pose3d(), NodesAt(five), {0, 1, 2, 3, 4});
    EXPECT_EQ(map.size(), 5u);
    for (const auto &[id, node] : map.nodes()) EXPECT_EQ(node.observations(), 2);
    map.Absorb(10, Pose3d(), NodesAt({{40, 0, 0}, {44, 0, 0}}), {5, 6});
    EXPECT_EQ(map.size(), 7u);
}

TEST(GlobalMap, ReconcileRevisit) {
    // ten nodes seen once, then again under a drifted pose with fresh ids
    std::vector<Eigen::Vector3d> block;
    for (int i = 0; i < 10; ++i) block.emplace_back(4.0 * (i % 5), 5.0 * (i / 5), 1);
    GlobalGraphMap map;
    std::vector<NodeId> first(10), second(10);
    std::iota(first.begin(), first.end(), NodeId{0});
    std::iota(second.begin(), second.end(), NodeId{100});
    map.Absorb(0, Pose3d(), NodesAt(block), first);
    const Pose3d drifted(Eigen::Vector3d(2.0, 0.0, 0.0));
    map.Absorb(50, drifted, NodesAt(block), second);
    ASSERT_EQ(map.size(), 20u);
    EXPECT_EQ(map.Reconcile({}), 0u);
    EXPECT_EQ(map.size(), 20u);

    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (int i = 0; i < 10; ++i) pairs.emplace_back(second[i], first[i]);
    EXPECT_EQ(map.Reconcile(pairs), 10u);
    EXPECT_EQ(map.size(), 10u);
    EXPECT_EQ(map.Resolve(105), 5u);
    // after optimisation the second visit lands on the first
    map.Reanchor([](std::size_t) { return std::optional<Pose3d>(Pose3d()); });
    for (const auto &[id, node] : map.nodes()) {
        EXPECT_LT((node.centroid - block[id]).norm(), 1e-12);
        EXPECT_EQ(node.observations(), 2);
    }
    EXPECT_EQ(map.Reconcile(pairs), 0u);
}

TEST(GlobalMapProperty, NoSameClassPairWithinMergeDistance) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 50; ++trial) {
        GlobalGraphMap map(0.5);
        std::vector<Eigen::Vector3d> points;
        for (int i = 0; i < 60; ++i) points.emplace_back(Uniform(rng, 0, 8), Uniform(rng, 0, 8), 0);
        auto graph = NodesAt(points);
        for (auto &n : graph.nodes) n.label = rng() % 2 ? Label::kPole : Label::kTrunk;
        std::vector<NodeId> ids(points.size());
        std::iota(ids.begin(), ids.end(), NodeId{0});
        map.Absorb(0, Pose3d(), graph, ids);
        map.SuppressDuplicates();
        for (const auto &[a, na] : map.nodes()) {
            for (const auto &[b, nb] : map.nodes()) {
                if (a < b && na.label == nb.label) {
                    ASSERT_GE((na.centroid - nb.centroid).norm(), 0.5);
                }
            }
        }
        std::size_t observations = 0;
        for (const auto &[id, node] : map.nodes()) observations += node.provenance.size();
        ASSERT_EQ(observations, points.size());
        for (auto id : ids) ASSERT_TRUE(map.nodes().count(map.Resolve(id)));
    }
}

TEST(GlobalMap, GraphFileRoundTrip) {
    TempDir dir;
    WriteGraphFile(dir.path() / "empty.txt", SemanticGraph{});
    EXPECT_TRUE(ReadGraphFile(dir.path() / "empty.txt").nodes.empty());
    std::ifstream in(dir.path() / "empty.txt");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "semgraph-graph 1");

    GlobalGraphMap map;
    map.Absorb(0, Pose3d(), NodesAt({{0, 0, 0}, {10, 0, 0}, {100, 0, 0}}), {0, 1, 2});
    const auto graph = map.Graph();
    WriteGraphFile(dir.path() / "g.txt", graph);
    const auto back = ReadGraphFile(dir.path() / "g.txt");
    ASSERT_EQ(back.nodes.size(), 3u);
    ASSERT_EQ(back.edges.size(), graph.edges.size());
    EXPECT_EQ(back.edges.size(), 1u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.nodes[i].id, graph.nodes[i].id);
        EXPECT_LT((back.nodes[i].centroid - graph.nodes[i].centroid).norm(), 1e-6);
    }
    std::ofstream(dir.path() / "bad.txt") << "not a graph\n";
    EXPECT_THROW(ReadGraphFile(dir.path() / "bad.txt"), IoError);
}

TEST(GlobalMap, PointCloudRoundTrip) {
    TempDir dir;
    std::vector<LabeledPoint> points(3);
    points[0].position = {1.5, -2.25, 0.125};
    points[0].label = Label::kPole;
    points[1].position = {100, 0, -3};
    points[1].label = Label::kRoad;
    points[2].position = {0, 0, 0};
    WritePointCloud(dir.path() / "c.ply", points);
    const auto back = ReadPointCloud(dir.path() / "c.ply");
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back[i].position, points[i].position);
        EXPECT_EQ(back[i].label, points[i].label);
    }
}

// --------------------------------------------------------------------- metrics

// Rigid alignment by exhaustive yaw search with centroid translation; valid
// for planar inputs.
double PlanarAteOracle(const std::vector<Eigen::Vector3d> &est, const std::vector<Eigen::Vector3d> &truth) {
    Eigen::Vector3d ce = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < est.size(); ++i) {
        ce += est[i] / static_cast<double>(est.size());
        ct += truth[i] / static_cast<double>(truth.size());
    }
    const auto rmse = [&](double yaw) {
        const Eigen::Matrix3d r = RotZ(yaw).rotation();
        double s = 0.0;
        for (std::size_t i = 0; i < est.size(); ++i) s += (r * (est[i] - ce) - (truth[i] - ct)).squaredNorm();
        return std::sqrt(s / static_cast<double>(est.size()));
    };
    double best_yaw = 0.0, best = rmse(0.0);
    for (int k = 0; k < 3600; ++k) {
        const double yaw = -kPi + k * (2 * kPi / 3600);
        if (const double v = rmse(yaw); v < best) {
            best = v;
            best_yaw = yaw;
        }
    }
    for (double step = 0.001; step > 1e-12; step /= 10) {
        const double center = best_yaw;
        for (int k = -200; k <= 200; ++k) {
            const double yaw = center + k * step;
            const double v = rmse(yaw);
            if (v < best) {
                best = v;
                best_yaw = yaw;
            }
        }
    }
    return best;
}

Trajectory Wrap(const std::vector<Pose3d> &poses) { return {poses.begin(), poses.end()}; }

TEST(Ate, Examples) {
    std::mt19937_64 rng(11);
    std::vector<Pose3d> truth;
    for (int i = 0; i < 20; ++i) truth.push_back(RandomPose(rng, 30, 3));
    EXPECT_LT(EvaluateAte(Wrap(truth), truth), 1e-12);
    const Pose3d g = RandomPose(rng, 100, 3);
    std::vector<Pose3d> shifted;
    for (const auto &p : truth) shifted.push_back(g * p);
    EXPECT_LT(EvaluateAte(Wrap(shifted), truth), 1e-9);
    EXPECT_THROW(EvaluateAte(Wrap({truth[0], truth[1]}), {truth[0], truth[1]}), DegenerateError);
}

TEST(Ate, UnitSquareAgainstAlignmentOracle) {
    const std::vector<Eigen::Vector3d> corners = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    auto moved = corners;
    moved[2].x() += 0.2;
    std::vector<Pose3d> truth;
    Trajectory est;
    for (std::size_t i = 0; i < 4; ++i) {
        truth.emplace_back(corners[i]);
        est.emplace_back(Pose3d(moved[i]));
    }
    const double ate = EvaluateAte(est, truth);
    EXPECT_NEAR(ate, PlanarAteOracle(moved, corners), 1e-6);
    // the unaligned error is exactly 0.1; alignment can only lower it
    EXPECT_LT(ate, 0.1);
}

TEST(AteProperty, MatchesOracleOnPlanarTrajectories) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Eigen::Vector3d> t, e;
        std::vector<Pose3d> truth;
        Trajectory est;
        const Pose3d g = RotZ(Uniform(rng, -kPi, kPi), Eigen::Vector3d(Uniform(rng, -5, 5), Uniform(rng, -5, 5), 0));
        for (int i = 0; i < 3 + static_cast<int>(rng() % 30); ++i) {
            t.emplace_back(Uniform(rng, -20, 20), Uniform(rng, -20, 20), 0);
            e.push_back(g * Eigen::Vector3d(t.back() + Eigen::Vector3d(Uniform(rng, -1, 1), Uniform(rng, -1, 1), 0)));
            truth.emplace_back(t.back());
            est.emplace_back(Pose3d(e.back()));
        }
        ASSERT_NEAR(EvaluateAte(est, truth), PlanarAteOracle(e, t), 1e-6);
    }
}

TEST(Rel, Examples) {
    std::vector<Pose3d> truth;
    for (int i = 0; i <= 800; ++i) truth.emplace_back(Eigen::Vector3d(i, 0, 0));
    EXPECT_NEAR(EvaluateRel(Wrap(truth), truth), 0.0, 1e-12);
    std::vector<Pose3d> scaled;
    for (const auto &p : truth) scaled.emplace_back(Eigen::Vector3d(1.01 * p.translation()));
    EXPECT_NEAR(EvaluateRel(Wrap(scaled), truth), 1.0, 0.05);

    // a gap invalidates exactly the segments that span it
    Trajectory gapped = Wrap(scaled);
    gapped[400] = std::nullopt;
    EXPECT_NEAR(EvaluateRel(gapped, truth), 1.0, 0.05);
    Trajectory mostly_invalid = Wrap(truth);
    for (std::size_t i = 50; i < mostly_invalid.size(); i += 50) mostly_invalid[i] = std::nullopt;
    EXPECT_THROW(EvaluateRel(mostly_invalid, truth), DegenerateError);

    std::vector<Pose3d> short_path(truth.begin(), truth.begin() + 50);
    EXPECT_THROW(EvaluateRel(Wrap(short_path), short_path), DegenerateError);
}

TEST(Timings, RunningMean) {
    Timings t;
    t.Add("x", 1.0);
    t.Add("x", 3.0);
    const auto &s = t.stages().at("x");
    EXPECT_EQ(s.count, 2u);
    EXPECT_DOUBLE_EQ(s.mean_ms, 2.0);
    EXPECT_EQ(s.max_ms, 3.0);
}

// -------------------------------------------------------------------- pipeline

TEST(BoundedQueue, FifoAcrossThreads) {
    BoundedQueue<int> queue(2);
    std::vector<int> got;
    std::thread consumer([&] {
        for (int i = 0; i < 100; ++i) got.push_back(queue.Pop());
    });
    for (int i = 0; i < 100; ++i) queue.Push(i);
    consumer.join();
    ASSERT_EQ(got.size(), 100u);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(got[i], i);
}

SyntheticSequence StraightSequence(std::size_t scans) {
    WorldParams world;
    world.extent = 60.0;
    world.seed = 21;
    TrajectoryParams t;
    t.kind = TrajectoryKind::kStraight;
    t.num_scans = scans;
    t.ramp_scans = 3;
    return SyntheticSequence(world, t, testing::CleanScans(25.0));
}

TEST(Pipeline, StraightPathWithoutLoops) {
    const auto sequence = StraightSequence(10);
    const RunConfig config;
    const auto result = testing::RunSequence(sequence, config);
    ASSERT_EQ(result.trajectory.size(), 10u);
    for (const auto &p : result.trajectory) EXPECT_TRUE(p.has_value());
    EXPECT_TRUE(result.loops.empty());
    EXPECT_EQ(result.lost_scans, 0u);
    const auto truth = testing::RelativeTruth(sequence.poses());
    EXPECT_LT(EvaluateAte(result.trajectory, truth), 0.05);
}

TEST(Pipeline, DroppedScansKeepTheirSlots) {
    const auto sequence = StraightSequence(30);
    RunConfig config;
    config.drop_run = 4;
    config.drop_window = 15;
    config.seed = 3;
    const auto result = testing::RunSequence(sequence, config);
    ASSERT_EQ(result.trajectory.size(), 30u);
    const auto kept = SimulateDroppedFrames(30, 4, 15, 3);
    EXPECT_EQ(result.processed, kept);
    const std::set<std::size_t> kept_set(kept.begin(), kept.end());
    for (std::size_t i = 0; i < 30; ++i) {
        if (!kept_set.count(i)) EXPECT_FALSE(result.trajectory[i].has_value()) << i;
    }
    // every invalid slot is either dropped or lost
    std::size_t invalid = 0;
    for (const auto &p : result.trajectory) invalid += !p.has_value();
    EXPECT_EQ(invalid, 30 - kept.size() + result.lost_scans);
}

TEST(Pipeline, DropsTriggerRelocalization) {
    const auto sequence = SyntheticSequence(
        [] {
            WorldParams w;
            w.extent = 60.0;
            w.seed = 22;
            return w;
        }(),
        testing::LoopTrajectory(60, 12, 10), testing::CleanScans(25.0));
    RunConfig config;
    config.drop_run = 10;
    config.drop_window = 200;
    config.seed = 1;
    const auto kept = SimulateDroppedFrames(60, 10, 200, 1);
    // the dropped run lies inside the sequence, after the first scan
    ASSERT_EQ(kept.front(), 0u);
    const auto result = testing::RunSequence(sequence, config);
    EXPECT_FALSE(result.relocalizations.empty());
    const auto log = RunLog(result);
    std::size_t events = 0;
    for (const auto &line : log) {
        const auto j = nlohmann::json::parse(line);
        events += j.at("event") == "relocalization";
    }
    EXPECT_EQ(events, result.relocalizations.size());
    EXPECT_EQ(nlohmann::json::parse(log.back()).at("event"), "summary");
}

TEST(Pipeline, OutputsAreWrittenAndDeterministic) {
    const auto sequence = StraightSequence(6);
    const RunConfig config;
    RunOptions options;
    options.single_thread = true;
    const auto load = [&](std::size_t i) { return sequence(i); };
    const auto a = RunSlam(config, sequence.size(), load, options);
    const auto b = RunSlam(config, sequence.size(), load, options);
    TempDir da, db;
    WriteOutputs(da.path(), a);
    WriteOutputs(db.path(), b);
    for (const char *name : {"trajectory.txt", "odometry.txt", "graph.txt", "map.ply"}) {
        std::ifstream fa(da.path() / name, std::ios::binary), fb(db.path() / name, std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        EXPECT_FALSE(sa.str().empty()) << name;
        EXPECT_EQ(sa.str(), sb.str()) << name;
    }
    EXPECT_TRUE(std::filesystem::exists(da.path() / "run_log.jsonl"));
    EXPECT_EQ(ReadTrajectory(da.path() / "trajectory.txt").size(), 6u);
}

TEST(Pipeline, SingleScanCloudIsTheDownsampledScan) {
    const auto sequence = StraightSequence(1);
    const RunConfig config;
    const auto load = [&](std::size_t i) { return sequence(i); };
    Trajectory one{Pose3d()};
    const auto cloud = BuildGlobalCloud(one, {Pose3d()}, load, config.voxel_size);
    const auto expected = VoxelDownsample(sequence(0).points, config.voxel_size);
    ASSERT_EQ(cloud.size(), expected.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_EQ(cloud[i].position, expected[i].position);
}

TEST(Pipeline, TwoScanCloudReprojects) {
    WorldParams world;
    world.extent = 60.0;
    world.seed = 23;
    TrajectoryParams t;
    t.kind = TrajectoryKind::kStraight;
    t.num_scans = 2;
    t.step = 2.0;
    ScanParams scan;
    scan.sensor_radius = 25.0;
    scan.motion_distortion = false;
    // fresh samples per scan, so overlap is a geometric and not a copy check
    scan.resample = true;
    const SyntheticSequence sequence(world, t, scan);
    const RunConfig config;
    const auto load = [&](std::size_t i) { return sequence(i); };
    const auto truth = testing::RelativeTruth(sequence.poses());
    const auto cloud = BuildGlobalCloud({truth[0], truth[1]}, {Pose3d(), Pose3d()}, load,
                                        config.voxel_size);
    VoxelHashMap first(config.voxel_size, 20, 1000.0);
    first.Insert(TransformPoints(truth[0], sequence(0).points));
    std::size_t near = 0, total = 0;
    for (const auto &p : TransformPoints(truth[1], sequence(1).points)) {
        if ((p.position - truth[0].translation()).norm() > 15.0) continue;
        ++total;
        near += first.NearestNeighbor(p.position, config.voxel_size).has_value();
    }
    ASSERT_GT(total, 100u);
    EXPECT_GT(static_cast<double>(near) / static_cast<double>(total), 0.95);
    const auto single = BuildGlobalCloud({truth[0]}, {Pose3d()}, load, config.voxel_size);
    EXPECT_GT(cloud.size(), single.size());
}

}  // namespace
}  // namespace semgraph
