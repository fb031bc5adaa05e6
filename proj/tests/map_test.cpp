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
#include <limits>
#include <random>
#include <set>
#include <tuple>

#include "scenarios.hpp"
#include "semgraph/preprocess.hpp"
#include "semgraph/voxel_hash_map.hpp"

namespace semgraph {
namespace {

using testing::RandomPose;
using testing::Uniform;

LabeledPoint At(double x, double y, double z, double stamp = 0.0, Label label = Label::kOther) {
    LabeledPoint p;
    p.position = {x, y, z};
    p.stamp = stamp;
    p.label = label;
    return p;
}

Scan RandomScan(std::mt19937_64 &rng, std::size_t n, double extent) {
    Scan scan;
    for (std::size_t i = 0; i < n; ++i) {
        scan.points.push_back(At(Uniform(rng, -extent, extent), Uniform(rng, -extent, extent),
                                 Uniform(rng, -extent, extent), Uniform(rng, 0.0, 1.0),
                                 static_cast<Label>(rng() % kNumLabels)));
    }
    return scan;
}

TEST(Deskew, IdentityLeavesScanUnchanged) {
    std::mt19937_64 rng(1);
    const Scan scan = RandomScan(rng, 100, 20.0);
    const Scan out = Deskew(scan, Pose3d());
    for (std::size_t i = 0; i < scan.size(); ++i) {
        EXPECT_TRUE(out.points[i].position.isApprox(scan.points[i].position, 1e-15));
    }
}

TEST(Deskew, PureTranslationUsesMidSweepAnchor) {
    Scan scan;
    scan.points = {At(5, 0, 0, 1.0), At(5, 0, 0, 0.0), At(5, 0, 0, 0.5)};
    const Scan out = Deskew(scan, Pose3d(Eigen::Vector3d(1, 0, 0)));
    EXPECT_NEAR(out.points[0].position.x(), 5.5, 1e-12);
    EXPECT_NEAR(out.points[1].position.x(), 4.5, 1e-12);
    EXPECT_NEAR(out.points[2].position.x(), 5.0, 1e-12);
    EXPECT_NEAR((out.points[0].position - out.points[1].position).norm(), 1.0, 1e-12);
}

TEST(DeskewProperty, InverseDeskewRestoresInput) {
    // Re-distorting with the interpolated sensor pose is the inverse mapping.
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const Scan scan = RandomScan(rng, 200, 30.0);
        const Pose3d motion = RandomPose(rng, 2.0, 0.2);
        const Scan out = Deskew(scan, motion);
        const Pose3d half_inv = Interpolate(motion, 0.5).Inverse();
        for (std::size_t i = 0; i < scan.size(); ++i) {
            const Pose3d at = Interpolate(motion, scan.points[i].stamp);
            const Eigen::Vector3d back = (half_inv * at).Inverse() * out.points[i].position;
            ASSERT_LT((back - scan.points[i].position).norm(), 1e-9);
            ASSERT_EQ(out.points[i].label, scan.points[i].label);
        }
    }
}

TEST(Downsample, Examples) {
    Scan near;
    near.points = {At(0.1, 0.1, 0.1), At(0.2, 0.1, 0.1)};
    EXPECT_EQ(VoxelDownsample(near, 0.5).size(), 1u);
    Scan far;
    far.points = {At(0.1, 0.1, 0.1), At(10.1, 0.1, 0.1)};
    EXPECT_EQ(VoxelDownsample(far, 0.5).size(), 2u);
}

TEST(DownsampleProperty, MatchesVoxelEnumeration) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Scan scan;
        const Eigen::Vector3d corner(Uniform(rng, -10, 10), Uniform(rng, -10, 10), Uniform(rng, -10, 10));
        for (int i = 0; i < 1000; ++i) {
            scan.points.push_back(At(corner.x() + Uniform(rng, 0, 1), corner.y() + Uniform(rng, 0, 1),
                                     corner.z() + Uniform(rng, 0, 1)));
        }
        const Scan out = VoxelDownsample(scan, 0.5);
        // oracle: first point of every distinct voxel, in scan order
        std::set<std::tuple<int, int, int>> seen;
        std::vector<Eigen::Vector3d> expected;
        for (const auto &p : scan.points) {
            const auto key = std::make_tuple(static_cast<int>(std::floor(p.position.x() / 0.5)),
                                             static_cast<int>(std::floor(p.position.y() / 0.5)),
                                             static_cast<int>(std::floor(p.position.z() / 0.5)));
            if (seen.insert(key).second) expected.push_back(p.position);
        }
        EXPECT_LE(out.size(), 27u);
        ASSERT_EQ(out.size(), expected.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            ASSERT_EQ(out.points[i].position, expected[i]);
        }
        const Scan again = VoxelDownsample(scan, 0.5);
        for (std::size_t i = 0; i < out.size(); ++i) {
            ASSERT_EQ(again.points[i].position, out.points[i].position);
        }
    }
}

std::optional<Neighbor> BruteForce(const std::vector<std::pair<Eigen::Vector3d, Label>> &stored,
                                   const Eigen::Vector3d &q, double max_dist) {
    std::optional<Neighbor> best;
    for (const auto &[p, label] : stored) {
        const double d = (p - q).norm();
        if (d <= max_dist && (!best || d < best->distance)) best = Neighbor{p, label, d};
    }
    return best;
}

std::vector<std::pair<Eigen::Vector3d, Label>> Stored(const VoxelHashMap &map) {
    std::vector<std::pair<Eigen::Vector3d, Label>> out;
    for (const auto &[voxel, bucket] : map.buckets()) {
        for (std::size_t i = 0; i < bucket.points.size(); ++i) {
            out.emplace_back(bucket.points[i], bucket.labels[i]);
        }
    }
    return out;
}

TEST(VoxelMap, InsertContracts) {
    VoxelHashMap map(0.5, 20, 100.0);
    map.Insert(Eigen::Vector3d(0.1, 0.1, 0.1), Label::kPole);
    EXPECT_EQ(map.NumVoxels(), 1u);
    map.Insert(Eigen::Vector3d(0.1, 0.1, 0.1), Label::kPole);
    EXPECT_EQ(map.NumPoints(), 1u);

    VoxelHashMap full(1.0, 20, 100.0);
    // a 5x5 grid at 0.2 m spacing stays above the v/10 separation
    for (int i = 0; i < 25; ++i) {
        full.Insert(Eigen::Vector3d(0.1 + 0.2 * (i % 5), 0.1 + 0.2 * (i / 5), 0.5), Label::kRoad);
    }
    EXPECT_EQ(full.NumVoxels(), 1u);
    EXPECT_EQ(full.NumPoints(), 20u);
}

TEST(VoxelMap, NearestExamples) {
    VoxelHashMap map(0.5, 20, 100.0);
    EXPECT_FALSE(map.NearestNeighbor(Eigen::Vector3d::Zero(), 2.0));
    map.Insert(Eigen::Vector3d(0.3, 0, 0), Label::kTrunk);
    const auto n = map.NearestNeighbor(Eigen::Vector3d::Zero(), 2.0);
    ASSERT_TRUE(n);
    EXPECT_NEAR(n->distance, 0.3, 1e-15);
    EXPECT_EQ(n->label, Label::kTrunk);
    EXPECT_FALSE(map.NearestNeighbor(Eigen::Vector3d(5, 0, 0), 2.0));
}

TEST(VoxelMapProperty, NearestMatchesBruteForce) {
    std::mt19937_64 rng(4);
    {
        VoxelHashMap map(0.5, 20, 1000.0);
        map.Insert(RandomScan(rng, 10000, 25.0).points);
        const auto stored = Stored(map);
        for (int q = 0; q < 100; ++q) {
            const Eigen::Vector3d query(Uniform(rng, -30, 30), Uniform(rng, -30, 30), Uniform(rng, -30, 30));
            const auto got = map.NearestNeighbor(query, 2.0);
            const auto want = BruteForce(stored, query, 2.0);
            ASSERT_EQ(got.has_value(), want.has_value());
            if (got) ASSERT_EQ(got->distance, want->distance);
        }
    }
    for (int trial = 0; trial < 1000; ++trial) {
        const double v = Uniform(rng, 0.2, 1.5);
        const double extent = Uniform(rng, 1.0, 10.0);
        VoxelHashMap map(v, 1 + static_cast<int>(rng() % 20), 1000.0);
        map.Insert(RandomScan(rng, 1 + rng() % 300, extent).points);
        const auto stored = Stored(map);
        const Eigen::Vector3d query(Uniform(rng, -extent - 2, extent + 2),
                                    Uniform(rng, -extent - 2, extent + 2),
                                    Uniform(rng, -extent - 2, extent + 2));
        const double max_dist = Uniform(rng, 0.1, 4.0);
        const auto got = map.NearestNeighbor(query, max_dist);
        const auto want = BruteForce(stored, query, max_dist);
        ASSERT_EQ(got.has_value(), want.has_value()) << trial;
        if (got) {
            ASSERT_EQ(got->distance, want->distance) << trial;
            ASSERT_EQ(got->point, want->point) << trial;
        }
    }
}

TEST(VoxelMapProperty, BucketInvariants) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double v = Uniform(rng, 0.2, 1.0);
        const int cap = 1 + static_cast<int>(rng() % 20);
        VoxelHashMap map(v, cap, 1000.0);
        map.Insert(RandomScan(rng, 2000, 3.0).points);
        for (const auto &[voxel, bucket] : map.buckets()) {
            ASSERT_LE(bucket.points.size(), static_cast<std::size_t>(cap));
            ASSERT_EQ(bucket.points.size(), bucket.labels.size());
            for (const auto &p : bucket.points) ASSERT_EQ(PointToVoxel(p, v), voxel);
            for (std::size_t i = 0; i < bucket.points.size(); ++i) {
                for (std::size_t j = i + 1; j < bucket.points.size(); ++j) {
                    ASSERT_GE((bucket.points[i] - bucket.points[j]).norm(), v / 10);
                }
            }
        }
        // sparse: one entry per occupied voxel
        std::set<std::tuple<int, int, int>> occupied;
        for (const auto &p : map.Points()) {
            const Voxel k = PointToVoxel(p, v);
            occupied.emplace(k.x(), k.y(), k.z());
        }
        ASSERT_EQ(occupied.size(), map.NumVoxels());
    }
}

TEST(VoxelMap, TrimExamples) {
    VoxelHashMap map(0.5, 20, 100.0);
    map.Insert(Eigen::Vector3d(10, 0, 0), Label::kOther);
    map.Insert(Eigen::Vector3d(-50, 20, 0), Label::kOther);
    map.RemoveFarVoxels(Eigen::Vector3d::Zero());
    EXPECT_EQ(map.NumVoxels(), 2u);
    map.Insert(Eigen::Vector3d(150, 0, 0), Label::kOther);
    map.RemoveFarVoxels(Eigen::Vector3d::Zero());
    EXPECT_EQ(map.NumVoxels(), 2u);
    EXPECT_FALSE(map.NearestNeighbor(Eigen::Vector3d(150, 0, 0), 1.0));
}

TEST(VoxelMapProperty, TrimKeepsExactlyTheNearVoxels) {
    VoxelHashMap line(0.5, 20, 100.0);
    for (int i = -400; i <= 400; ++i) line.Insert(Eigen::Vector3d(0.25 * i + 0.1, 0.2, 0.2), Label::kRoad);
    line.RemoveFarVoxels(Eigen::Vector3d::Zero());
    double lo = 1e9, hi = -1e9;
    for (const auto &p : line.Points()) {
        lo = std::min(lo, p.x());
        hi = std::max(hi, p.x());
    }
    EXPECT_LE(hi - lo, 200.0);

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        const double d_max = Uniform(rng, 5.0, 20.0);
        VoxelHashMap map(0.5, 5, d_max);
        const auto points = RandomScan(rng, 3000, 25.0).points;
        map.Insert(points);
        const Eigen::Vector3d center(Uniform(rng, -5, 5), Uniform(rng, -5, 5), 0);
        std::size_t expected = 0;
        for (const auto &[voxel, bucket] : map.buckets()) {
            const Eigen::Vector3d c = (voxel.cast<double>() + Eigen::Vector3d::Constant(0.5)) * 0.5;
            expected += (c - center).norm() <= d_max;
        }
        map.RemoveFarVoxels(center);
        ASSERT_EQ(map.NumVoxels(), expected);
        for (const auto &[voxel, bucket] : map.buckets()) {
            const Eigen::Vector3d c = (voxel.cast<double>() + Eigen::Vector3d::Constant(0.5)) * 0.5;
            ASSERT_LE((c - center).norm(), d_max);
        }
        // idempotent under repetition
        const auto before = map.NumPoints();
        map.Insert(points);
        map.RemoveFarVoxels(center);
        map.Insert(points);
        map.RemoveFarVoxels(center);
        ASSERT_EQ(map.NumPoints(), before);
        // nearest neighbour still agrees with brute force after trimming
        const auto stored = Stored(map);
        for (int q = 0; q < 20; ++q) {
            const Eigen::Vector3d query(Uniform(rng, -25, 25), Uniform(rng, -25, 25), Uniform(rng, -25, 25));
            const auto got = map.NearestNeighbor(query, 2.0);
            const auto want = BruteForce(stored, query, 2.0);
            ASSERT_EQ(got.has_value(), want.has_value());
            if (got) ASSERT_EQ(got->distance, want->distance);
        }
    }
}

}  // namespace
}  // namespace semgraph
