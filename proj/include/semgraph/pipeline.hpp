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

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/geometry.hpp"
#include "semgraph/global_map.hpp"
#include "semgraph/graph_map.hpp"
#include "semgraph/io.hpp"
#include "semgraph/loop_closing.hpp"
#include "semgraph/metrics.hpp"
#include "semgraph/pose_graph.hpp"
#include "semgraph/registration.hpp"
#include "semgraph/relocalization.hpp"
#include "semgraph/voxel_hash_map.hpp"

namespace semgraph {

// Loads scan `index` (0-based, original numbering).
using ScanLoader = std::function<Scan(std::size_t index)>;

// Front-end outcome for one scan, in the odometry frame.
struct ScanRecord {
    std::size_t scan_index = 0;
    std::optional<Pose3d> pose;  // nullopt while tracking is lost
    bool relocalized = false;
    Pose3d sweep_motion;  // motion used for deskewing
    // Back-end correction in force when the scan was processed; the live
    // world-frame estimate is map_from_odom * pose.
    Pose3d map_from_odom;
    SemanticGraph graph;  // sensor frame
    std::vector<NodeId> node_ids;
};

struct KeyframeSnapshot {
    std::size_t scan_index = 0;
    Pose3d pose;
    SemanticGraph graph;
    std::vector<NodeId> node_ids;
    std::vector<LabeledPoint> points;  // deskewed, downsampled, sensor frame
};

// Everything the front end produced since the previous message. Messages
// are sent at keyframes and once more at the end of the sequence.
struct KeyframeMessage {
    std::vector<ScanRecord> scans;
    std::optional<KeyframeSnapshot> keyframe;
    bool last = false;
};

// Lossless bounded FIFO; Push blocks while the queue is full.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    void Push(T item) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_; });
        items_.push_back(std::move(item));
        not_empty_.notify_one();
    }

    T Pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !items_.empty(); });
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

private:
    std::size_t capacity_;
    std::deque<T> items_;
    std::mutex mutex_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
};

// map <- odom correction published by the back end after each optimisation
// and read by the front end at scan boundaries.
class FrameShift {
public:
    void Publish(const Pose3d &map_from_odom) {
        std::lock_guard lock(mutex_);
        map_from_odom_ = map_from_odom;
    }
    Pose3d Read() const {
        std::lock_guard lock(mutex_);
        return map_from_odom_;
    }

private:
    mutable std::mutex mutex_;
    Pose3d map_from_odom_;
};

struct RelocalizationEvent {
    std::size_t scan_index = 0;
    bool success = false;
    double inlier_ratio = 0.0;
    std::size_t inliers = 0;
};

// Preprocessing, odometry, graph tracking and relocalization.
class FrontEnd {
public:
    explicit FrontEnd(const RunConfig &config, const FrameShift *shift = nullptr);

    ScanRecord Process(const Scan &scan);

    // Deskewed and downsampled points of the last processed scan.
    const std::vector<LabeledPoint> &last_points() const { return last_points_; }
    const std::vector<RelocalizationEvent> &relocalizations() const { return relocalizations_; }
    const Timings &timings() const { return timings_; }
    const VoxelHashMap &local_map() const { return map_; }
    const LocalGraphMap &graph_map() const { return graph_map_; }
    bool lost() const { return lost_; }

private:
    std::optional<Pose3d> Recover(const SemanticGraph &graph, std::size_t scan_index);

    RunConfig config_;
    const FrameShift *shift_;
    RegistrationParams registration_;
    RelocalizationParams relocalization_;
    VoxelHashMap map_;
    LocalGraphMap graph_map_;
    MotionModel motion_;
    bool lost_ = false;
    std::mt19937_64 rng_;
    std::vector<LabeledPoint> last_points_;
    std::vector<RelocalizationEvent> relocalizations_;
    Timings timings_;
};

struct LoopEvent {
    LoopCandidate candidate;
    std::size_t merged_nodes = 0;
};

// Pose graph, loop closing and the global graph map.
class BackEnd {
public:
    BackEnd(const RunConfig &config, FrameShift *shift = nullptr);

    void Handle(KeyframeMessage message);

    // Optimised pose of every scan that has a variable.
    Trajectory Poses(std::size_t num_scans) const;
    // Front-end (odometry frame) pose of every tracked scan.
    Trajectory OdometryPoses(std::size_t num_scans) const;

    const GlobalGraphMap &global_map() const { return global_map_; }
    const PoseGraph &pose_graph() const { return graph_; }
    const std::vector<LoopEvent> &loops() const { return loops_; }
    std::size_t loop_queries() const { return loop_queries_; }
    const Timings &timings() const { return timings_; }
    std::optional<Pose3d> Value(std::size_t scan_index) const;

private:
    void AddScan(const ScanRecord &record);
    void Optimize();

    RunConfig config_;
    FrameShift *shift_;
    PoseGraph graph_;
    LoopCloser loop_closer_;
    GlobalGraphMap global_map_;
    std::vector<std::optional<std::size_t>> variable_of_;  // by scan index
    std::vector<Pose3d> odometry_;                          // by variable
    std::vector<std::size_t> scan_of_;                      // by variable
    std::vector<LoopEvent> loops_;
    std::size_t loop_queries_ = 0;
    Timings timings_;
};

struct RunOptions {
    bool single_thread = false;
    bool export_cloud = true;
};

struct SlamResult {
    Trajectory trajectory;  // optimised, one slot per input scan
    Trajectory odometry;    // front-end poses before any optimisation
    Trajectory live;        // front-end poses with the correction known at the time
    std::vector<std::size_t> processed;  // scan indices fed to the front end
    std::vector<Pose3d> sweep_motions;   // per scan, used for deskewing
    SemanticGraph graph;
    std::vector<LabeledPoint> cloud;
    std::vector<LoopEvent> loops;
    std::vector<RelocalizationEvent> relocalizations;
    std::size_t lost_scans = 0;
    Timings timings;
};

// Runs the whole system over scans 0..num_scans-1, after applying the
// configured dropped-frame simulation.
SlamResult RunSlam(const RunConfig &config, std::size_t num_scans, const ScanLoader &load,
                   const RunOptions &options = {});

// All valid scans deskewed, transformed by their poses and downsampled.
std::vector<LabeledPoint> BuildGlobalCloud(const Trajectory &poses,
                                           const std::vector<Pose3d> &sweep_motions,
                                           const ScanLoader &load, double voxel_size);

// One JSON object per line: loop events, relocalization events and a
// summary with per-stage timings.
std::vector<std::string> RunLog(const SlamResult &result);

// trajectory.txt, odometry.txt, graph.txt, map.ply and run_log.jsonl.
void WriteOutputs(const std::filesystem::path &dir, const SlamResult &result);

}  // namespace semgraph
