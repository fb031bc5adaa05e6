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

#include "semgraph/pipeline.hpp"

#include <chrono>
#include <exception>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>
#include <unordered_set>

#include "semgraph/errors.hpp"
#include "semgraph/preprocess.hpp"
#include "semgraph/semantic_graph.hpp"
#include "semgraph/voxel.hpp"

namespace semgraph {

namespace {

class StageTimer {
public:
    StageTimer(Timings &timings, std::string stage)
        : timings_(timings), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        timings_.Add(stage_, std::chrono::duration<double, std::milli>(elapsed).count());
    }

private:
    Timings &timings_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

nlohmann::json PoseJson(const Pose3d &pose) {
    const auto m = pose.Matrix();
    nlohmann::json values = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) values.push_back(m(r, c));
    }
    return values;
}

}  // namespace

FrontEnd::FrontEnd(const RunConfig &config, const FrameShift *shift)
    : config_(config),
      shift_(shift),
      registration_(RegistrationParams::FromConfig(config)),
      relocalization_(RelocalizationParams::FromConfig(config)),
      map_(config.voxel_size, config.max_points_per_voxel, config.local_map_radius),
      graph_map_(config),
      rng_(config.seed) {}

std::optional<Pose3d> FrontEnd::Recover(const SemanticGraph &graph, std::size_t scan_index) {
    StageTimer timer(timings_, "relocalization");
    RelocalizationEvent event;
    event.scan_index = scan_index;
    std::optional<Pose3d> pose;
    if (!graph_map_.empty() && graph.nodes.size() >= 3) {
        const auto matches = graph_map_.Match(graph);
        const auto outcome =
            Relocalize(matches, graph, graph_map_.graph(), relocalization_, rng_);
        event.inlier_ratio = outcome.inlier_ratio;
        event.inliers = outcome.inliers;
        if (outcome.success) {
            const auto refined =
                RefineAndResume(last_points_, outcome.pose, map_, registration_);
            if (!refined.failed) pose = refined.pose;
        }
    }
    event.success = pose.has_value();
    relocalizations_.push_back(event);
    lost_ = !pose;
    if (pose) motion_.Reset(*pose);
    return pose;
}

ScanRecord FrontEnd::Process(const Scan &scan) {
    StageTimer total(timings_, "frontend");
    ScanRecord record;
    record.scan_index = scan.index;
    if (config_.deskew) record.sweep_motion = motion_.Velocity();
    if (shift_) record.map_from_odom = shift_->Read();

    Scan deskewed;
    {
        StageTimer timer(timings_, "preprocess");
        deskewed = Deskew(scan, record.sweep_motion);
        last_points_ = VoxelDownsample(deskewed.points, config_.voxel_size);
    }
    SemanticGraph graph;
    {
        StageTimer timer(timings_, "semantic_graph");
        graph = BuildSemanticGraph(deskewed.points, config_);
    }

    std::optional<Pose3d> pose;
    if (motion_.Empty()) {
        pose = Pose3d();
        motion_.Reset(*pose);
    } else if (lost_) {
        pose = Recover(graph, scan.index);
        record.relocalized = pose.has_value();
    } else {
        const Pose3d initial = motion_.Predict();
        RegistrationResult result;
        {
            StageTimer timer(timings_, "registration");
            result = RegisterScan(last_points_, map_, initial, registration_);
        }
        bool failed = result.degenerate;
        if (!failed && motion_.HasVelocity()) {
            failed = DetectFailure(initial, result.pose, config_.failure_translation,
                                   config_.failure_rotation)
                         .failed;
        }
        if (!config_.relocalization) {
            pose = result.degenerate ? initial : result.pose;
            motion_.Push(*pose);
        } else if (!failed) {
            pose = result.pose;
            motion_.Push(*pose);
        } else {
            pose = Recover(graph, scan.index);
            record.relocalized = pose.has_value();
        }
    }
    record.pose = pose;
    if (!pose) return record;

    {
        StageTimer timer(timings_, "map_update");
        map_.Insert(TransformPoints(*pose, last_points_));
        map_.RemoveFarVoxels(pose->translation());
        const auto matches = graph_map_.Match(graph);
        record.node_ids = graph_map_.Update(graph, *pose, matches).assigned;
    }
    record.graph = std::move(graph);
    return record;
}

BackEnd::BackEnd(const RunConfig &config, FrameShift *shift)
    : config_(config),
      shift_(shift),
      graph_(config.odometry_noise, config.loop_noise),
      loop_closer_(config),
      global_map_(config.merge_distance, config.edge_radius) {}

std::optional<Pose3d> BackEnd::Value(std::size_t scan_index) const {
    if (scan_index >= variable_of_.size() || !variable_of_[scan_index]) return std::nullopt;
    return graph_.value(*variable_of_[scan_index]);
}

void BackEnd::AddScan(const ScanRecord &record) {
    if (variable_of_.size() <= record.scan_index) variable_of_.resize(record.scan_index + 1);
    if (!record.pose) return;
    Pose3d initial = *record.pose;
    const std::size_t previous = graph_.NumVariables();
    Pose3d relative;
    if (previous > 0) {
        relative = odometry_[previous - 1].Inverse() * *record.pose;
        initial = graph_.value(previous - 1) * relative;
    }
    const std::size_t variable = graph_.AddVariable(initial);
    if (variable > 0) graph_.AddOdometryFactor(variable - 1, variable, relative);
    odometry_.push_back(*record.pose);
    scan_of_.push_back(record.scan_index);
    variable_of_[record.scan_index] = variable;
    global_map_.Absorb(record.scan_index, initial, record.graph, record.node_ids);
}

void BackEnd::Optimize() {
    StageTimer timer(timings_, "optimization");
    graph_.Optimize(config_.optimizer_iterations, config_.optimizer_tolerance);
    global_map_.Reanchor([this](std::size_t scan) { return Value(scan); });
    if (shift_ && graph_.NumVariables() > 0) {
        const std::size_t last = graph_.NumVariables() - 1;
        shift_->Publish(graph_.value(last) * odometry_[last].Inverse());
    }
}

void BackEnd::Handle(KeyframeMessage message) {
    StageTimer total(timings_, "backend");
    for (const auto &record : message.scans) AddScan(record);

    if (message.keyframe && config_.loop_closing) {
        auto &kf = *message.keyframe;
        if (kf.scan_index < variable_of_.size() && variable_of_[kf.scan_index]) {
            StageTimer timer(timings_, "loop_closing");
            ++loop_queries_;
            auto record = MakeKeyframe(kf.scan_index, kf.pose, kf.points, std::move(kf.graph),
                                       std::move(kf.node_ids), config_);
            const auto candidate = loop_closer_.Process(std::move(record));
            if (candidate) {
                LoopEvent event{*candidate, 0};
                if (candidate->accepted) {
                    const auto i = *variable_of_[candidate->candidate_index];
                    const auto j = *variable_of_[candidate->query_index];
                    graph_.AddLoopFactor(i, j, candidate->transform);
                    Optimize();
                    const auto &db = loop_closer_.database();
                    const auto &query = db.record(db.size() - 1);
                    const auto &reference = db.record(candidate->candidate_record);
                    std::vector<std::pair<NodeId, NodeId>> pairs;
                    for (const auto &[q, c] : candidate->node_pairs) {
                        pairs.emplace_back(query.node_ids[q], reference.node_ids[c]);
                    }
                    event.merged_nodes = global_map_.Reconcile(pairs);
                }
                loops_.push_back(std::move(event));
            }
        }
    }

    if (message.last && graph_.NumLoopFactors() > 0) {
        Optimize();
        global_map_.SuppressDuplicates();
    }
}

Trajectory BackEnd::Poses(std::size_t num_scans) const {
    Trajectory out(num_scans);
    for (std::size_t i = 0; i < num_scans; ++i) out[i] = Value(i);
    return out;
}

Trajectory BackEnd::OdometryPoses(std::size_t num_scans) const {
    Trajectory out(num_scans);
    for (std::size_t v = 0; v < scan_of_.size(); ++v) {
        if (scan_of_[v] < num_scans) out[scan_of_[v]] = odometry_[v];
    }
    return out;
}

SlamResult RunSlam(const RunConfig &config, std::size_t num_scans, const ScanLoader &load,
                   const RunOptions &options) {
    Validate(config);
    SlamResult result;
    result.processed =
        SimulateDroppedFrames(num_scans, config.drop_run, config.drop_window, config.seed);
    result.sweep_motions.assign(num_scans, Pose3d());

    FrameShift shift;
    FrontEnd front(config, &shift);
    BackEnd back(config, &shift);
    result.live.assign(num_scans, std::nullopt);
    const auto interval = static_cast<std::size_t>(config.keyframe_interval);

    // Runs the front end over every kept scan, emitting keyframe messages.
    const auto produce = [&](const std::function<void(KeyframeMessage)> &emit) {
        KeyframeMessage pending;
        for (const std::size_t index : result.processed) {
            Scan scan = load(index);
            scan.index = index;
            ScanRecord record = front.Process(scan);
            result.sweep_motions[index] = record.sweep_motion;
            if (record.pose) {
                result.live[index] = record.map_from_odom * *record.pose;
            } else {
                ++result.lost_scans;
            }
            const bool keyframe = record.pose && index % interval == 0;
            if (keyframe) {
                pending.keyframe = KeyframeSnapshot{index, *record.pose, record.graph,
                                                    record.node_ids, front.last_points()};
            }
            record.graph.edges.clear();
            pending.scans.push_back(std::move(record));
            if (keyframe) {
                emit(std::move(pending));
                pending = KeyframeMessage{};
            }
        }
        pending.last = true;
        emit(std::move(pending));
    };

    if (options.single_thread) {
        produce([&](KeyframeMessage message) { back.Handle(std::move(message)); });
    } else {
        BoundedQueue<KeyframeMessage> queue(static_cast<std::size_t>(config.queue_capacity));
        std::exception_ptr front_error, back_error;
        std::thread back_thread([&] {
            try {
                for (;;) {
                    KeyframeMessage message = queue.Pop();
                    const bool last = message.last;
                    if (!back_error) back.Handle(std::move(message));
                    if (last) break;
                }
            } catch (...) {
                back_error = std::current_exception();
                // keep draining so the producer never blocks forever
                for (;;) {
                    if (queue.Pop().last) break;
                }
            }
        });
        std::thread front_thread([&] {
            try {
                produce([&](KeyframeMessage message) { queue.Push(std::move(message)); });
            } catch (...) {
                front_error = std::current_exception();
                KeyframeMessage stop;
                stop.last = true;
                queue.Push(std::move(stop));
            }
        });
        front_thread.join();
        back_thread.join();
        if (front_error) std::rethrow_exception(front_error);
        if (back_error) std::rethrow_exception(back_error);
    }

    result.trajectory = back.Poses(num_scans);
    result.odometry = back.OdometryPoses(num_scans);
    result.graph = back.global_map().Graph();
    result.loops = back.loops();
    result.relocalizations = front.relocalizations();
    result.timings = front.timings();
    result.timings.Merge(back.timings());
    if (options.export_cloud) {
        result.cloud =
            BuildGlobalCloud(result.trajectory, result.sweep_motions, load, config.voxel_size);
    }
    return result;
}

std::vector<LabeledPoint> BuildGlobalCloud(const Trajectory &poses,
                                           const std::vector<Pose3d> &sweep_motions,
                                           const ScanLoader &load, double voxel_size) {
    std::unordered_set<Voxel, VoxelHash> occupied;
    std::vector<LabeledPoint> cloud;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        if (!poses[i]) continue;
        Scan scan = load(i);
        const Pose3d motion = i < sweep_motions.size() ? sweep_motions[i] : Pose3d();
        for (auto &p : Deskew(scan, motion).points) {
            p.position = *poses[i] * p.position;
            if (occupied.insert(PointToVoxel(p.position, voxel_size)).second) {
                cloud.push_back(p);
            }
        }
    }
    return cloud;
}

std::vector<std::string> RunLog(const SlamResult &result) {
    std::vector<std::string> lines;
    for (const auto &event : result.relocalizations) {
        lines.push_back(nlohmann::json{{"event", "relocalization"},
                                       {"scan", event.scan_index},
                                       {"success", event.success},
                                       {"inlier_ratio", event.inlier_ratio},
                                       {"inliers", event.inliers}}
                            .dump());
    }
    for (const auto &loop : result.loops) {
        const auto &c = loop.candidate;
        lines.push_back(nlohmann::json{{"event", "loop"},
                                       {"query", c.query_index},
                                       {"candidate", c.candidate_index},
                                       {"descriptor_distance", c.descriptor_distance},
                                       {"graph_similarity", c.graph_similarity},
                                       {"background_similarity", c.background_similarity},
                                       {"accepted", c.accepted},
                                       {"merged_nodes", loop.merged_nodes},
                                       {"transform", PoseJson(c.transform)}}
                            .dump());
    }
    nlohmann::json timings = nlohmann::json::object();
    for (const auto &[stage, t] : result.timings.stages()) {
        timings[stage] = {{"mean_ms", t.mean_ms}, {"max_ms", t.max_ms}, {"count", t.count}};
    }
    std::size_t valid = 0;
    for (const auto &pose : result.trajectory) valid += pose ? 1 : 0;
    lines.push_back(nlohmann::json{{"event", "summary"},
                                   {"scans", result.trajectory.size()},
                                   {"processed", result.processed.size()},
                                   {"valid_poses", valid},
                                   {"lost_scans", result.lost_scans},
                                   {"graph_nodes", result.graph.nodes.size()},
                                   {"timings", timings}}
                        .dump());
    return lines;
}

void WriteOutputs(const std::filesystem::path &dir, const SlamResult &result) {
    std::filesystem::create_directories(dir);
    WriteTrajectory(dir / "trajectory.txt", result.trajectory);
    WriteTrajectory(dir / "odometry.txt", result.odometry);
    WriteGraphFile(dir / "graph.txt", result.graph);
    WritePointCloud(dir / "map.ply", result.cloud);
    std::ofstream log(dir / "run_log.jsonl");
    if (!log) throw IoError("cannot write " + (dir / "run_log.jsonl").string());
    for (const auto &line : RunLog(result)) log << line << '\n';
}

}  // namespace semgraph
