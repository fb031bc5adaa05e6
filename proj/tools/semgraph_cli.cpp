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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/errors.hpp"
#include "semgraph/io.hpp"
#include "semgraph/metrics.hpp"
#include "semgraph/pipeline.hpp"
#include "semgraph/relocalization.hpp"
#include "semgraph/synthetic.hpp"

namespace fs = std::filesystem;
using namespace semgraph;

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kIo = 3,
    kConfig = 4,
    kDegenerate = 5,
    kStructural = 6,
};

struct RunArgs {
    std::string config_file;
    std::vector<std::string> overrides;
    std::string scans;
    std::string labels;
    std::string groundtruth;
    std::string calib;
    std::string output = "out";
    std::size_t max_scans = 0;
    bool single_thread = false;
    bool no_cloud = false;
    // direct flags for the most common keys
    std::optional<bool> relocalization;
    std::optional<bool> loop_closing;
    std::optional<int> drop_run;
    std::optional<int> drop_window;
    std::optional<std::uint64_t> seed;
};

RunConfig BuildConfig(const RunArgs &args) {
    RunConfig config;
    if (!args.config_file.empty()) config = LoadConfig(args.config_file);
    for (const auto &kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override '" + kv + "' is not key=value");
        }
        ApplyConfig(config, kv.substr(0, eq) + ": " + kv.substr(eq + 1));
    }
    if (args.relocalization) config.relocalization = *args.relocalization;
    if (args.loop_closing) config.loop_closing = *args.loop_closing;
    if (args.drop_run) config.drop_run = *args.drop_run;
    if (args.drop_window) config.drop_window = *args.drop_window;
    if (args.seed) config.seed = *args.seed;
    Validate(config);
    return config;
}

void PrintMetrics(std::ostream &out, const Trajectory &estimate, const std::vector<Pose3d> &truth) {
    out << "ate_rmse_m " << EvaluateAte(estimate, truth) << '\n';
    try {
        const double rel = EvaluateRel(estimate, truth);
        out << "rel_translation_pct " << rel << '\n';
    } catch (const DegenerateError &e) {
        out << "rel_translation_pct n/a (" << e.what() << ")\n";
    }
}

int Run(const RunArgs &args) {
    const RunConfig config = BuildConfig(args);
    std::optional<fs::path> labels;
    if (!args.labels.empty()) labels = args.labels;
    std::optional<fs::path> groundtruth;
    if (!args.groundtruth.empty()) groundtruth = args.groundtruth;
    DatasetSource source = OpenDataset(args.scans, labels, groundtruth);
    source.min_range = config.min_range;
    source.max_range = config.max_range;
    if (!args.calib.empty()) source.extrinsic = ReadCalibration(args.calib);

    std::size_t num_scans = source.size();
    if (args.max_scans > 0) num_scans = std::min(num_scans, args.max_scans);
    if (num_scans == 0) throw IoError("no scans found in " + args.scans);

    RunOptions options;
    options.single_thread = args.single_thread;
    options.export_cloud = !args.no_cloud;
    const auto result =
        RunSlam(config, num_scans, [&](std::size_t i) { return ReadScan(source, i); }, options);
    WriteOutputs(args.output, result);

    std::size_t valid = 0;
    for (const auto &pose : result.trajectory) valid += pose.has_value();
    std::cout << "scans " << num_scans << " valid " << valid << " loops " << result.loops.size()
              << " relocalizations " << result.relocalizations.size() << '\n';
    for (const auto &[name, stage] : result.timings.stages()) {
        std::printf("time_%s_ms mean %.3f max %.3f\n", name.c_str(), stage.mean_ms, stage.max_ms);
    }
    if (source.groundtruth) {
        auto truth = ReadGroundTruth(*source.groundtruth, source.extrinsic);
        if (truth.size() < num_scans) throw IoError("ground truth shorter than the sequence");
        truth.resize(num_scans);
        std::ofstream metrics(fs::path(args.output) / "metrics.txt");
        PrintMetrics(metrics, result.trajectory, truth);
        PrintMetrics(std::cout, result.trajectory, truth);
    }
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Semantic graph LiDAR SLAM"};
    app.require_subcommand(1);

    RunArgs run;
    auto *run_cmd = app.add_subcommand("run", "run SLAM on a KITTI-layout sequence");
    run_cmd->add_option("--config", run.config_file, "YAML config file")->check(CLI::ExistingFile);
    run_cmd->add_option("--set", run.overrides, "config override key=value (repeatable)");
    run_cmd->add_option("--scans", run.scans, "directory of .bin scans")->required();
    run_cmd->add_option("--labels", run.labels, "directory of .label files");
    run_cmd->add_option("--groundtruth", run.groundtruth, "KITTI pose file");
    run_cmd->add_option("--calib", run.calib, "KITTI calib.txt for the pose-file frame");
    run_cmd->add_option("--output", run.output, "output directory");
    run_cmd->add_option("--max-scans", run.max_scans, "process at most this many scans");
    run_cmd->add_flag("--single-thread", run.single_thread, "interleave both roles on one thread");
    run_cmd->add_flag("--no-cloud", run.no_cloud, "skip the global point cloud export");
    run_cmd->add_option("--relocalization", run.relocalization);
    run_cmd->add_option("--loop-closing", run.loop_closing);
    run_cmd->add_option("--drop-run", run.drop_run);
    run_cmd->add_option("--drop-window", run.drop_window);
    run_cmd->add_option("--seed", run.seed);

    std::string estimate_file, truth_file, calib_file;
    auto *eval_cmd = app.add_subcommand("eval", "ATE and relative error of a trajectory");
    eval_cmd->add_option("estimate", estimate_file)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("truth", truth_file)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--calib", calib_file, "KITTI calib.txt for the truth frame");

    std::string synth_dir;
    WorldParams world;
    TrajectoryParams trajectory;
    trajectory.ramp_scans = 20;
    ScanParams scan;
    std::string kind = "circle";
    auto *synth_cmd = app.add_subcommand("synth", "write a synthetic sequence");
    synth_cmd->add_option("output", synth_dir)->required();
    synth_cmd->add_option("--trajectory", kind)->check(CLI::IsMember({"circle", "straight"}));
    synth_cmd->add_option("--scans", trajectory.num_scans);
    synth_cmd->add_option("--step", trajectory.step, "meters per scan");
    synth_cmd->add_option("--radius", trajectory.radius, "circle radius");
    synth_cmd->add_option("--ramp", trajectory.ramp_scans, "scans spent accelerating from rest")
        ->capture_default_str();
    synth_cmd->add_option("--world-seed", world.seed);
    synth_cmd->add_option("--sensor-radius", scan.sensor_radius);
    synth_cmd->add_option("--noise", scan.noise_sigma, "point noise sigma in meters");
    synth_cmd->add_flag("--resample", scan.resample, "fresh surface samples per scan");
    synth_cmd->add_option("--scan-seed", scan.seed);

    std::size_t drop_count = 0;
    int drop_run = 10, drop_window = 200;
    std::uint64_t drop_seed = 0;
    auto *drop_cmd = app.add_subcommand("drop", "print the scan indices kept by the drop simulation");
    drop_cmd->add_option("count", drop_count, "number of scans")->required();
    drop_cmd->add_option("--run", drop_run);
    drop_cmd->add_option("--window", drop_window);
    drop_cmd->add_option("--seed", drop_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run_cmd) return Run(run);
        if (*eval_cmd) {
            const Pose3d extrinsic = calib_file.empty() ? Pose3d() : ReadCalibration(calib_file);
            const auto estimate = ReadTrajectory(estimate_file);
            auto truth = ReadGroundTruth(truth_file, extrinsic);
            if (truth.size() != estimate.size()) {
                throw IoError("trajectory lengths differ: " + std::to_string(estimate.size()) +
                              " vs " + std::to_string(truth.size()));
            }
            PrintMetrics(std::cout, estimate, truth);
        }
        if (*synth_cmd) {
            trajectory.kind = kind == "circle" ? TrajectoryKind::kCircle : TrajectoryKind::kStraight;
            SyntheticSequence(world, trajectory, scan).Write(synth_dir);
        }
        if (*drop_cmd) {
            RunConfig check;
            check.drop_run = drop_run;
            check.drop_window = drop_window;
            Validate(check);
            for (auto i : SimulateDroppedFrames(drop_count, drop_run, drop_window, drop_seed)) {
                std::cout << i << '\n';
            }
        }
        return kOk;
    } catch (const IoError &e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIo;
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const DegenerateError &e) {
        std::cerr << "degenerate input: " << e.what() << '\n';
        return kDegenerate;
    } catch (const StructuralError &e) {
        std::cerr << "structural error: " << e.what() << '\n';
        return kStructural;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
