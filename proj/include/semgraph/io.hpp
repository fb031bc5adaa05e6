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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semgraph/geometry.hpp"
#include "semgraph/types.hpp"

namespace semgraph {

// A KITTI-layout sequence: <scan_dir>/NNNNNN.bin point files, optional
// <label_dir>/NNNNNN.label SemanticKITTI labels and an optional pose file.
struct DatasetSource {
    std::vector<std::filesystem::path> scan_files;
    std::vector<std::filesystem::path> label_files;  // empty or one per scan
    std::optional<std::filesystem::path> groundtruth;
    // Maps sensor coordinates into the pose-file frame (KITTI Tr:
    // camera-from-velodyne). Identity by default.
    Pose3d extrinsic;
    double min_range = 1.0;
    double max_range = 120.0;

    std::size_t size() const { return scan_files.size(); }
};

// Lists the scan (and label) files of a sequence. Throws IoError when a
// label directory is given and does not cover every scan.
DatasetSource OpenDataset(const std::filesystem::path &scan_dir,
                          const std::optional<std::filesystem::path> &label_dir = std::nullopt,
                          const std::optional<std::filesystem::path> &groundtruth = std::nullopt);

Scan ReadScan(const DatasetSource &source, std::size_t index);

// Azimuth-based in-sweep stamps relative to the first point of the sweep.
void AssignAzimuthStamps(std::vector<LabeledPoint> &points);

void WriteScanFile(const std::filesystem::path &path, const std::vector<LabeledPoint> &points);
void WriteLabelFile(const std::filesystem::path &path, const std::vector<LabeledPoint> &points);

// KITTI pose format: 12 row-major floats of a 3x4 matrix per line.
std::vector<Pose3d> ReadGroundTruth(const std::filesystem::path &path,
                                    const Pose3d &extrinsic = Pose3d());

// The velodyne-to-camera "Tr:" entry of a KITTI calib.txt.
Pose3d ReadCalibration(const std::filesystem::path &path);

// Trajectory with one slot per input scan; invalid slots are written as
// twelve "nan" fields and read back as std::nullopt.
using Trajectory = std::vector<std::optional<Pose3d>>;

void WriteTrajectory(const std::filesystem::path &path, const Trajectory &trajectory);
std::string FormatPoseLine(const Pose3d &pose);
Trajectory ReadTrajectory(const std::filesystem::path &path);

}  // namespace semgraph
