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

#include "semgraph/io.hpp"

#include <algorithm>
#include <bit>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "semgraph/errors.hpp"

namespace semgraph {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> ListWithExtension(const fs::path &dir, const std::string &ext) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<char> ReadBytes(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T>
T LoadLittleEndian(const char *bytes) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

DatasetSource OpenDataset(const fs::path &scan_dir, const std::optional<fs::path> &label_dir,
                          const std::optional<fs::path> &groundtruth) {
    DatasetSource source;
    source.scan_files = ListWithExtension(scan_dir, ".bin");
    if (label_dir) {
        for (const auto &scan : source.scan_files) {
            auto label = *label_dir / scan.filename();
            label.replace_extension(".label");
            if (!fs::exists(label)) throw IoError("missing label file " + label.string());
            source.label_files.push_back(label);
        }
    }
    if (groundtruth) {
        if (!fs::exists(*groundtruth)) {
            throw IoError("missing ground truth " + groundtruth->string());
        }
        source.groundtruth = groundtruth;
    }
    return source;
}

void AssignAzimuthStamps(std::vector<LabeledPoint> &points) {
    if (points.empty()) return;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const auto &first = points.front().position;
    const double start = std::atan2(first.y(), first.x());
    for (auto &p : points) {
        // the sensor sweeps clockwise: azimuth decreases with time
        double delta = start - std::atan2(p.position.y(), p.position.x());
        delta = std::fmod(delta + 2.0 * kTwoPi, kTwoPi);
        p.stamp = std::clamp(delta / kTwoPi, 0.0, 1.0);
    }
}

Scan ReadScan(const DatasetSource &source, std::size_t index) {
    if (index >= source.size()) throw IoError("scan index out of range");
    const auto bytes = ReadBytes(source.scan_files[index]);
    constexpr std::size_t kStride = 4 * sizeof(float);
    if (bytes.size() % kStride != 0) {
        throw IoError("truncated scan file " + source.scan_files[index].string());
    }
    const std::size_t count = bytes.size() / kStride;

    std::vector<char> label_bytes;
    if (!source.label_files.empty()) {
        label_bytes = ReadBytes(source.label_files[index]);
        if (label_bytes.size() != count * sizeof(std::uint32_t)) {
            throw IoError("label/scan size mismatch for " + source.label_files[index].string());
        }
    }

    Scan scan;
    scan.index = index;
    scan.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const char *p = bytes.data() + i * kStride;
        const Eigen::Vector3d xyz(LoadLittleEndian<float>(p), LoadLittleEndian<float>(p + 4),
                                  LoadLittleEndian<float>(p + 8));
        if (!xyz.allFinite()) continue;
        const double range = xyz.norm();
        if (range < source.min_range || range > source.max_range) continue;
        LabeledPoint point;
        point.position = xyz;
        if (!label_bytes.empty()) {
            const auto raw = LoadLittleEndian<std::uint32_t>(label_bytes.data() + 4 * i);
            point.label = FromSemanticKittiId(raw & 0xFFFFu);
        }
        scan.points.push_back(point);
    }
    AssignAzimuthStamps(scan.points);
    return scan;
}

void WriteScanFile(const fs::path &path, const std::vector<LabeledPoint> &points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto &p : points) {
        const std::array<float, 4> xyzi{static_cast<float>(p.position.x()),
                                        static_cast<float>(p.position.y()),
                                        static_cast<float>(p.position.z()), 0.0f};
        out.write(reinterpret_cast<const char *>(xyzi.data()), sizeof(xyzi));
    }
}

void WriteLabelFile(const fs::path &path, const std::vector<LabeledPoint> &points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto &p : points) {
        const std::uint32_t id = ToSemanticKittiId(p.label);
        out.write(reinterpret_cast<const char *>(&id), sizeof(id));
    }
}

namespace {

std::optional<std::array<double, 12>> ParsePoseLine(const std::string &line,
                                                    std::size_t line_number) {
    std::istringstream in(line);
    std::array<double, 12> v{};
    std::string token;
    std::size_t n = 0;
    bool any_nan = false;
    while (in >> token) {
        if (n == 12) throw IoError("too many values on pose line " + std::to_string(line_number));
        char *end = nullptr;
        v[n] = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0') {
            throw IoError("cannot parse pose line " + std::to_string(line_number));
        }
        any_nan = any_nan || std::isnan(v[n]);
        ++n;
    }
    if (n != 12) throw IoError("expected 12 values on pose line " + std::to_string(line_number));
    if (any_nan) return std::nullopt;
    return v;
}

Pose3d PoseFromValues(const std::array<double, 12> &v, std::size_t line_number) {
    Eigen::Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    if (r.determinant() <= 0.0) {
        throw IoError("rotation with non-positive determinant on line " +
                      std::to_string(line_number));
    }
    if (OrthonormalityError(r) > 1e-3) {
        std::cerr << "warning: re-orthonormalizing rotation on pose line " << line_number << '\n';
    }
    return Pose3d(Orthonormalize(r), Eigen::Vector3d(v[3], v[7], v[11]));
}

}  // namespace

std::vector<Pose3d> ReadGroundTruth(const fs::path &path, const Pose3d &extrinsic) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Pose3d> poses;
    const Pose3d extrinsic_inv = extrinsic.Inverse();
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto values = ParsePoseLine(line, line_number);
        if (!values) throw IoError("ground truth contains nan on line " + std::to_string(line_number));
        poses.push_back(extrinsic_inv * PoseFromValues(*values, line_number) * extrinsic);
    }
    return poses;
}

Pose3d ReadCalibration(const fs::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.rfind("Tr:", 0) != 0) continue;
        const auto values = ParsePoseLine(line.substr(3), line_number);
        if (!values) throw IoError("calibration contains nan on line " + std::to_string(line_number));
        return PoseFromValues(*values, line_number);
    }
    throw IoError("no 'Tr:' entry in " + path.string());
}

std::string FormatPoseLine(const Pose3d &pose) {
    const auto m = pose.Matrix();
    std::string line;
    char buffer[32];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) {
            // 9 significant digits
            std::snprintf(buffer, sizeof(buffer), "%.8e", m(r, c) == 0.0 ? 0.0 : m(r, c));
            if (!line.empty()) line += ' ';
            line += buffer;
        }
    }
    return line;
}

void WriteTrajectory(const fs::path &path, const Trajectory &trajectory) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto &pose : trajectory) {
        if (pose) {
            out << FormatPoseLine(*pose) << '\n';
        } else {
            out << "nan nan nan nan nan nan nan nan nan nan nan nan\n";
        }
    }
}

Trajectory ReadTrajectory(const fs::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Trajectory trajectory;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto values = ParsePoseLine(line, line_number);
        if (values) {
            trajectory.emplace_back(PoseFromValues(*values, line_number));
        } else {
            trajectory.emplace_back(std::nullopt);
        }
    }
    return trajectory;
}

}  // namespace semgraph
