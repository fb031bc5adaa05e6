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

#include "semgraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "semgraph/io.hpp"

namespace semgraph {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t SplitMix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t Mix(std::uint64_t a, std::uint64_t b) { return SplitMix(a ^ SplitMix(b)); }

// Uniform in [-0.5, 0.5) from a hash.
double HashOffset(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
}

double Footprint(const SyntheticObject &o) {
    switch (o.shape) {
        case ShapeKind::kCylinder:
        case ShapeKind::kBlob:
            return o.size.x();
        case ShapeKind::kBox:
        case ShapeKind::kWalls:
            return std::hypot(o.size.x(), o.size.y());
    }
    return 0.0;
}

// Jittered-grid samples of an object's surface; jitter stays below a third
// of the grid step so neighbouring samples remain connected.
std::vector<Eigen::Vector3d> SampleSurface(const SyntheticObject &o, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    std::vector<Eigen::Vector3d> pts;
    const Eigen::Matrix3d yaw = RotZ<double>(o.yaw).rotation();
    const auto place = [&](const Eigen::Vector3d &local) { pts.push_back(o.center + yaw * local); };

    switch (o.shape) {
        case ShapeKind::kCylinder: {
            const double r = o.size.x(), h = o.size.z();
            const int around = std::max(8, static_cast<int>(std::ceil(kTwoPi * r / 0.1)));
            const double dz = 0.15;
            const int rings = static_cast<int>(h / dz);
            for (int k = 0; k < rings; ++k) {
                for (int a = 0; a < around; ++a) {
                    const double t = (a + 0.5 + jitter(rng)) * kTwoPi / around;
                    const double z = (k + 0.5 + jitter(rng)) * dz;
                    place({r * std::cos(t), r * std::sin(t), z});
                }
            }
            break;
        }
        case ShapeKind::kBox:
        case ShapeKind::kWalls: {
            const double hx = o.size.x(), hy = o.size.y(), h = o.size.z();
            const double step = o.shape == ShapeKind::kBox ? 0.25 : 0.6;
            const auto face = [&](const Eigen::Vector3d &origin, const Eigen::Vector3d &u,
                                  const Eigen::Vector3d &v, double lu, double lv) {
                const int nu = std::max(1, static_cast<int>(lu / step));
                const int nv = std::max(1, static_cast<int>(lv / step));
                for (int i = 0; i < nu; ++i) {
                    for (int j = 0; j < nv; ++j) {
                        const double su = (i + 0.5 + jitter(rng)) * lu / nu;
                        const double sv = (j + 0.5 + jitter(rng)) * lv / nv;
                        place(origin + su * u + sv * v);
                    }
                }
            };
            const Eigen::Vector3d ex = Eigen::Vector3d::UnitX(), ey = Eigen::Vector3d::UnitY(),
                                  ez = Eigen::Vector3d::UnitZ();
            face({-hx, -hy, 0}, ex, ez, 2 * hx, h);
            face({-hx, hy, 0}, ex, ez, 2 * hx, h);
            face({-hx, -hy, 0}, ey, ez, 2 * hy, h);
            face({hx, -hy, 0}, ey, ez, 2 * hy, h);
            if (o.shape == ShapeKind::kBox) face({-hx, -hy, h}, ex, ey, 2 * hx, 2 * hy);
            break;
        }
        case ShapeKind::kBlob: {
            const double r = o.size.x();
            const double step = 0.35;
            const int rings = std::max(2, static_cast<int>(0.5 * std::numbers::pi * r / step));
            for (int k = 0; k < rings; ++k) {
                const double phi = (k + 0.5 + jitter(rng)) * 0.5 * std::numbers::pi / rings;
                const double ring_radius = r * std::cos(phi);
                const int around =
                    std::max(6, static_cast<int>(kTwoPi * ring_radius / step));
                for (int a = 0; a < around; ++a) {
                    const double t = (a + 0.5 + jitter(rng)) * kTwoPi / around;
                    place({ring_radius * std::cos(t), ring_radius * std::sin(t),
                           r * std::sin(phi)});
                }
            }
            break;
        }
    }
    return pts;
}

}  // namespace

SyntheticWorld GenerateWorld(const WorldParams &params, const std::vector<Eigen::Vector3d> &path) {
    SyntheticWorld world;
    world.params = params;
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto fits = [&](const SyntheticObject &candidate) {
        const double reach = Footprint(candidate);
        const Eigen::Vector2d c = candidate.center.head<2>();
        if (std::abs(c.x()) + reach > params.extent || std::abs(c.y()) + reach > params.extent) {
            return false;
        }
        for (const auto &p : path) {
            if ((p.head<2>() - c).norm() < reach + params.path_clearance) return false;
        }
        for (const auto &o : world.objects) {
            if ((o.center.head<2>() - c).norm() < reach + Footprint(o) + params.min_separation) {
                return false;
            }
        }
        return true;
    };

    const auto add = [&](int count, Label label, ShapeKind shape, auto &&make_size) {
        for (int k = 0; k < count; ++k) {
            for (int attempt = 0; attempt < 500; ++attempt) {
                SyntheticObject o;
                o.label = label;
                o.shape = shape;
                o.size = make_size();
                o.yaw = shape == ShapeKind::kBox ? unit(rng) * kTwoPi : 0.0;
                o.center = Eigen::Vector3d((2.0 * unit(rng) - 1.0) * params.extent,
                                           (2.0 * unit(rng) - 1.0) * params.extent, 0.0);
                if (!fits(o)) continue;
                o.instance = static_cast<int>(world.objects.size());
                o.points = SampleSurface(o, rng);
                world.objects.push_back(std::move(o));
                break;
            }
        }
    };
    // large objects first so that they find room
    add(params.buildings, Label::kBuilding, ShapeKind::kWalls, [&] {
        return Eigen::Vector3d(4.0 + 6.0 * unit(rng), 4.0 + 6.0 * unit(rng), 6.0 + 8.0 * unit(rng));
    });
    add(params.vehicles, Label::kVehicle, ShapeKind::kBox, [&] {
        return Eigen::Vector3d(1.9 + 0.4 * unit(rng), 0.8 + 0.2 * unit(rng), 1.4 + 0.3 * unit(rng));
    });
    add(params.bushes, Label::kVegetation, ShapeKind::kBlob,
        [&] { return Eigen::Vector3d(1.0 + 1.0 * unit(rng), 0.0, 0.0); });
    add(params.trunks, Label::kTrunk, ShapeKind::kCylinder, [&] {
        return Eigen::Vector3d(0.2 + 0.15 * unit(rng), 0.0, 2.5 + 1.5 * unit(rng));
    });
    add(params.poles, Label::kPole, ShapeKind::kCylinder, [&] {
        return Eigen::Vector3d(0.1 + 0.08 * unit(rng), 0.0, 5.0 + 3.0 * unit(rng));
    });
    return world;
}

SyntheticScan GenerateScan(const SyntheticWorld &world, const Pose3d &pose,
                           const Pose3d &sweep_motion, std::size_t index,
                           const ScanParams &params) {
    struct Raw {
        Eigen::Vector3d world;
        Label label;
        int instance;
    };
    std::vector<Raw> raw;
    const Eigen::Vector2d origin = pose.translation().head<2>();
    const double r2 = params.sensor_radius * params.sensor_radius;
    const std::uint64_t scan_key = Mix(params.seed, index);

    // ground lattice with hashed jitter
    const double s = world.params.ground_spacing;
    const auto lo_i = static_cast<long>(std::floor((origin.x() - params.sensor_radius) / s));
    const auto hi_i = static_cast<long>(std::ceil((origin.x() + params.sensor_radius) / s));
    const auto lo_j = static_cast<long>(std::floor((origin.y() - params.sensor_radius) / s));
    const auto hi_j = static_cast<long>(std::ceil((origin.y() + params.sensor_radius) / s));
    const std::uint64_t ground_key = params.resample ? scan_key : Mix(world.params.seed, 77);
    for (long i = lo_i; i <= hi_i; ++i) {
        for (long j = lo_j; j <= hi_j; ++j) {
            const std::uint64_t h = Mix(ground_key, Mix(static_cast<std::uint64_t>(i),
                                                        static_cast<std::uint64_t>(j)));
            const Eigen::Vector2d xy((i + 0.5 + 0.6 * HashOffset(h)) * s,
                                     (j + 0.5 + 0.6 * HashOffset(SplitMix(h))) * s);
            if (std::abs(xy.x()) > world.params.extent || std::abs(xy.y()) > world.params.extent) {
                continue;
            }
            if ((xy - origin).squaredNorm() > r2) continue;
            raw.push_back({Eigen::Vector3d(xy.x(), xy.y(), 0.0), Label::kRoad, -1});
        }
    }
    for (const auto &o : world.objects) {
        if ((o.center.head<2>() - origin).squaredNorm() > r2) continue;
        const bool counted = o.label == Label::kVehicle || o.label == Label::kPole ||
                             o.label == Label::kTrunk;
        const int instance = counted ? o.instance : -1;
        if (params.resample) {
            std::mt19937_64 rng(Mix(scan_key, static_cast<std::uint64_t>(o.instance) + 1));
            for (const auto &p : SampleSurface(o, rng)) raw.push_back({p, o.label, instance});
        } else {
            for (const auto &p : o.points) raw.push_back({p, o.label, instance});
        }
    }

    const Pose3d inverse = pose.Inverse();
    const Twist xi = params.motion_distortion ? sweep_motion.Log() : Twist::Zero();
    std::mt19937_64 noise_rng(Mix(scan_key, 0xabcdef));
    std::normal_distribution<double> noise(0.0, params.noise_sigma > 0 ? params.noise_sigma : 1.0);

    struct Timed {
        double stamp;
        LabeledPoint point;
        int instance;
    };
    std::vector<Timed> timed;
    timed.reserve(raw.size());
    for (const auto &r : raw) {
        Eigen::Vector3d p = inverse * r.world;
        if (params.noise_sigma > 0) p += Eigen::Vector3d(noise(noise_rng), noise(noise_rng),
                                                          noise(noise_rng));
        // sweep starts behind the sensor and turns clockwise
        double delta = std::numbers::pi - std::atan2(p.y(), p.x());
        delta = std::fmod(delta + 2.0 * kTwoPi, kTwoPi);
        const double stamp = delta / kTwoPi;
        LabeledPoint lp;
        lp.label = r.label;
        lp.stamp = stamp;
        lp.position = xi.squaredNorm() > 0 ? Pose3d::Exp((stamp - 0.5) * xi).Inverse() * p : p;
        timed.push_back({stamp, lp, r.instance});
    }
    std::stable_sort(timed.begin(), timed.end(),
                     [](const Timed &a, const Timed &b) { return a.stamp < b.stamp; });

    SyntheticScan out;
    out.scan.index = index;
    out.scan.points.reserve(timed.size());
    out.instance.reserve(timed.size());
    for (const auto &t : timed) {
        const double range = t.point.position.norm();
        if (!(range >= 1.0)) continue;
        out.scan.points.push_back(t.point);
        out.instance.push_back(t.instance);
    }
    return out;
}

std::vector<Pose3d> GenerateTrajectory(const TrajectoryParams &params) {
    std::vector<Pose3d> poses;
    poses.reserve(params.num_scans);
    double arc = 0.0;
    for (std::size_t i = 0; i < params.num_scans; ++i) {
        if (i > 0) {
            double speed = params.step;
            if (i <= params.ramp_scans) {
                speed *= 0.5 * (1.0 - std::cos(std::numbers::pi * i / (params.ramp_scans + 1)));
            }
            arc += speed;
        }
        if (params.kind == TrajectoryKind::kStraight) {
            poses.emplace_back(Eigen::Matrix3d::Identity(),
                               Eigen::Vector3d(arc, 0.0, params.height));
        } else {
            // counter-clockwise circle centred at the origin, heading along
            // the tangent
            const double theta = arc / params.radius - std::numbers::pi / 2;
            poses.push_back(RotZ<double>(theta + std::numbers::pi / 2,
                                         Eigen::Vector3d(params.radius * std::cos(theta),
                                                         params.radius * std::sin(theta) +
                                                             params.radius,
                                                         params.height)));
        }
    }
    return poses;
}

std::set<int> VisibleInstances(const SyntheticWorld &world, const std::vector<Pose3d> &poses,
                               double sensor_radius, const std::vector<Label> &classes) {
    std::set<int> out;
    for (const auto &o : world.objects) {
        if (std::find(classes.begin(), classes.end(), o.label) == classes.end()) continue;
        for (const auto &pose : poses) {
            if ((o.center.head<2>() - pose.translation().head<2>()).norm() <= sensor_radius) {
                out.insert(o.instance);
                break;
            }
        }
    }
    return out;
}

SyntheticSequence::SyntheticSequence(const WorldParams &world, const TrajectoryParams &trajectory,
                                     const ScanParams &scan)
    : poses_(GenerateTrajectory(trajectory)), scan_(scan) {
    std::vector<Eigen::Vector3d> path;
    for (const auto &p : poses_) path.push_back(p.translation());
    world_ = GenerateWorld(world, path);
}

SyntheticScan SyntheticSequence::Generate(std::size_t index) const {
    const Pose3d motion = index > 0 ? poses_[index - 1].Inverse() * poses_[index]
                          : poses_.size() > 1 ? poses_[0].Inverse() * poses_[1]
                                              : Pose3d();
    return GenerateScan(world_, poses_[index], motion, index, scan_);
}

void SyntheticSequence::Write(const std::filesystem::path &dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "velodyne");
    fs::create_directories(dir / "labels");
    Trajectory truth;
    for (std::size_t i = 0; i < size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu", i);
        const auto scan = Generate(i);
        WriteScanFile(dir / "velodyne" / (std::string(name) + ".bin"), scan.scan.points);
        WriteLabelFile(dir / "labels" / (std::string(name) + ".label"), scan.scan.points);
        truth.emplace_back(poses_[i]);
    }
    WriteTrajectory(dir / "poses.txt", truth);
}

}  // namespace semgraph
