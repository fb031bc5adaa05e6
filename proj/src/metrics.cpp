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

#include "semgraph/metrics.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "semgraph/errors.hpp"

namespace semgraph {

double EvaluateAte(const Trajectory &estimated, const std::vector<Pose3d> &truth) {
    const std::size_t n = std::min(estimated.size(), truth.size());
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < n; ++i) {
        if (estimated[i]) valid.push_back(i);
    }
    if (valid.size() < 3) throw DegenerateError("ATE needs at least 3 valid poses");

    Eigen::Matrix3Xd src(3, static_cast<Eigen::Index>(valid.size()));
    Eigen::Matrix3Xd dst(3, static_cast<Eigen::Index>(valid.size()));
    for (std::size_t k = 0; k < valid.size(); ++k) {
        src.col(static_cast<Eigen::Index>(k)) = estimated[valid[k]]->translation();
        dst.col(static_cast<Eigen::Index>(k)) = truth[valid[k]].translation();
    }
    const Eigen::Matrix4d alignment = Eigen::umeyama(src, dst, false);
    const Eigen::Matrix3Xd aligned =
        (alignment.topLeftCorner<3, 3>() * src).colwise() + alignment.topRightCorner<3, 1>();
    return std::sqrt((aligned - dst).colwise().squaredNorm().mean());
}

double EvaluateRel(const Trajectory &estimated, const std::vector<Pose3d> &truth, int step) {
    static constexpr double kLengths[] = {100, 200, 300, 400, 500, 600, 700, 800};
    const std::size_t n = std::min(estimated.size(), truth.size());
    std::vector<double> distance(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        distance[i] =
            distance[i - 1] + (truth[i].translation() - truth[i - 1].translation()).norm();
    }
    if (n == 0 || distance.back() < kLengths[0]) {
        throw DegenerateError("relative error needs a trajectory of at least 100 m");
    }
    // valid_before[i]: number of invalid poses in [0, i)
    std::vector<std::size_t> invalid_before(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        invalid_before[i + 1] = invalid_before[i] + (estimated[i] ? 0 : 1);
    }

    double sum = 0.0;
    std::size_t count = 0;
    const auto stride = static_cast<std::size_t>(std::max(step, 1));
    for (std::size_t first = 0; first < n; first += stride) {
        for (const double length : kLengths) {
            const auto it = std::lower_bound(distance.begin() + static_cast<std::ptrdiff_t>(first),
                                             distance.end(), distance[first] + length);
            if (it == distance.end()) continue;
            const auto last = static_cast<std::size_t>(it - distance.begin());
            if (invalid_before[last + 1] != invalid_before[first]) continue;
            const Pose3d delta_truth = truth[first].Inverse() * truth[last];
            const Pose3d delta_estimate = estimated[first]->Inverse() * *estimated[last];
            const Pose3d error = delta_estimate.Inverse() * delta_truth;
            sum += error.translation().norm() / length;
            ++count;
        }
    }
    if (count == 0) throw DegenerateError("no complete segment with valid poses");
    return 100.0 * sum / static_cast<double>(count);
}

void Timings::Add(const std::string &stage, double milliseconds) {
    auto &s = stages_[stage];
    s.mean_ms += (milliseconds - s.mean_ms) / static_cast<double>(++s.count);
    s.max_ms = std::max(s.max_ms, milliseconds);
}

void Timings::Merge(const Timings &other) {
    for (const auto &[stage, t] : other.stages_) {
        auto &s = stages_[stage];
        const std::size_t n = s.count + t.count;
        if (n == 0) continue;
        s.mean_ms = (s.mean_ms * static_cast<double>(s.count) +
                     t.mean_ms * static_cast<double>(t.count)) /
                    static_cast<double>(n);
        s.max_ms = std::max(s.max_ms, t.max_ms);
        s.count = n;
    }
}

}  // namespace semgraph
