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

#include <map>
#include <string>
#include <vector>

#include "semgraph/geometry.hpp"
#include "semgraph/io.hpp"

namespace semgraph {

// RMSE of translational residuals after the rigid (no scale) least-squares
// alignment of the valid estimated positions onto the ground truth. Throws
// DegenerateError with fewer than 3 valid poses.
double EvaluateAte(const Trajectory &estimated, const std::vector<Pose3d> &truth);

// KITTI relative translational error in percent: segments of 100..800 m
// (step 100) started every `step` frames, endpoint translation error over
// segment length. Segments touching an invalid pose are skipped. Throws
// DegenerateError when the ground truth is shorter than 100 m.
double EvaluateRel(const Trajectory &estimated, const std::vector<Pose3d> &truth, int step = 10);

struct StageTiming {
    double mean_ms = 0.0;
    double max_ms = 0.0;
    std::size_t count = 0;
};

// Running mean/max per named stage.
class Timings {
public:
    void Add(const std::string &stage, double milliseconds);
    void Merge(const Timings &other);
    const std::map<std::string, StageTiming> &stages() const { return stages_; }

private:
    std::map<std::string, StageTiming> stages_;
};

}  // namespace semgraph
