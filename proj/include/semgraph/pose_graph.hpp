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

#include <vector>

#include "semgraph/config.hpp"
#include "semgraph/geometry.hpp"

namespace semgraph {

enum class FactorKind { kPrior, kOdometry, kLoop };

struct Factor {
    FactorKind kind;
    std::size_t i;  // unused for priors
    std::size_t j;
    Pose3d measurement;  // Z_ij, or the prior value of X_j
    Matrix6d information;
};

Matrix6d DiagonalInformation(const NoiseModel &noise);

// Residual of a relative-pose factor: Log(Z^-1 * X_i^-1 * X_j), with its
// Jacobians w.r.t. right perturbations X <- X * Exp(delta).
struct FactorLinearization {
    Twist residual;
    Matrix6d jacobian_i;
    Matrix6d jacobian_j;
};

FactorLinearization LinearizeBetween(const Pose3d &xi, const Pose3d &xj, const Pose3d &z);
FactorLinearization LinearizePrior(const Pose3d &xj, const Pose3d &z);

struct OptimizationSummary {
    int iterations = 0;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    // Cost after every accepted step, starting with the initial cost.
    std::vector<double> cost_history;
};

// Pose graph with one variable per tracked scan, anchored by a single prior
// on variable 0.
class PoseGraph {
public:
    explicit PoseGraph(const NoiseModel &odometry = {0.05, 0.005},
                       const NoiseModel &loop = {0.1, 0.01});

    // Appends a variable; the first variable also receives the prior factor.
    std::size_t AddVariable(const Pose3d &initial);

    // Returns false when an identical factor already exists.
    bool AddOdometryFactor(std::size_t i, std::size_t j, const Pose3d &z);
    bool AddLoopFactor(std::size_t i, std::size_t j, const Pose3d &z);
    bool AddFactor(Factor factor);

    // 0.5 * sum r^T Omega r over all factors.
    double Cost() const;

    // Levenberg-Marquardt with on-manifold updates. Throws StructuralError
    // when some variable is not connected to the prior.
    OptimizationSummary Optimize(int max_iterations = 50, double tolerance = 1e-6);

    std::size_t NumVariables() const { return values_.size(); }
    std::size_t NumFactors() const { return factors_.size(); }
    std::size_t NumLoopFactors() const;
    const std::vector<Pose3d> &values() const { return values_; }
    const Pose3d &value(std::size_t i) const { return values_[i]; }
    void SetValue(std::size_t i, const Pose3d &pose) { values_[i] = pose; }
    const std::vector<Factor> &factors() const { return factors_; }

private:
    void CheckConnected() const;

    Matrix6d odometry_information_;
    Matrix6d loop_information_;
    std::vector<Pose3d> values_;
    std::vector<Factor> factors_;
};

}  // namespace semgraph
