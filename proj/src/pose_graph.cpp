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

#include "semgraph/pose_graph.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "semgraph/errors.hpp"

namespace semgraph {

namespace {

constexpr double kPriorInformation = 1e8;

bool SamePose(const Pose3d &a, const Pose3d &b) {
    return a.rotation() == b.rotation() && a.translation() == b.translation();
}

}  // namespace

Matrix6d DiagonalInformation(const NoiseModel &noise) {
    Vector6<double> diag;
    const double r = 1.0 / (noise.sigma_rotation * noise.sigma_rotation);
    const double t = 1.0 / (noise.sigma_translation * noise.sigma_translation);
    diag << r, r, r, t, t, t;
    return diag.asDiagonal();
}

FactorLinearization LinearizeBetween(const Pose3d &xi, const Pose3d &xj, const Pose3d &z) {
    FactorLinearization lin;
    const Pose3d relative = xi.Inverse() * xj;
    lin.residual = (z.Inverse() * relative).Log();
    const Matrix6d jr_inv = RightJacobianInverse<double>(lin.residual);
    lin.jacobian_j = jr_inv;
    lin.jacobian_i = -jr_inv * relative.Inverse().Adjoint();
    return lin;
}

FactorLinearization LinearizePrior(const Pose3d &xj, const Pose3d &z) {
    FactorLinearization lin;
    lin.residual = (z.Inverse() * xj).Log();
    lin.jacobian_i.setZero();
    lin.jacobian_j = RightJacobianInverse<double>(lin.residual);
    return lin;
}

PoseGraph::PoseGraph(const NoiseModel &odometry, const NoiseModel &loop)
    : odometry_information_(DiagonalInformation(odometry)),
      loop_information_(DiagonalInformation(loop)) {}

std::size_t PoseGraph::AddVariable(const Pose3d &initial) {
    values_.push_back(initial);
    if (values_.size() == 1) {
        factors_.push_back({FactorKind::kPrior, 0, 0, initial,
                            Matrix6d::Identity() * kPriorInformation});
    }
    return values_.size() - 1;
}

bool PoseGraph::AddFactor(Factor factor) {
    if (factor.kind == FactorKind::kPrior) {
        throw StructuralError("the prior factor is created with the first variable");
    }
    if (factor.i >= factor.j || factor.j >= values_.size()) {
        throw StructuralError("factor indices must satisfy i < j < number of variables");
    }
    const bool duplicate = std::any_of(factors_.begin(), factors_.end(), [&](const Factor &f) {
        return f.kind == factor.kind && f.i == factor.i && f.j == factor.j &&
               SamePose(f.measurement, factor.measurement);
    });
    if (duplicate) return false;
    factors_.push_back(std::move(factor));
    return true;
}

bool PoseGraph::AddOdometryFactor(std::size_t i, std::size_t j, const Pose3d &z) {
    return AddFactor({FactorKind::kOdometry, i, j, z, odometry_information_});
}

bool PoseGraph::AddLoopFactor(std::size_t i, std::size_t j, const Pose3d &z) {
    return AddFactor({FactorKind::kLoop, i, j, z, loop_information_});
}

std::size_t PoseGraph::NumLoopFactors() const {
    return static_cast<std::size_t>(std::count_if(
        factors_.begin(), factors_.end(), [](const Factor &f) { return f.kind == FactorKind::kLoop; }));
}

namespace {

double CostOf(const std::vector<Pose3d> &values, const std::vector<Factor> &factors) {
    double cost = 0.0;
    for (const auto &f : factors) {
        const Twist r = f.kind == FactorKind::kPrior
                            ? (f.measurement.Inverse() * values[f.j]).Log()
                            : (f.measurement.Inverse() * values[f.i].Inverse() * values[f.j]).Log();
        cost += 0.5 * r.dot(f.information * r);
    }
    return cost;
}

}  // namespace

double PoseGraph::Cost() const { return CostOf(values_, factors_); }

void PoseGraph::CheckConnected() const {
    std::vector<std::size_t> parent(values_.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto &f : factors_) {
        if (f.kind == FactorKind::kPrior) continue;
        parent[find(f.i)] = find(f.j);
    }
    const std::size_t anchor = find(0);
    for (std::size_t v = 0; v < values_.size(); ++v) {
        if (find(v) != anchor) {
            throw StructuralError("pose graph variable " + std::to_string(v) +
                                  " is not connected to the anchored component");
        }
    }
}

OptimizationSummary PoseGraph::Optimize(int max_iterations, double tolerance) {
    OptimizationSummary summary;
    if (values_.empty()) return summary;
    CheckConnected();

    const auto n = static_cast<Eigen::Index>(values_.size() * 6);
    double cost = Cost();
    summary.initial_cost = cost;
    summary.cost_history.push_back(cost);
    double lambda = 1e-4;

    for (int iteration = 0; iteration < max_iterations && cost > 1e-24; ++iteration) {
        std::vector<Eigen::Triplet<double>> triplets;
        Eigen::VectorXd gradient = Eigen::VectorXd::Zero(n);
        triplets.reserve(factors_.size() * 4 * 36);
        const auto add_block = [&](std::size_t r, std::size_t c, const Matrix6d &block) {
            for (int a = 0; a < 6; ++a) {
                for (int b = 0; b < 6; ++b) {
                    triplets.emplace_back(static_cast<int>(6 * r) + a, static_cast<int>(6 * c) + b,
                                          block(a, b));
                }
            }
        };
        for (const auto &f : factors_) {
            if (f.kind == FactorKind::kPrior) {
                const auto lin = LinearizePrior(values_[f.j], f.measurement);
                const Matrix6d jt_omega = lin.jacobian_j.transpose() * f.information;
                add_block(f.j, f.j, jt_omega * lin.jacobian_j);
                gradient.segment<6>(static_cast<Eigen::Index>(6 * f.j)) += jt_omega * lin.residual;
                continue;
            }
            const auto lin = LinearizeBetween(values_[f.i], values_[f.j], f.measurement);
            const Matrix6d ji_omega = lin.jacobian_i.transpose() * f.information;
            const Matrix6d jj_omega = lin.jacobian_j.transpose() * f.information;
            add_block(f.i, f.i, ji_omega * lin.jacobian_i);
            add_block(f.j, f.j, jj_omega * lin.jacobian_j);
            add_block(f.i, f.j, ji_omega * lin.jacobian_j);
            add_block(f.j, f.i, jj_omega * lin.jacobian_i);
            gradient.segment<6>(static_cast<Eigen::Index>(6 * f.i)) += ji_omega * lin.residual;
            gradient.segment<6>(static_cast<Eigen::Index>(6 * f.j)) += jj_omega * lin.residual;
        }
        Eigen::SparseMatrix<double> hessian(n, n);
        hessian.setFromTriplets(triplets.begin(), triplets.end());
        const Eigen::VectorXd diagonal = hessian.diagonal();

        bool accepted = false;
        while (!accepted && lambda < 1e12) {
            Eigen::SparseMatrix<double> damped = hessian;
            for (Eigen::Index k = 0; k < n; ++k) {
                damped.coeffRef(k, k) += lambda * std::max(diagonal[k], 1e-9);
            }
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
            if (solver.info() != Eigen::Success) {
                throw StructuralError("singular normal equations in pose graph");
            }
            const Eigen::VectorXd delta = solver.solve(-gradient);
            std::vector<Pose3d> candidate = values_;
            for (std::size_t v = 0; v < values_.size(); ++v) {
                candidate[v] = values_[v] * Pose3d::Exp(delta.segment<6>(
                                                static_cast<Eigen::Index>(6 * v)));
            }
            const double new_cost = CostOf(candidate, factors_);
            if (new_cost < cost) {
                values_ = std::move(candidate);
                const double decrease = (cost - new_cost) / std::max(cost, 1e-300);
                cost = new_cost;
                summary.cost_history.push_back(cost);
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                summary.iterations = iteration + 1;
                if (decrease < tolerance) iteration = max_iterations;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) break;
    }
    summary.final_cost = cost;
    return summary;
}

}  // namespace semgraph
