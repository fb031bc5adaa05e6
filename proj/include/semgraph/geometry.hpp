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

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>

#include "semgraph/errors.hpp"

namespace semgraph {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

// Tangent vector of SE(3), ordered (rotation, translation).
using Twist = Vector6<double>;
using Matrix6d = Matrix6<double>;

template <typename Derived>
Matrix3<typename Derived::Scalar> Hat(const Eigen::MatrixBase<Derived> &v) {
    using Scalar = typename Derived::Scalar;
    Matrix3<Scalar> m;
    m << Scalar(0), -v(2), v(1),  //
        v(2), Scalar(0), -v(0),   //
        -v(1), v(0), Scalar(0);
    return m;
}

template <typename Derived>
Vector3<typename Derived::Scalar> Vee(const Eigen::MatrixBase<Derived> &m) {
    return {m(2, 1), m(0, 2), m(1, 0)};
}

// Nearest rotation in the Frobenius sense (polar decomposition via SVD).
template <typename Derived>
Matrix3<typename Derived::Scalar> Orthonormalize(const Eigen::MatrixBase<Derived> &m) {
    using Scalar = typename Derived::Scalar;
    Eigen::JacobiSVD<Matrix3<Scalar>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix3<Scalar> d = Matrix3<Scalar>::Identity();
    d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? Scalar(-1)
                                                                            : Scalar(1);
    return svd.matrixU() * d * svd.matrixV().transpose();
}

template <typename Derived>
typename Derived::Scalar OrthonormalityError(const Eigen::MatrixBase<Derived> &r) {
    using Scalar = typename Derived::Scalar;
    return (r.transpose() * r - Matrix3<Scalar>::Identity()).norm();
}

// Geodesic angle of a rotation matrix, in [0, pi].
template <typename Derived>
typename Derived::Scalar RotationAngle(const Eigen::MatrixBase<Derived> &r) {
    using Scalar = typename Derived::Scalar;
    const Matrix3<Scalar> m = r;
    const Scalar s = Scalar(0.5) * Vee(m - m.transpose()).norm();
    const Scalar c = Scalar(0.5) * (m.trace() - 1);
    return std::atan2(s, c);
}

namespace so3 {

template <typename Scalar>
Matrix3<Scalar> Exp(const Vector3<Scalar> &omega) {
    const Scalar theta2 = omega.squaredNorm();
    const Matrix3<Scalar> k = Hat(omega);
    if (theta2 < Scalar(1e-14)) {
        return Matrix3<Scalar>::Identity() + k + Scalar(0.5) * k * k;
    }
    const Scalar theta = std::sqrt(theta2);
    return Matrix3<Scalar>::Identity() + (std::sin(theta) / theta) * k +
           ((1 - std::cos(theta)) / theta2) * k * k;
}

template <typename Scalar>
Vector3<Scalar> Log(const Matrix3<Scalar> &r) {
    const Vector3<Scalar> axis_sin = Scalar(0.5) * Vee(r - r.transpose());
    const Scalar s = axis_sin.norm();
    const Scalar c = Scalar(0.5) * (r.trace() - 1);
    const Scalar theta = std::atan2(s, c);
    if (theta < Scalar(1e-7)) {
        // first order: R ~ I + hat(w)
        return axis_sin;
    }
    if (s > Scalar(1e-4) || c > 0) {
        return (theta / s) * axis_sin;
    }
    // Near pi: recover the axis from the symmetric part, sign from the
    // antisymmetric part.
    if (s < Scalar(1e-12)) {
        throw DegenerateError("rotation angle is exactly pi; log is not unique");
    }
    const Matrix3<Scalar> aat = (Scalar(0.5) * (r + r.transpose()) -
                                 c * Matrix3<Scalar>::Identity()) /
                                (1 - c);
    Eigen::Index col = 0;
    aat.diagonal().maxCoeff(&col);
    Vector3<Scalar> axis = aat.col(col) / std::sqrt(aat(col, col));
    if (axis.dot(axis_sin) < 0) axis = -axis;
    return theta * axis.normalized();
}

// Left Jacobian of SO(3); equals the V matrix of the SE(3) exponential.
template <typename Scalar>
Matrix3<Scalar> LeftJacobian(const Vector3<Scalar> &omega) {
    const Scalar theta = omega.norm();
    const Matrix3<Scalar> k = Hat(omega);
    Scalar a, b;
    if (theta < Scalar(1e-3)) {
        const Scalar t2 = theta * theta;
        a = Scalar(0.5) - t2 / 24;
        b = Scalar(1) / 6 - t2 / 120;
    } else {
        const Scalar half = std::sin(theta / 2);
        a = 2 * half * half / (theta * theta);
        b = (theta - std::sin(theta)) / (theta * theta * theta);
    }
    return Matrix3<Scalar>::Identity() + a * k + b * k * k;
}

template <typename Scalar>
Matrix3<Scalar> LeftJacobianInverse(const Vector3<Scalar> &omega) {
    const Scalar theta = omega.norm();
    const Matrix3<Scalar> k = Hat(omega);
    Scalar b;
    if (theta < Scalar(1e-3)) {
        b = Scalar(1) / 12 + theta * theta / 720;
    } else {
        const Scalar half = theta / 2;
        b = (1 - half * std::cos(half) / std::sin(half)) / (theta * theta);
    }
    return Matrix3<Scalar>::Identity() - Scalar(0.5) * k + b * k * k;
}

}  // namespace so3

// Rigid transform in SE(3). Rotation is kept as an orthonormal matrix;
// constructors re-project onto SO(3) when drift exceeds 1e-12.
template <typename Scalar>
class Pose {
public:
    using Vec3 = Vector3<Scalar>;
    using Mat3 = Matrix3<Scalar>;
    using Tangent = Vector6<Scalar>;

    Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

    Pose(const Mat3 &rotation, const Vec3 &translation)
        : rotation_(rotation), translation_(translation) {
        if (OrthonormalityError(rotation_) > Scalar(1e-12)) {
            rotation_ = Orthonormalize(rotation_);
        }
    }

    explicit Pose(const Vec3 &translation)
        : rotation_(Mat3::Identity()), translation_(translation) {}

    static Pose Identity() { return Pose(); }

    static Pose Exp(const Tangent &xi) {
        const Vec3 omega = xi.template head<3>();
        const Vec3 rho = xi.template tail<3>();
        Pose out;
        out.rotation_ = so3::Exp<Scalar>(omega);
        out.translation_ = so3::LeftJacobian<Scalar>(omega) * rho;
        return out;
    }

    Tangent Log() const {
        const Vec3 omega = so3::Log<Scalar>(rotation_);
        Tangent xi;
        xi << omega, so3::LeftJacobianInverse<Scalar>(omega) * translation_;
        return xi;
    }

    Pose Inverse() const {
        Pose out;
        out.rotation_ = rotation_.transpose();
        out.translation_ = -(out.rotation_ * translation_);
        return out;
    }

    Pose operator*(const Pose &other) const {
        return Pose(rotation_ * other.rotation_, rotation_ * other.translation_ + translation_);
    }

    Vec3 operator*(const Vec3 &point) const { return rotation_ * point + translation_; }

    // Maps a tangent vector expressed at the identity through this frame:
    // Exp(Adjoint() * xi) = (*this) * Exp(xi) * Inverse().
    Matrix6<Scalar> Adjoint() const {
        Matrix6<Scalar> ad = Matrix6<Scalar>::Zero();
        ad.template topLeftCorner<3, 3>() = rotation_;
        ad.template bottomRightCorner<3, 3>() = rotation_;
        ad.template bottomLeftCorner<3, 3>() = Hat(translation_) * rotation_;
        return ad;
    }

    Eigen::Matrix<Scalar, 4, 4> Matrix() const {
        Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
        m.template topLeftCorner<3, 3>() = rotation_;
        m.template topRightCorner<3, 1>() = translation_;
        return m;
    }

    const Mat3 &rotation() const { return rotation_; }
    const Vec3 &translation() const { return translation_; }

    template <typename Other>
    Pose<Other> cast() const {
        return Pose<Other>(rotation_.template cast<Other>(), translation_.template cast<Other>());
    }

private:
    Mat3 rotation_;
    Vec3 translation_;
};

using Pose3d = Pose<double>;

template <typename Scalar>
Pose<Scalar> Compose(const Pose<Scalar> &a, const Pose<Scalar> &b) {
    return a * b;
}

template <typename Scalar>
Pose<Scalar> Inverse(const Pose<Scalar> &p) {
    return p.Inverse();
}

// Screw-linear interpolation from the identity (s = 0) to p (s = 1).
template <typename Scalar>
Pose<Scalar> Interpolate(const Pose<Scalar> &p, Scalar s) {
    return Pose<Scalar>::Exp(s * p.Log());
}

template <typename Scalar>
Pose<Scalar> RotZ(Scalar angle, const Vector3<Scalar> &t = Vector3<Scalar>::Zero()) {
    return Pose<Scalar>(
        Eigen::AngleAxis<Scalar>(angle, Vector3<Scalar>::UnitZ()).toRotationMatrix(), t);
}

// Right Jacobian inverse of SE(3) in (rotation, translation) ordering,
// used for on-manifold residual linearisation.
template <typename Scalar>
Matrix6<Scalar> RightJacobianInverse(const Vector6<Scalar> &xi) {
    // J_r(xi) = J_l(-xi); J_l = [[J, 0], [Q, J]] with Q from the closed form
    // of the SE(3) left Jacobian.
    const Vector3<Scalar> phi = -xi.template head<3>();
    const Vector3<Scalar> rho = -xi.template tail<3>();
    const Scalar theta = phi.norm();
    const Matrix3<Scalar> p = Hat(phi);
    const Matrix3<Scalar> r = Hat(rho);
    Scalar a, b, c;
    if (theta < Scalar(1e-2)) {
        const Scalar t2 = theta * theta;
        a = Scalar(1) / 6 - t2 / 120 + t2 * t2 / 5040;
        b = Scalar(1) / 24 - t2 / 720 + t2 * t2 / 40320;
        c = Scalar(1) / 120 - t2 / 2520 + t2 * t2 / 120960;
    } else {
        const Scalar t2 = theta * theta;
        const Scalar st = std::sin(theta);
        const Scalar ct = std::cos(theta);
        a = (theta - st) / (t2 * theta);
        b = (t2 + 2 * ct - 2) / (2 * t2 * t2);
        c = (2 * theta - 3 * st + theta * ct) / (2 * t2 * t2 * theta);
    }
    const Matrix3<Scalar> q = Scalar(0.5) * r + a * (p * r + r * p + p * r * p) +
                              b * (p * p * r + r * p * p - 3 * p * r * p) +
                              c * (p * r * p * p + p * p * r * p);
    const Matrix3<Scalar> j_inv = so3::LeftJacobianInverse<Scalar>(phi);
    Matrix6<Scalar> out = Matrix6<Scalar>::Zero();
    out.template topLeftCorner<3, 3>() = j_inv;
    out.template bottomRightCorner<3, 3>() = j_inv;
    out.template bottomLeftCorner<3, 3>() = -j_inv * q * j_inv;
    return out;
}

}  // namespace semgraph
