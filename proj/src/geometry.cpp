// Copyright 2026 The ITCG Authors
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

#include "itcg/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "itcg/errors.hpp"

namespace itcg {

namespace {
constexpr double kPi = std::numbers::pi;
}

double wrap_angle(double angle) {
    double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

FovConfig make_fov(double sigma_max) {
    if (!(sigma_max > 0.0 && sigma_max <= kPi / 2.0 + 1e-15)) {
        throw std::invalid_argument("sigma_max must lie in (0, pi/2]");
    }
    return FovConfig{sigma_max};
}

KinematicsRate kinematics_rhs(const CartesianState& s, double u) {
    return {std::cos(s.theta), std::sin(s.theta), u};
}

PolarRate polar_rhs(const PolarState& p, double u) {
    if (p.r < kZeroRange) throw ZeroRange("polar_rhs");
    return {-std::cos(p.sigma), std::sin(p.sigma) / p.r - u};
}

PolarState to_polar(const CartesianState& s) {
    const double r = std::hypot(s.x, s.y);
    if (r < kZeroRange) throw ZeroRange("to_polar");
    const double st = std::sin(s.theta);
    const double ct = std::cos(s.theta);
    // r sin(sigma) and r cos(sigma)
    const double rs = s.x * st - s.y * ct;
    const double rc = -(s.x * ct + s.y * st);
    return {r, wrap_angle(std::atan2(rs, rc))};
}

double los_angle(const CartesianState& s) { return std::atan2(s.y, s.x); }

double lead_from_los(double lambda, double theta) { return wrap_angle(kPi + lambda - theta); }

CartesianState from_polar(const PolarState& p) {
    // LOS angle is pi on the negative x-axis, so theta = -sigma.
    return {-p.r, 0.0, wrap_angle(-p.sigma)};
}

double constraint_value(double sigma, const FovConfig& fov) {
    return std::cos(fov.sigma_max) - std::cos(sigma);
}

double constraint_rate(const PolarState& p, double u) {
    if (p.r < kZeroRange) throw ZeroRange("constraint_rate");
    const double s = std::sin(p.sigma);
    return (s / p.r - u) * s;
}

double psi(double xi) { return -std::exp(-xi); }

double psi_prime(double xi) { return std::exp(-xi); }

double xi_from_sigma(double sigma, const FovConfig& fov) {
    const double gap = std::cos(sigma) - std::cos(fov.sigma_max);
    if (std::abs(sigma) >= fov.sigma_max || !(gap > 0.0)) {
        throw ConstraintActive("lead angle on or outside the FOV boundary");
    }
    return -std::log(gap);
}

}  // namespace itcg
