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

// Planar engagement geometry for a unit-speed pursuer and a stationary
// target at the origin, plus the lead-angle (FOV) constraint algebra and
// the exponential saturation function that turns |sigma| <= sigma_max into
// an equality in the extra state xi.

#ifndef ITCG_GEOMETRY_HPP
#define ITCG_GEOMETRY_HPP

#include <numbers>

namespace itcg {

/// Guard below which the range is treated as zero.
inline constexpr double kZeroRange = 1e-12;

struct CartesianState {
    double x = 0.0;      // East, normalized length
    double y = 0.0;      // North, normalized length
    double theta = 0.0;  // heading, rad, counter-clockwise from x-axis
};

struct PolarState {
    double r = 0.0;      // range to target
    double sigma = 0.0;  // lead angle, rad, clockwise-positive from LOS to velocity
};

struct FovConfig {
    double sigma_max = std::numbers::pi / 2.0;  // FOV half-angle, rad, in (0, pi/2]
};

struct KinematicsRate {
    double dx = 0.0;
    double dy = 0.0;
    double dtheta = 0.0;
};

struct PolarRate {
    double dr = 0.0;
    double dsigma = 0.0;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Validates sigma_max in (0, pi/2]; throws std::invalid_argument otherwise.
FovConfig make_fov(double sigma_max);

KinematicsRate kinematics_rhs(const CartesianState& s, double u);

/// (dr, dsigma) = (-cos sigma, sin sigma / r - u). Throws ZeroRange.
PolarRate polar_rhs(const PolarState& p, double u);

/// Throws ZeroRange when (x, y) is at the origin.
PolarState to_polar(const CartesianState& s);

/// Angle of the target-to-pursuer line, atan2(y, x).
double los_angle(const CartesianState& s);

/// sigma = wrap(pi + lambda - theta).
double lead_from_los(double lambda, double theta);

/// Places a pursuer at range r with lead angle sigma; the target sits at
/// the origin and the pursuer on the negative x-axis.
CartesianState from_polar(const PolarState& p);

/// S = cos(sigma_max) - cos(sigma); non-positive inside the FOV.
double constraint_value(double sigma, const FovConfig& fov);

/// dS/dt = (sin sigma / r - u) sin sigma. Throws ZeroRange.
double constraint_rate(const PolarState& p, double u);

/// psi(xi) = -exp(-xi)
double psi(double xi);
/// psi'(xi) = exp(-xi)
double psi_prime(double xi);

/// Inverts S(sigma) = psi(xi). Throws ConstraintActive when |sigma| >= sigma_max.
double xi_from_sigma(double sigma, const FovConfig& fov);

}  // namespace itcg

#endif  // ITCG_GEOMETRY_HPP
