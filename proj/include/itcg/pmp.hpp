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

// Optimality conditions of the saturation-regularized interception problem
//
//   min 1/2 int (u^2 + eps w^2) dt
//   x' = cos th, y' = sin th, th' = u, xi' = w,
//   S'(z, u) - psi'(xi) w = 0.
//
// The Hamiltonian is
//   H = px cos th + py sin th + u pth + pxi w - u^2/2 - eps w^2/2
//       + mu [S'(z, u) - exp(-xi) w]
// and the stationarity residual g = dH/d(u, w, mu) is affine in the control
// triple with a constant, always invertible Jacobian
//   dg/d(u,w,mu) = [[-1, 0, -s], [0, -eps, -e], [-s, -e, 0]],  s = sin sigma, e = exp(-xi),
// whose determinant is exp(-2 xi) + eps sin^2 sigma.

#ifndef ITCG_PMP_HPP
#define ITCG_PMP_HPP

#include <span>

#include <Eigen/Dense>

namespace itcg {

struct AugmentedState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double xi = 0.0;

    Eigen::Vector4d vec() const { return {x, y, theta, xi}; }
    static AugmentedState from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

struct Costate {
    double px = 0.0;
    double py = 0.0;
    double ptheta = 0.0;
    double pxi = 0.0;

    Eigen::Vector4d vec() const { return {px, py, ptheta, pxi}; }
    static Costate from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

struct ControlTriple {
    double u = 0.0;      // turn rate
    double omega = 0.0;  // d(xi)/dt
    double mu = 0.0;     // multiplier of the equality constraint

    Eigen::Vector3d vec() const { return {u, omega, mu}; }
    static ControlTriple from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

/// Regularization weight on omega^2; must lie in (0, 1).
class Epsilon {
public:
    static constexpr double kDefault = 1e-4;

    Epsilon() = default;
    explicit Epsilon(double eps);

    double value() const { return eps_; }

private:
    double eps_ = kDefault;
};

/// Lead-angle quantities of an augmented state with first derivatives.
struct LeadTerms {
    double r;
    double sin_sigma;
    double cos_sigma;
    Eigen::Vector3d dsin;  // d(sin sigma)/d(x, y, theta)
    Eigen::Vector3d dr;    // dr/d(x, y, theta)
};

/// Throws ZeroRange.
LeadTerms lead_terms(const AugmentedState& z);

double hamiltonian(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps);

/// dH/dz, the gradient of the Hamiltonian with respect to (x, y, theta, xi).
Eigen::Vector4d hamiltonian_gradient(const AugmentedState& z, const Costate& p, const ControlTriple& u);

/// dp/dt = -dH/dz.
Costate costate_rhs(const AugmentedState& z, const Costate& p, const ControlTriple& u);

/// Augmented state rate (cos theta, sin theta, u, omega).
Eigen::Vector4d state_rhs(const AugmentedState& z, const ControlTriple& u);

/// g = (dH/du, dH/domega, dH/dmu).
Eigen::Vector3d stationarity(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps);

Eigen::Matrix3d jacobian_gu(const AugmentedState& z, Epsilon eps);
Eigen::Matrix<double, 3, 4> jacobian_gz(const AugmentedState& z, const ControlTriple& u);
/// dg/dp; constant.
Eigen::Matrix<double, 3, 4> jacobian_gp();

/// dU/dt keeping g = 0 along the coupled state/costate flow. The system is
/// autonomous, so the explicit time partial of g is zero.
ControlTriple control_rate(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps);

/// Time derivatives of the coupled (z, p, U) flow, sharing one evaluation of
/// the lead-angle terms. Equivalent to state_rhs, costate_rhs and control_rate.
struct FlowRates {
    Eigen::Vector4d dz;
    Eigen::Vector4d dp;
    Eigen::Vector3d du;
};
FlowRates flow_rates(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps);

/// Newton iteration on g = 0 from a guess. Throws NoConvergence.
ControlTriple newton_project(const AugmentedState& z,
                             const Costate& p,
                             const ControlTriple& guess,
                             Epsilon eps,
                             double tol = 1e-12,
                             int max_iter = 50);

/// Trapezoidal 1/2 int (u^2 + eps omega^2) dt on a tagged grid. Throws EmptyTrajectory.
double regularized_cost(std::span<const double> t,
                        std::span<const double> u,
                        std::span<const double> omega,
                        Epsilon eps);

}  // namespace itcg

#endif  // ITCG_PMP_HPP
