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

#include "itcg/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "itcg/errors.hpp"
#include "itcg/geometry.hpp"

namespace itcg {

Epsilon::Epsilon(double eps) : eps_(eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
}

LeadTerms lead_terms(const AugmentedState& z) {
    const double r = std::hypot(z.x, z.y);
    if (r < kZeroRange) throw ZeroRange("lead_terms");
    const double st = std::sin(z.theta);
    const double ct = std::cos(z.theta);
    const double s = (z.x * st - z.y * ct) / r;
    const double c = -(z.x * ct + z.y * st) / r;
    LeadTerms t{r, s, c, {}, {}};
    t.dsin = {st / r - s * z.x / (r * r), -ct / r - s * z.y / (r * r), -c};
    t.dr = {z.x / r, z.y / r, 0.0};
    return t;
}

namespace {

// S' = s^2 / r - u s and its gradient in (x, y, theta) at fixed u.
struct ConstraintRateTerms {
    double value;
    Eigen::Vector3d grad;
};

ConstraintRateTerms constraint_rate_terms(const LeadTerms& t, double u) {
    const double s = t.sin_sigma;
    const double r = t.r;
    ConstraintRateTerms c;
    c.value = s * s / r - u * s;
    c.grad = (2.0 * s / r - u) * t.dsin - (s * s / (r * r)) * t.dr;
    return c;
}

}  // namespace

double hamiltonian(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps) {
    const LeadTerms t = lead_terms(z);
    const double sdot = constraint_rate_terms(t, u.u).value;
    const double e = std::exp(-z.xi);
    return p.px * std::cos(z.theta) + p.py * std::sin(z.theta) + u.u * p.ptheta + p.pxi * u.omega -
           0.5 * u.u * u.u - 0.5 * eps.value() * u.omega * u.omega + u.mu * (sdot - e * u.omega);
}

Eigen::Vector4d hamiltonian_gradient(const AugmentedState& z, const Costate& p, const ControlTriple& u) {
    const LeadTerms t = lead_terms(z);
    const ConstraintRateTerms c = constraint_rate_terms(t, u.u);
    const double e = std::exp(-z.xi);
    return {u.mu * c.grad[0],
            u.mu * c.grad[1],
            -p.px * std::sin(z.theta) + p.py * std::cos(z.theta) + u.mu * c.grad[2],
            u.mu * e * u.omega};
}

Costate costate_rhs(const AugmentedState& z, const Costate& p, const ControlTriple& u) {
    return Costate::from(-hamiltonian_gradient(z, p, u));
}

Eigen::Vector4d state_rhs(const AugmentedState& z, const ControlTriple& u) {
    return {std::cos(z.theta), std::sin(z.theta), u.u, u.omega};
}

Eigen::Vector3d stationarity(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps) {
    const LeadTerms t = lead_terms(z);
    const double s = t.sin_sigma;
    const double e = std::exp(-z.xi);
    return {p.ptheta - u.u - u.mu * s,
            p.pxi - eps.value() * u.omega - u.mu * e,
            s * (s / t.r - u.u) - u.omega * e};
}

Eigen::Matrix3d jacobian_gu(const AugmentedState& z, Epsilon eps) {
    const double s = lead_terms(z).sin_sigma;
    const double e = std::exp(-z.xi);
    Eigen::Matrix3d j;
    j << -1.0, 0.0, -s,
          0.0, -eps.value(), -e,
          -s, -e, 0.0;
    return j;
}

Eigen::Matrix<double, 3, 4> jacobian_gz(const AugmentedState& z, const ControlTriple& u) {
    const LeadTerms t = lead_terms(z);
    const ConstraintRateTerms c = constraint_rate_terms(t, u.u);
    const double e = std::exp(-z.xi);
    Eigen::Matrix<double, 3, 4> j;
    j << -u.mu * t.dsin[0], -u.mu * t.dsin[1], -u.mu * t.dsin[2], 0.0,
          0.0, 0.0, 0.0, u.mu * e,
          c.grad[0], c.grad[1], c.grad[2], u.omega * e;
    return j;
}

Eigen::Matrix<double, 3, 4> jacobian_gp() {
    Eigen::Matrix<double, 3, 4> j;
    j << 0.0, 0.0, 1.0, 0.0,
         0.0, 0.0, 0.0, 1.0,
         0.0, 0.0, 0.0, 0.0;
    return j;
}

ControlTriple control_rate(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps) {
    const Eigen::Matrix3d gu = jacobian_gu(z, eps);
    const Eigen::Vector3d rhs =
        jacobian_gz(z, u) * state_rhs(z, u) - jacobian_gp() * hamiltonian_gradient(z, p, u);
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(gu);
    if (!(std::abs(lu.determinant()) > 0.0)) throw SingularJacobian("dg/dU is singular");
    return ControlTriple::from(-lu.solve(rhs));
}

FlowRates flow_rates(const AugmentedState& z, const Costate& p, const ControlTriple& u, Epsilon eps) {
    const LeadTerms t = lead_terms(z);
    const ConstraintRateTerms c = constraint_rate_terms(t, u.u);
    const double s = t.sin_sigma;
    const double e = std::exp(-z.xi);
    const double st = std::sin(z.theta);
    const double ct = std::cos(z.theta);

    FlowRates out;
    out.dz = {ct, st, u.u, u.omega};
    const Eigen::Vector4d hz{u.mu * c.grad[0], u.mu * c.grad[1], -p.px * st + p.py * ct + u.mu * c.grad[2],
                             u.mu * e * u.omega};
    out.dp = -hz;

    // dg/dz f - dg/dp dH/dz, row by row.
    const Eigen::Vector3d vel{ct, st, u.u};
    const Eigen::Vector3d rhs{-u.mu * t.dsin.dot(vel) - hz[2],
                              u.mu * e * u.omega - hz[3],
                              c.grad.dot(vel) + u.omega * e * u.omega};
    Eigen::Matrix3d gu;
    gu << -1.0, 0.0, -s,
           0.0, -eps.value(), -e,
           -s, -e, 0.0;
    out.du = -gu.partialPivLu().solve(rhs);
    return out;
}

ControlTriple newton_project(const AugmentedState& z,
                             const Costate& p,
                             const ControlTriple& guess,
                             Epsilon eps,
                             double tol,
                             int max_iter) {
    const Eigen::Matrix3d gu = jacobian_gu(z, eps);
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(gu);
    if (!(std::abs(lu.determinant()) > 0.0)) throw SingularJacobian("dg/dU is singular");
    Eigen::Vector3d x = guess.vec();
    double residual = 0.0;
    for (int it = 0; it <= max_iter; ++it) {
        const ControlTriple cur = ControlTriple::from(x);
        const Eigen::Vector3d g = stationarity(z, p, cur, eps);
        residual = g.cwiseAbs().maxCoeff();
        // The residual cannot drop below rounding of its largest term.
        const double scale = std::max({1.0, std::abs(p.ptheta), std::abs(p.pxi), std::abs(cur.u),
                                       std::abs(cur.mu), std::abs(cur.omega)});
        if (residual < tol * scale) return cur;
        if (it == max_iter) break;
        x -= lu.solve(g);
    }
    throw NoConvergence("newton_project did not converge", residual);
}

double regularized_cost(std::span<const double> t,
                        std::span<const double> u,
                        std::span<const double> omega,
                        Epsilon eps) {
    if (t.empty()) throw EmptyTrajectory("regularized_cost needs samples");
    if (u.size() != t.size() || omega.size() != t.size()) {
        throw std::invalid_argument("regularized_cost: mismatched sample lengths");
    }
    double cost = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double a = u[i - 1] * u[i - 1] + eps.value() * omega[i - 1] * omega[i - 1];
        const double b = u[i] * u[i] + eps.value() * omega[i] * omega[i];
        cost += 0.25 * (t[i] - t[i - 1]) * (a + b);
    }
    return cost;
}

}  // namespace itcg
