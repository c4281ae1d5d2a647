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

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "itcg/errors.hpp"
#include "itcg/geometry.hpp"
#include "itcg/ode.hpp"

using namespace itcg;

namespace {

constexpr double kPi = std::numbers::pi;

// Smooth, non-trivial turn-rate schedule for the flow comparisons.
double turn_rate(double t) { return 0.4 * std::sin(3.0 * t) - 0.2; }

}  // namespace

TEST_CASE("kinematics keep unit speed") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const CartesianState s{ang(rng), ang(rng), ang(rng)};
        const double u = ang(rng);
        const auto d = kinematics_rhs(s, u);
        CHECK(std::abs(d.dx * d.dx + d.dy * d.dy - 1.0) <= 4e-16);
        CHECK(d.dtheta == u);
    }
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
    for (double a = -20.0; a < 20.0; a += 0.37) {
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(std::abs(std::remainder(w - a, 2.0 * kPi)) < 1e-12);
    }
}

TEST_CASE("lead angle of hand-placed states") {
    // Heading straight at the target.
    auto p = to_polar({-3.0, 0.0, 0.0});
    CHECK(p.r == doctest::Approx(3.0));
    CHECK(p.sigma == doctest::Approx(0.0));
    // Target behind: |sigma| = pi.
    CHECK(std::abs(to_polar({-3.0, 0.0, kPi}).sigma) == doctest::Approx(kPi));
    // Pointing to the left of the LOS (counter-clockwise) is a negative lead.
    CHECK(to_polar({-1.0, 0.0, 0.3}).sigma == doctest::Approx(-0.3));
    CHECK(to_polar({0.0, -2.0, kPi / 2.0 - 0.2}).sigma == doctest::Approx(0.2));
    CHECK(lead_from_los(kPi, 0.25) == doctest::Approx(-0.25));
}

TEST_CASE("from_polar inverts to_polar") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> r(0.01, 50.0), s(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        const PolarState p{r(rng), s(rng)};
        const auto q = to_polar(from_polar(p));
        CHECK(q.r == doctest::Approx(p.r).epsilon(1e-14));
        CHECK(std::abs(q.sigma - p.sigma) < 1e-13);
    }
}

TEST_CASE("mirror across the x-axis negates sigma exactly") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-5.0, 5.0), th(-3.1, 3.1);
    for (int i = 0; i < 2000; ++i) {
        const CartesianState s{d(rng), d(rng), th(rng)};
        const auto a = to_polar(s);
        const auto b = to_polar({s.x, -s.y, -s.theta});
        CHECK(b.r == a.r);
        CHECK(b.sigma == -a.sigma);
    }
}

TEST_CASE("origin is a ZeroRange error") {
    CHECK_THROWS_AS(to_polar({0.0, 0.0, 1.0}), ZeroRange);
    CHECK_THROWS_AS(polar_rhs({0.0, 0.1}, 0.0), ZeroRange);
    CHECK_THROWS_AS(constraint_rate({0.0, 0.1}, 0.0), ZeroRange);
}

TEST_CASE("make_fov validates the half-angle") {
    CHECK(make_fov(0.5).sigma_max == 0.5);
    CHECK(make_fov(kPi / 2.0).sigma_max == kPi / 2.0);
    CHECK_THROWS_AS(make_fov(0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_fov(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_fov(kPi / 2.0 + 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(make_fov(std::nan("")), std::invalid_argument);
}

TEST_CASE("cartesian and polar flows agree") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> r(0.1 + 1.2, 5.0), s(-1.5, 1.5);
    const ode::Tolerances tol{1e-12, 1e-13};
    for (int i = 0; i < 50; ++i) {
        // r0 > 1.3 keeps the range above 0.1 over the unit horizon.
        const PolarState p0{r(rng), s(rng)};
        ode::DormandPrince<3> cart(
            [](double t, const std::array<double, 3>& y, std::array<double, 3>& dy) {
                const auto k = kinematics_rhs({y[0], y[1], y[2]}, turn_rate(t));
                dy = {k.dx, k.dy, k.dtheta};
            },
            tol);
        ode::DormandPrince<2> pol(
            [](double t, const std::array<double, 2>& y, std::array<double, 2>& dy) {
                const auto k = polar_rhs({y[0], y[1]}, turn_rate(t));
                dy = {k.dr, k.dsigma};
            },
            tol);
        const auto c0 = from_polar(p0);
        cart.reset(0.0, {c0.x, c0.y, c0.theta});
        pol.reset(0.0, {p0.r, p0.sigma});
        for (double t_end = 0.1; t_end <= 1.0 + 1e-12; t_end += 0.1) {
            while (cart.t() < t_end) cart.step(t_end);
            while (pol.t() < t_end) pol.step(t_end);
            const auto& y = cart.y();
            const auto q = to_polar({y[0], y[1], y[2]});
            CHECK(std::abs(q.r - pol.y()[0]) < 1e-9);
            CHECK(std::abs(q.sigma - pol.y()[1]) < 1e-9);
        }
    }
}

TEST_CASE("saturation round trip") {
    for (double sm : {0.3, kPi / 6.0, kPi / 4.0, kPi / 3.0, kPi / 2.0}) {
        const auto fov = make_fov(sm);
        for (double sigma = -(sm - 1e-6); sigma <= sm - 1e-6; sigma += sm / 97.0) {
            const double xi = xi_from_sigma(sigma, fov);
            CHECK(std::abs(constraint_value(sigma, fov) - psi(xi)) < 1e-12);
        }
        const double edge = sm - 1e-6;
        CHECK(std::abs(constraint_value(edge, fov) - psi(xi_from_sigma(edge, fov))) < 1e-12);
        CHECK_THROWS_AS(xi_from_sigma(sm, fov), ConstraintActive);
        CHECK_THROWS_AS(xi_from_sigma(-sm - 0.1, fov), ConstraintActive);
    }
}

TEST_CASE("psi is strictly increasing with the stated derivative") {
    for (double xi = -3.0; xi <= 10.0; xi += 0.25) {
        const double h = 1e-6;
        const double fd = (psi(xi + h) - psi(xi - h)) / (2.0 * h);
        CHECK(psi_prime(xi) > 0.0);
        CHECK(psi(xi) < 0.0);
        CHECK(std::abs(fd - psi_prime(xi)) < 1e-8 * (1.0 + psi_prime(xi)));
    }
}

TEST_CASE("constraint_rate is the time derivative of the constraint") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> r(0.2, 5.0), s(-1.5, 1.5), u(-2.0, 2.0);
    const auto fov = make_fov(kPi / 3.0);
    const double h = 1e-4;
    for (int i = 0; i < 1000; ++i) {
        const PolarState p{r(rng), s(rng)};
        const double uc = u(rng);
        // Central difference along the flow with a frozen control, RK4 half steps.
        auto advance = [&](double dt) {
            auto f = [&](PolarState q) { return polar_rhs(q, uc); };
            const auto k1 = f(p);
            const auto k2 = f({p.r + 0.5 * dt * k1.dr, p.sigma + 0.5 * dt * k1.dsigma});
            const auto k3 = f({p.r + 0.5 * dt * k2.dr, p.sigma + 0.5 * dt * k2.dsigma});
            const auto k4 = f({p.r + dt * k3.dr, p.sigma + dt * k3.dsigma});
            return p.sigma + dt / 6.0 * (k1.dsigma + 2.0 * k2.dsigma + 2.0 * k3.dsigma + k4.dsigma);
        };
        const double fd = (constraint_value(advance(h), fov) - constraint_value(advance(-h), fov)) / (2.0 * h);
        const double an = constraint_rate(p, uc);
        CHECK(std::abs(fd - an) < 1e-6 * (1.0 + std::abs(an)));
    }
}
