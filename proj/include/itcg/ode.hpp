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

// Adaptive Dormand-Prince 5(4) stepper with FSAL and the fourth-order
// continuous extension (Hairer, Norsett & Wanner, dopri5). The caller drives
// it one accepted step at a time, which keeps event location and state
// re-projection outside of the integrator.

#ifndef ITCG_ODE_HPP
#define ITCG_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "itcg/errors.hpp"

namespace itcg::ode {

struct Tolerances {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_min = 1e-14;
    long max_steps = 2'000'000;
};

template <std::size_t N>
class DormandPrince {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    DormandPrince(Rhs rhs, Tolerances tol) : rhs_(std::move(rhs)), tol_(tol) {}

    /// Restarts at (t, y); the next step re-evaluates the derivative.
    void reset(double t, const State& y) {
        t_ = t_prev_ = t;
        y_ = y_prev_ = y;
        rhs_(t_, y_, k1_);
        ++n_eval_;
        if (!finite(k1_)) throw IntegrationFailure("non-finite derivative at restart", t_);
    }

    /// Takes one accepted step towards t_end without passing it.
    void step(double t_end) {
        const double span = t_end - t_;
        if (!(span > 0.0)) return;
        if (h_ <= 0.0) h_ = initial_step(span);
        bool rejected = false;
        for (;;) {
            if (++n_steps_ > tol_.max_steps) throw IntegrationFailure("step budget exhausted", t_);
            double h = std::min(h_, t_end - t_);
            const bool last = h >= t_end - t_;
            if (h < tol_.h_min && !last) throw IntegrationFailure("step size collapsed", t_);

            const double err = attempt(h);
            if (!(err <= 1.0)) {
                // Non-finite stages count as a hard rejection.
                const double fac = std::isfinite(err) ? std::min(5.0, std::pow(err, 0.2) / 0.9) : 10.0;
                h_ = h / fac;
                rejected = true;
                continue;
            }
            double fac = std::pow(err, 0.2 - 0.04 * 0.75) / std::pow(fac_old_, 0.04);
            fac = std::clamp(fac / 0.9, 0.1, 5.0);
            double h_new = h / fac;
            if (rejected) h_new = std::min(h_new, h);
            fac_old_ = std::max(err, 1e-4);

            build_dense(h);
            t_prev_ = t_;
            y_prev_ = y_;
            t_ = last ? t_end : t_ + h;
            y_ = y_new_;
            k1_ = k7_;  // FSAL
            h_ = h_new;
            return;
        }
    }

    /// Continuous extension over the last accepted step [t_prev, t].
    State dense(double t) const {
        const double h = t_ - t_prev_;
        if (h <= 0.0) return y_;
        const double s = (t - t_prev_) / h;
        const double s1 = 1.0 - s;
        State out;
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = rcont_[0][i] + s * (rcont_[1][i] + s1 * (rcont_[2][i] + s * (rcont_[3][i] + s1 * rcont_[4][i])));
        }
        return out;
    }

    double t() const { return t_; }
    double t_prev() const { return t_prev_; }
    const State& y() const { return y_; }
    const State& dydt() const { return k1_; }
    long evaluations() const { return n_eval_; }
    long steps() const { return n_steps_; }

private:
    static bool finite(const State& v) {
        return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
    }

    double initial_step(double span) {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = tol_.abs_tol + tol_.rel_tol * std::abs(y_[i]);
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1 += (k1_[i] / sc) * (k1_[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min({h, span, 0.1 * span + 1e-6});
    }

    double attempt(double h) {
        constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
        constexpr double a21 = 0.2;
        constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                         a54 = -212.0 / 729.0;
        constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                         a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
        constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                         a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
        constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                         e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        State tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1_[i];
        rhs_(t_ + c2 * h, tmp, k2_);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        rhs_(t_ + c3 * h, tmp, k3_);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        rhs_(t_ + c4 * h, tmp, k4_);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        rhs_(t_ + c5 * h, tmp, k5_);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        rhs_(t_ + h, tmp, k6_);
        for (std::size_t i = 0; i < N; ++i)
            y_new_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        rhs_(t_ + h, y_new_, k7_);
        n_eval_ += 6;

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
            const double sc = tol_.abs_tol + tol_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / N);
        if (!std::isfinite(err) || !finite(y_new_) || !finite(k7_)) return std::numeric_limits<double>::infinity();
        return err;
    }

    void build_dense(double h) {
        constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                         d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                         d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double dy = y_new_[i] - y_[i];
            const double bspl = h * k1_[i] - dy;
            rcont_[0][i] = y_[i];
            rcont_[1][i] = dy;
            rcont_[2][i] = bspl;
            rcont_[3][i] = dy - h * k7_[i] - bspl;
            rcont_[4][i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
        }
    }

    Rhs rhs_;
    Tolerances tol_;
    double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0, fac_old_ = 1e-4;
    State y_{}, y_prev_{}, y_new_{};
    State k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
    std::array<State, 5> rcont_{};
    long n_eval_ = 0;
    long n_steps_ = 0;
};

}  // namespace itcg::ode

#endif  // ITCG_ODE_HPP
