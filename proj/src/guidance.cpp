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

#include "itcg/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "itcg/errors.hpp"
#include "itcg/geometry.hpp"
#include "itcg/text.hpp"

namespace itcg {

void ScalingParams::validate() const {
    if (!(t_ref > 0.0 && t_ref <= T_bar)) throw std::invalid_argument("need 0 < t_ref <= T_bar");
}

ScaledQuery scale_query(const GuidanceQuery& q, const ScalingParams& sp) {
    sp.validate();
    if (!(q.speed > 0.0) || !(q.r >= 0.0)) throw std::invalid_argument("query needs speed > 0 and r >= 0");
    if (!q.feasible()) throw InfeasibleQuery("target unreachable: t_go * speed < r");
    ScaledQuery s;
    s.sigma = q.sigma;
    if (sp.mode == ScalingMode::Direct) {
        s.k = 1.0;
        s.t_go = q.t_go;
    } else {
        s.k = q.t_go / sp.t_ref;
        s.t_go = sp.t_ref;
    }
    s.r_n = q.r / (q.speed * s.k);
    s.gain = q.speed / s.k;
    return s;
}

double nn_command(const MlpModel& m, const GuidanceQuery& q, double a_max, const ScalingParams& sp) {
    const ScaledQuery s = scale_query(q, sp);
    const double sign = q.sigma >= 0.0 ? 1.0 : -1.0;
    // No optimal feedback exists outside the FOV: query the boundary and add
    // the command that holds sigma there plus a pull back towards it.
    const double sigma_max = m.norm.sigma.max;
    const double abs_sigma = std::abs(s.sigma);
    double a = s.gain * forward(m, s.r_n, std::min(abs_sigma, sigma_max), s.t_go);
    if (abs_sigma > sigma_max && q.r > 0.0) {
        a += q.speed * q.speed * (std::sin(abs_sigma) - std::sin(sigma_max)) / q.r +
             q.speed * kFovPullBack * (abs_sigma - sigma_max) / q.t_go;
    }
    return sign * std::clamp(a, -a_max, a_max);
}

double pn_command(const GuidanceQuery& q, double N) {
    if (q.r < kZeroRange) throw ZeroRange("pn_command");
    const double lambda_dot = q.speed * std::sin(q.sigma) / q.r;
    return N * q.speed * lambda_dot;
}

NnLaw::NnLaw(std::shared_ptr<const MlpModel> model, double a_max, ScalingParams sp, double handover_t_go)
    : model_(std::move(model)), a_max_(a_max), sp_(sp), handover_t_go_(handover_t_go) {
    if (!model_) throw std::invalid_argument("NnLaw needs a model");
    if (!(handover_t_go >= 0.0)) throw std::invalid_argument("handover_t_go must be >= 0");
    sp_.validate();
}

double NnLaw::command(const GuidanceQuery& q) {
    if (q.r <= 0.0) return 0.0;
    if (q.t_go < handover_t_go_) {
        if (q.r < kZeroRange) return 0.0;
        return std::clamp(pn_command(q, 3.0), -a_max_, a_max_);
    }
    GuidanceQuery g = q;
    if (!g.feasible()) {
        g.t_go = g.r / g.speed;
        while (!g.feasible()) g.t_go = std::nextafter(g.t_go, HUGE_VAL);
    }
    return nn_command(*model_, g, a_max_, sp_);
}

std::string PnLaw::name() const { return "PN(N=" + text::format_double(N_) + ")"; }

double PnLaw::command(const GuidanceQuery& q) {
    if (q.r < kZeroRange) return 0.0;
    return std::clamp(pn_command(q, N_), -a_max_, a_max_);
}

PnHoldLaw::PnHoldLaw(double N, double sigma_hold, double switch_t_go, double a_max, double k_hold)
    : N_(N), sigma_hold_(sigma_hold), switch_t_go_(switch_t_go), a_max_(a_max), k_hold_(k_hold) {
    if (!(sigma_hold >= 0.0 && sigma_hold < std::numbers::pi / 2)) throw std::invalid_argument("sigma_hold must be in [0, pi/2)");
    if (!(k_hold > 0.0)) throw std::invalid_argument("k_hold must be positive");
}

std::string PnHoldLaw::name() const {
    return "PN-hold(N=" + text::format_double(N_) +
           " hold_deg=" + text::format_double(std::round(sigma_hold_ * 180.0 / std::numbers::pi * 1e3) / 1e3) + ")";
}

double PnHoldLaw::command(const GuidanceQuery& q) {
    if (q.r < kZeroRange) return 0.0;
    if (q.t_go <= switch_t_go_) return std::clamp(pn_command(q, N_), -a_max_, a_max_);
    const double target = q.sigma >= 0.0 ? sigma_hold_ : -sigma_hold_;
    // d sigma/dt = (V^2 sin(sigma)/r - a) / V, so this gives d sigma/dt = k (target - sigma).
    const double a = pn_command(q, 1.0) - q.speed * k_hold_ * (target - q.sigma);
    return std::clamp(a, -a_max_, a_max_);
}

}  // namespace itcg
