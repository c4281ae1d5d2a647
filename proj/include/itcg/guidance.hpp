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

// Feedback guidance in physical units. A query (r, sigma, t_go, V) is
// folded onto sigma >= 0 and rescaled so that the network always sees the
// reference time-to-go t_ref: with k = t_go / t_ref the normalized range is
// r / (V k) and the lateral acceleration is (V / k) times the normalized
// turn rate.

#ifndef ITCG_GUIDANCE_HPP
#define ITCG_GUIDANCE_HPP

#include <memory>
#include <string>

#include "itcg/mlp.hpp"

namespace itcg {

struct GuidanceQuery {
    double r = 0.0;      // m
    double sigma = 0.0;  // rad, signed
    double t_go = 0.0;   // s
    double speed = 1.0;  // m/s

    bool feasible() const { return t_go > 0.0 && t_go * speed >= r; }
};

enum class ScalingMode {
    FixedReference,  // network always queried at t_go = t_ref
    Direct,          // k = 1: the query must already be normalized
};

struct ScalingParams {
    double t_ref = 2.5;
    double T_bar = 4.0;
    ScalingMode mode = ScalingMode::FixedReference;

    void validate() const;
};

struct ScaledQuery {
    double k = 1.0;
    double r_n = 0.0;
    double sigma = 0.0;
    double t_go = 0.0;  // normalized time-to-go handed to the network
    double gain = 1.0;  // physical acceleration per normalized turn rate
};

/// Throws InfeasibleQuery when t_go * speed < r or t_go <= 0.
ScaledQuery scale_query(const GuidanceQuery& q, const ScalingParams& sp);

/// Dimensionless gain of the pull back applied when |sigma| exceeds the
/// model's sigma extent; the rate is kFovPullBack / t_go.
inline constexpr double kFovPullBack = 20.0;

/// sign(sigma) * gain * forward(r_n, |sigma|, t) clamped to +-a_max, with
/// sigma = 0 taken as the positive branch. Throws InfeasibleQuery.

double nn_command(const MlpModel& m, const GuidanceQuery& q, double a_max, const ScalingParams& sp = {});

/// N * V * lambda_dot with lambda_dot = V sin(sigma) / r. Throws ZeroRange.
double pn_command(const GuidanceQuery& q, double N);

/// Lateral acceleration command, positive = counter-clockwise turn.
class GuidanceLaw {
public:
    virtual ~GuidanceLaw() = default;
    virtual std::string name() const = 0;
    virtual double command(const GuidanceQuery& q) = 0;
};

/// Network law. Past the feasibility edge (late, or t_go <= 0) the query is
/// evaluated at t_go = r / V, i.e. on the straight-line limit.
// With a fixed impact time any residual timing error e = 1 - r/(V t_go) has
// to be burnt off by holding |sigma| ~ sqrt(2e), which costs a ~ V^2 sin(sigma)/r
// and saturates just before capture. For the last handover_t_go seconds the
// law therefore flies PN with N = 3; the timing slip is about e * handover_t_go.
inline constexpr double kDefaultHandoverTgo = 2.0;  // s

class NnLaw : public GuidanceLaw {
public:
    NnLaw(std::shared_ptr<const MlpModel> model, double a_max, ScalingParams sp = {},
          double handover_t_go = kDefaultHandoverTgo);
    std::string name() const override { return "NN"; }
    double command(const GuidanceQuery& q) override;

private:
    std::shared_ptr<const MlpModel> model_;
    double a_max_;
    ScalingParams sp_;
    double handover_t_go_;
};

/// Proportional navigation, saturated at a_max.
class PnLaw : public GuidanceLaw {
public:
    PnLaw(double N, double a_max) : N_(N), a_max_(a_max) {}
    std::string name() const override;
    double command(const GuidanceQuery& q) override;

private:
    double N_;
    double a_max_;
};

/// PN that first holds |sigma| at sigma_hold (first-order tracking with rate
/// constant k_hold, 1/s) while t_go > switch_t_go, then flies PN with gain N.
/// Holding sigma constant gives dr/dt = -V cos(sigma_hold), so the switch time
/// can place the impact anywhere between the plain PN time and r0 / (V cos sigma_hold).
class PnHoldLaw : public GuidanceLaw {
public:
    PnHoldLaw(double N, double sigma_hold, double switch_t_go, double a_max, double k_hold = 2.0);
    std::string name() const override;
    double command(const GuidanceQuery& q) override;

private:
    double N_;
    double sigma_hold_;
    double switch_t_go_;
    double a_max_;
    double k_hold_;
};

}  // namespace itcg

#endif  // ITCG_GUIDANCE_HPP
