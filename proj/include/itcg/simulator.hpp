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

// Closed-loop planar engagement against a stationary target at the origin.
// The pursuer flies at constant speed; the law's lateral acceleration is
// held between guidance updates and the kinematics are integrated with
// fixed-step RK4.

#ifndef ITCG_SIMULATOR_HPP
#define ITCG_SIMULATOR_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "itcg/extremal.hpp"
#include "itcg/geometry.hpp"
#include "itcg/guidance.hpp"

namespace itcg {

struct Scenario {
    double r0 = 10000.0;       // m
    double sigma0 = 0.0;       // rad, signed
    double speed = 250.0;      // m/s
    double t_f = 60.0;         // desired impact time, s
    double sigma_max = 1.0471975511965976;
    double a_max = 100.0;      // m/s^2
    double dt_guidance = 0.01;
    double dt_integrate = 0.001;
    double capture_radius = 0.5;
    double timeout = 5.0;      // run stops at t_f + timeout

    /// Throws std::invalid_argument.
    void validate() const;
};

/// Scenario whose pursuer starts at the given Cartesian pose (physical units).
Scenario scenario_from_pose(double x, double y, double theta, const Scenario& base);

/// Initial pose of a scenario: pursuer on the negative x-axis, heading -sigma0.
CartesianState initial_pose(const Scenario& sc);

struct HistoryRow {
    double t, x, y, theta, sigma, r, a;
};

struct SimResult {
    std::string law;
    bool intercepted = false;
    double impact_time = 0.0;   // first time r drops below the capture radius
    double miss_distance = 0.0; // closest approach, m
    double effort_J = 0.0;      // 1/2 int a^2 dt over the history (trapezoid), m^2/s^3
    double sigma_peak = 0.0;    // max |sigma| over all integration steps, rad
    double a_peak = 0.0;
    double max_da = 0.0;        // max |a_k - a_{k-1}| between guidance cycles
    // "InfeasibleScenario" when t_f is below the minimum time (not flown),
    // "FovInfeasible" when t_f exceeds MinTime::max_time (flown anyway).
    std::string advisory;
    double speed = 0.0;         // recorded with every result
    std::vector<HistoryRow> history;
};

struct MinTime {
    double lower_bound = 0.0;  // r0 / V
    double estimate = 0.0;     // hard turn towards the target, then straight
    bool fov_feasible = true;  // the estimate path stays within the FOV
    // With |sigma| <= sigma_max the range falls at least at V cos(sigma_max),
    // so no path inside the FOV takes longer than r0 / (V cos(sigma_max)).
    double max_time = 0.0;
};

MinTime min_time(const Scenario& sc);

/// Never throws for a valid scenario; see SimResult::intercepted and advisory.
SimResult run(const Scenario& sc, GuidanceLaw& law);

struct ComparisonRow {
    std::string law;
    bool intercepted = false;
    double impact_time = 0.0;
    double impact_error = 0.0;
    double sigma_peak = 0.0;
    double effort_J = 0.0;
    double a_peak = 0.0;
    double max_da = 0.0;
};

std::vector<ComparisonRow> compare(const Scenario& sc, const std::vector<GuidanceLaw*>& laws);

/// Impact-time-feasible PN family: for each gain and hold angle (fraction of
/// sigma_max) the switch time of PnHoldLaw is bisected until the impact lands
/// on t_f. Combinations that cannot reach t_f are dropped.
struct TimedPnRow {
    double N = 0.0;
    double sigma_hold = 0.0;
    double switch_t_go = 0.0;
    ComparisonRow row;
};

std::vector<TimedPnRow> timed_pn_baselines(const Scenario& sc,
                                           const std::vector<double>& gains,
                                           const std::vector<double>& hold_fractions = {0.85, 0.9, 0.95, 1.0},
                                           double time_tol = 1e-3);

/// Optimal solution of the scenario from the extremal generator, in the
/// scenario's physical frame (history rows every sample of the extremal).
struct ExtremalReference {
    SeedParams seed;
    double effort_J = 0.0;    // 1/2 int a^2 dt, m^2/s^3
    double sigma_peak = 0.0;  // rad
    std::vector<HistoryRow> history;
};

/// Matches an extremal through (r0 / (V t_f), |sigma0|). A start on the FOV
/// boundary is matched a hair inside it. Throws NoConvergence.
ExtremalReference matched_reference(const Scenario& sc, const PropagationConfig& cfg = {});

inline constexpr const char* kHistoryCsvHeader = "t,x,y,theta,sigma,r,a";
inline constexpr const char* kComparisonCsvHeader =
    "law,intercepted,impact_time,impact_error,sigma_peak_deg,effort_J,a_peak,max_da";

void write_history_csv(const SimResult& res, const std::string& path);
void write_comparison_csv(const std::vector<ComparisonRow>& rows, const std::string& path);
nlohmann::json summary_json(const Scenario& sc, const SimResult& res);

}  // namespace itcg

#endif  // ITCG_SIMULATOR_HPP
