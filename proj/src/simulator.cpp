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

#include "itcg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "itcg/text.hpp"

namespace itcg {

namespace {

struct Pose {
    double x, y, theta;
};

Pose rk4(const Pose& s, double speed, double a, double h) {
    const double w = a / speed;
    auto f = [&](double th) { return std::pair{speed * std::cos(th), speed * std::sin(th)}; };
    const auto [k1x, k1y] = f(s.theta);
    const auto [k2x, k2y] = f(s.theta + 0.5 * h * w);
    const auto [k4x, k4y] = f(s.theta + h * w);
    // The heading is linear in time, so stages 2 and 3 coincide.
    return {s.x + h / 6.0 * (k1x + 4.0 * k2x + k4x), s.y + h / 6.0 * (k1y + 4.0 * k2y + k4y), s.theta + h * w};
}

}  // namespace

void Scenario::validate() const {
    if (!(r0 > 0.0 && speed > 0.0 && t_f > 0.0)) throw std::invalid_argument("scenario needs r0, speed, t_f > 0");
    if (!(dt_integrate > 0.0 && dt_integrate <= dt_guidance)) {
        throw std::invalid_argument("need 0 < dt_integrate <= dt_guidance");
    }
    if (!(t_f * speed >= r0)) throw std::invalid_argument("t_f * speed must be at least r0");
    if (!(a_max > 0.0 && capture_radius > 0.0 && timeout >= 0.0)) throw std::invalid_argument("bad scenario limits");
    make_fov(sigma_max);
}

Scenario scenario_from_pose(double x, double y, double theta, const Scenario& base) {
    const PolarState p = to_polar({x, y, theta});
    Scenario sc = base;
    sc.r0 = p.r;
    sc.sigma0 = p.sigma;
    return sc;
}

CartesianState initial_pose(const Scenario& sc) { return from_polar({sc.r0, sc.sigma0}); }

MinTime min_time(const Scenario& sc) {
    MinTime mt;
    mt.lower_bound = sc.r0 / sc.speed;
    mt.max_time = sc.r0 / (sc.speed * std::cos(sc.sigma_max));
    mt.fov_feasible = std::abs(sc.sigma0) <= sc.sigma_max;
    if (sc.sigma0 == 0.0) {
        mt.estimate = mt.lower_bound;
        return mt;
    }
    const double dir = sc.sigma0 > 0.0 ? 1.0 : -1.0;
    const double h = std::min(sc.dt_integrate, 1e-3);
    const CartesianState c = initial_pose(sc);
    Pose s{c.x, c.y, c.theta};
    double t = 0.0;
    double prev_sigma = sc.sigma0;
    const double t_cap = 100.0 * mt.lower_bound;
    while (t < t_cap) {
        const Pose n = rk4(s, sc.speed, dir * sc.a_max, h);
        const PolarState p = to_polar({n.x, n.y, n.theta});
        if (p.r < sc.capture_radius) {
            mt.estimate = t + h;
            return mt;
        }
        if (std::abs(p.sigma) > sc.sigma_max) mt.fov_feasible = false;
        if ((p.sigma > 0.0) != (prev_sigma > 0.0) || p.sigma == 0.0) {
            // Interpolate the zero of sigma inside the step, then fly straight.
            const double w = prev_sigma / (prev_sigma - p.sigma);
            const PolarState q = to_polar({s.x, s.y, s.theta});
            const double r_zero = q.r + w * (p.r - q.r);
            mt.estimate = t + w * h + r_zero / sc.speed;
            return mt;
        }
        prev_sigma = p.sigma;
        s = n;
        t += h;
    }
    mt.estimate = std::numeric_limits<double>::infinity();
    mt.fov_feasible = false;
    return mt;
}

SimResult run(const Scenario& sc, GuidanceLaw& law) {
    sc.validate();
    SimResult res;
    res.law = law.name();
    res.speed = sc.speed;
    res.sigma_peak = std::abs(sc.sigma0);
    const MinTime mt = min_time(sc);
    if (sc.t_f < mt.estimate) {
        res.advisory = "InfeasibleScenario";
        res.miss_distance = sc.r0;
        return res;
    }
    if (sc.t_f > mt.max_time) res.advisory = "FovInfeasible";

    const int n_sub = std::max(1, static_cast<int>(std::lround(sc.dt_guidance / sc.dt_integrate)));
    const double h = sc.dt_guidance / n_sub;
    const CartesianState c = initial_pose(sc);
    Pose s{c.x, c.y, c.theta};
    double t = 0.0;
    double r = sc.r0;
    double sigma = sc.sigma0;
    res.miss_distance = r;
    const double t_end = sc.t_f + sc.timeout;

    while (t <= t_end && !res.intercepted) {
        double a = law.command({r, sigma, sc.t_f - t, sc.speed});
        if (!std::isfinite(a)) a = 0.0;
        if (!res.history.empty()) res.max_da = std::max(res.max_da, std::abs(a - res.history.back().a));
        res.a_peak = std::max(res.a_peak, std::abs(a));
        res.history.push_back({t, s.x, s.y, s.theta, sigma, r, a});
        for (int i = 0; i < n_sub; ++i) {
            const Pose n = rk4(s, sc.speed, a, h);
            const double r_new = std::hypot(n.x, n.y);
            if (r_new < sc.capture_radius) {
                const double w = (r - sc.capture_radius) / (r - r_new);
                res.intercepted = true;
                res.impact_time = t + w * h;
                // Close out the history at the end of this step with the held
                // command, then follow the same arc to the closest approach.
                const PolarState p = to_polar({n.x, n.y, n.theta});
                res.sigma_peak = std::max(res.sigma_peak, std::abs(p.sigma));
                res.history.push_back({t + h, n.x, n.y, n.theta, p.sigma, r_new, a});
                double best = r_new;
                Pose m = n;
                for (int k = 0; k < 1000; ++k) {
                    m = rk4(m, sc.speed, a, h);
                    const double rm = std::hypot(m.x, m.y);
                    if (rm >= best) break;
                    best = rm;
                }
                res.miss_distance = std::min(res.miss_distance, best);
                break;
            }
            s = n;
            t += h;
            r = r_new;
            res.miss_distance = std::min(res.miss_distance, r);
            sigma = to_polar({s.x, s.y, s.theta}).sigma;
            res.sigma_peak = std::max(res.sigma_peak, std::abs(sigma));
        }
    }
    for (std::size_t i = 1; i < res.history.size(); ++i) {
        const HistoryRow& p = res.history[i - 1];
        const HistoryRow& q = res.history[i];
        res.effort_J += 0.25 * (q.t - p.t) * (p.a * p.a + q.a * q.a);
    }
    return res;
}

namespace {

ComparisonRow summarize(const Scenario& sc, const SimResult& r) {
    ComparisonRow row;
    row.law = r.law;
    row.intercepted = r.intercepted;
    row.impact_time = r.impact_time;
    row.impact_error = r.intercepted ? r.impact_time - sc.t_f : std::numeric_limits<double>::quiet_NaN();
    row.sigma_peak = r.sigma_peak;
    row.effort_J = r.effort_J;
    row.a_peak = r.a_peak;
    row.max_da = r.max_da;
    return row;
}

}  // namespace

std::vector<ComparisonRow> compare(const Scenario& sc, const std::vector<GuidanceLaw*>& laws) {
    if (laws.empty()) throw std::invalid_argument("compare needs at least one law");
    std::vector<ComparisonRow> rows;
    for (GuidanceLaw* law : laws) {
        rows.push_back(summarize(sc, run(sc, *law)));
    }
    return rows;
}


std::vector<TimedPnRow> timed_pn_baselines(const Scenario& sc,
                                           const std::vector<double>& gains,
                                           const std::vector<double>& hold_fractions,
                                           double time_tol) {
    sc.validate();
    std::vector<TimedPnRow> out;
    for (double N : gains) {
        for (double f : hold_fractions) {
            const double hold = f * sc.sigma_max;
            if (!(hold < std::numbers::pi / 2)) continue;
            // Impact time grows as the switch moves later (smaller switch t_go).
            auto fly = [&](double switch_t_go) {
                PnHoldLaw law(N, hold, switch_t_go, sc.a_max);
                return run(sc, law);
            };
            double lo = 0.0, hi = sc.t_f;
            SimResult late = fly(lo);
            SimResult early = fly(hi);
            if (late.intercepted && late.impact_time < sc.t_f) continue;
            if (early.intercepted && early.impact_time > sc.t_f) continue;
            SimResult best = late;
            double best_switch = lo;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                SimResult r = fly(mid);
                const bool is_late = !r.intercepted || r.impact_time > sc.t_f;
                if (r.intercepted && std::abs(r.impact_time - sc.t_f) < std::abs(best.impact_time - sc.t_f)) {
                    best = r;
                    best_switch = mid;
                }
                if (is_late) lo = mid; else hi = mid;
                if (r.intercepted && std::abs(r.impact_time - sc.t_f) <= time_tol) break;
            }
            if (!best.intercepted || std::abs(best.impact_time - sc.t_f) > time_tol) continue;
            out.push_back({N, hold, best_switch, summarize(sc, best)});
        }
    }
    return out;
}

ExtremalReference matched_reference(const Scenario& sc, const PropagationConfig& cfg) {
    sc.validate();
    const double V = sc.speed, tf = sc.t_f;
    // xi grows without bound on the boundary; 1e-10 deg inside keeps it finite (~28 at 30 deg).
    const double inside = sc.sigma_max - 1e-10 * std::numbers::pi / 180.0;
    const double abs_sigma = std::min(std::abs(sc.sigma0), inside);
    const MatchedExtremal m = match_extremal(sc.r0 / (V * tf), abs_sigma, sc.sigma_max, cfg);

    ExtremalReference ref;
    ref.seed = m.seed;
    ref.effort_J = m.effort * V * V / tf;
    // The extremal flies in a frame with the target at the origin and zero
    // final heading; mirror for negative sigma0, then rotate its start onto
    // the scenario's start.
    const double mirror = sc.sigma0 < 0.0 ? -1.0 : 1.0;
    const ExtremalPoint start = sample_at(m.trajectory, 1.0);
    const CartesianState c0 = initial_pose(sc);
    const double rot = c0.theta - mirror * start.z.theta;
    const double cr = std::cos(rot), sr = std::sin(rot);
    const ExtremalTrajectory fwd = reversed(m.trajectory);
    for (const ExtremalPoint& p : fwd.points) {
        if (p.tau > 1.0 + 1e-12) continue;
        const double x = p.z.x * V * tf, y = mirror * p.z.y * V * tf;
        const double th = mirror * p.z.theta + rot;
        const double sigma = mirror * p.sigma;
        ref.sigma_peak = std::max(ref.sigma_peak, std::abs(sigma));
        ref.history.push_back({tf * (1.0 - p.tau), cr * x - sr * y, sr * x + cr * y, th, sigma, p.r * V * tf,
                               mirror * p.u.u * V / tf});
    }
    return ref;
}

void write_history_csv(const SimResult& res, const std::string& path) {
    using text::format_double;
    std::string out = std::string(kHistoryCsvHeader) + "\n";
    for (const auto& h : res.history) {
        const double v[] = {h.t, h.x, h.y, h.theta, h.sigma, h.r, h.a};
        for (std::size_t i = 0; i < std::size(v); ++i) {
            if (i) out += ',';
            out += format_double(v[i]);
        }
        out += '\n';
    }
    text::write_file(path, out);
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, const std::string& path) {
    using text::format_double;
    std::string out = std::string(kComparisonCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += r.law + ',' + (r.intercepted ? "1" : "0") + ',' + format_double(r.impact_time) + ',' +
               format_double(r.impact_error) + ',' + format_double(r.sigma_peak * 180.0 / std::numbers::pi) + ',' +
               format_double(r.effort_J) + ',' + format_double(r.a_peak) + ',' + format_double(r.max_da) + '\n';
    }
    text::write_file(path, out);
}

nlohmann::json summary_json(const Scenario& sc, const SimResult& res) {
    nlohmann::json j;
    j["scenario"] = {{"r0", sc.r0},
                     {"sigma0", sc.sigma0},
                     {"speed", sc.speed},
                     {"t_f", sc.t_f},
                     {"sigma_max", sc.sigma_max},
                     {"a_max", sc.a_max},
                     {"dt_guidance", sc.dt_guidance},
                     {"dt_integrate", sc.dt_integrate},
                     {"capture_radius", sc.capture_radius}};
    j["law"] = res.law;
    j["intercepted"] = res.intercepted;
    j["impact_time"] = res.impact_time;
    j["impact_error"] = res.intercepted ? res.impact_time - sc.t_f : 0.0;
    j["miss_distance"] = res.miss_distance;
    j["effort_J"] = res.effort_J;
    j["sigma_peak"] = res.sigma_peak;
    j["a_peak"] = res.a_peak;
    j["max_da"] = res.max_da;
    j["advisory"] = res.advisory;
    j["speed"] = res.speed;
    return j;
}

}  // namespace itcg
