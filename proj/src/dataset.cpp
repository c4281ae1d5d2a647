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

#include "itcg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "itcg/errors.hpp"
#include "itcg/text.hpp"
#include "itcg/version.hpp"

namespace itcg {

namespace {

constexpr const char* kCsvHeader = "r,sigma,tgo,u";

}  // namespace

Channel fit_channel(const std::vector<double>& values) {
    if (values.empty()) return {};
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double span = *hi - *lo;
    const double mag = std::max(std::abs(*lo), std::abs(*hi));
    if (span <= 1e-12 * std::max(1.0, mag)) {
        const double m = std::max(mag, 1e-6);
        return {-m, m};
    }
    return {*lo, *hi};
}

std::vector<PolarSample> polar_of_trajectory(const ExtremalTrajectory& traj) {
    std::vector<PolarSample> out;
    out.reserve(traj.points.size());
    for (const auto& p : traj.points) {
        const PolarState pol = to_polar({p.z.x, p.z.y, p.z.theta});
        out.push_back({p.tau, pol.r, pol.sigma});
    }
    return out;
}

std::vector<Sample> extract_samples(const ExtremalTrajectory& traj, int stride) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    std::vector<Sample> out;
    const double tau_min = 2.0 * traj.tau0;
    for (std::size_t i = 0; i < traj.points.size(); i += static_cast<std::size_t>(stride)) {
        const ExtremalPoint& p = traj.points[i];
        if (p.tau < tau_min) continue;
        const PolarState pol = to_polar({p.z.x, p.z.y, p.z.theta});
        if (pol.sigma < 0.0) {
            out.push_back({pol.r, -pol.sigma, p.tau, -p.u.u});
        } else {
            out.push_back({pol.r, pol.sigma, p.tau, p.u.u});
        }
    }
    return out;
}

Dataset build(const std::vector<const ExtremalTrajectory*>& trajs, int stride, double T_bar,
              const std::string& grid_description) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (!(T_bar > 0.0)) throw std::invalid_argument("T_bar must be positive");
    Dataset ds;
    ds.meta.T_bar = T_bar;
    ds.meta.stride = stride;
    ds.meta.grid = grid_description;
    ds.meta.generator_version = kVersion;
    std::set<std::pair<double, double>> seen;
    bool first = true;
    for (const ExtremalTrajectory* t : trajs) {
        if (t == nullptr || t->points.empty()) continue;
        if (!seen.insert({t->seed.alpha, t->seed.beta}).second) continue;
        if (first) {
            ds.meta.sigma_max = t->seed.sigma_max;
            ds.meta.eps = t->eps;
            first = false;
        } else if (t->seed.sigma_max != ds.meta.sigma_max) {
            throw std::invalid_argument("trajectories disagree on sigma_max");
        }
        std::vector<Sample> s = extract_samples(*t, stride);
        // Riding arcs sit on the boundary up to integration noise (~1e-11 rad).
        for (auto& smp : s) smp.sigma = std::min(smp.sigma, ds.meta.sigma_max);
        ds.meta.sources.push_back({t->seed.alpha, t->seed.beta, ds.samples.size(), s.size()});
        ds.samples.insert(ds.samples.end(), s.begin(), s.end());
    }
    if (ds.samples.empty()) throw EmptySweep("no samples in the given trajectories");

    std::vector<double> r, u;
    r.reserve(ds.samples.size());
    u.reserve(ds.samples.size());
    for (const auto& s : ds.samples) {
        r.push_back(s.r);
        u.push_back(s.u);
    }
    ds.norm.r = fit_channel(r);
    ds.norm.u = fit_channel(u);
    ds.norm.sigma = {0.0, ds.meta.sigma_max};
    ds.norm.t_go = {0.0, T_bar};
    return ds;
}

Dataset build(const SweepResult& sweep, int stride) {
    std::ostringstream grid;
    grid << sweep.grid.n_alpha << "x" << sweep.grid.n_beta << " alpha_bar=" << text::format_double(sweep.grid.alpha_bar)
         << " refine_gap=" << text::format_double(sweep.grid.refine_gap) << " seeds=" << sweep.items.size();
    return build(sweep.trajectories(), stride, sweep.config.T_bar, grid.str());
}

std::string sidecar_path(const std::string& csv_path) {
    const std::string ext = ".csv";
    if (csv_path.size() >= ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0) {
        return csv_path.substr(0, csv_path.size() - ext.size()) + ".meta.json";
    }
    return csv_path + ".meta.json";
}

nlohmann::json to_json(const NormStats& n) {
    auto ch = [](const Channel& c) { return nlohmann::json{{"min", c.min}, {"max", c.max}}; };
    return {{"r", ch(n.r)}, {"sigma", ch(n.sigma)}, {"tgo", ch(n.t_go)}, {"u", ch(n.u)}};
}

NormStats norm_from_json(const nlohmann::json& j) {
    auto ch = [&](const char* key) {
        const auto& c = j.at(key);
        Channel out{c.at("min").get<double>(), c.at("max").get<double>()};
        if (!(out.max > out.min)) throw Malformed(std::string("degenerate channel ") + key);
        return out;
    };
    return {ch("r"), ch("sigma"), ch("tgo"), ch("u")};
}

void save(const Dataset& ds, const std::string& csv_path) {
    using text::format_double;
    std::string body = std::string(kCsvHeader) + "\n";
    body.reserve(ds.samples.size() * 96);
    for (const auto& s : ds.samples) {
        body += format_double(s.r);
        body += ',';
        body += format_double(s.sigma);
        body += ',';
        body += format_double(s.t_go);
        body += ',';
        body += format_double(s.u);
        body += '\n';
    }
    text::write_file(csv_path, body);

    nlohmann::json meta;
    meta["samples"] = ds.samples.size();
    meta["norm"] = to_json(ds.norm);
    meta["sigma_max"] = ds.meta.sigma_max;
    meta["eps"] = ds.meta.eps;
    meta["T_bar"] = ds.meta.T_bar;
    meta["stride"] = ds.meta.stride;
    meta["grid"] = ds.meta.grid;
    meta["generator_version"] = ds.meta.generator_version;
    nlohmann::json src = nlohmann::json::array();
    for (const auto& s : ds.meta.sources) src.push_back({s.alpha, s.beta, s.first, s.count});
    meta["sources"] = std::move(src);
    text::write_file(sidecar_path(csv_path), meta.dump(2) + "\n");
}

Dataset load(const std::string& csv_path) {
    Dataset ds;
    const std::string side = sidecar_path(csv_path);
    std::string meta_text;
    try {
        meta_text = text::read_file(side);
    } catch (const IoError&) {
        throw Malformed("missing dataset sidecar " + side);
    }
    std::size_t expected = 0;
    try {
        const nlohmann::json meta = nlohmann::json::parse(meta_text);
        expected = meta.at("samples").get<std::size_t>();
        ds.norm = norm_from_json(meta.at("norm"));
        ds.meta.sigma_max = meta.at("sigma_max").get<double>();
        ds.meta.eps = meta.at("eps").get<double>();
        ds.meta.T_bar = meta.at("T_bar").get<double>();
        ds.meta.stride = meta.at("stride").get<int>();
        ds.meta.grid = meta.at("grid").get<std::string>();
        ds.meta.generator_version = meta.at("generator_version").get<std::string>();
        for (const auto& s : meta.at("sources")) {
            ds.meta.sources.push_back(
                {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<std::size_t>(), s.at(3).get<std::size_t>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Malformed("bad dataset sidecar: " + std::string(e.what()));
    }

    const std::string body = text::read_file(csv_path);
    std::size_t pos = 0;
    std::size_t lineno = 0;
    ds.samples.reserve(expected);
    while (pos < body.size()) {
        std::size_t end = body.find('\n', pos);
        if (end == std::string::npos) end = body.size();
        const std::string_view line = text::trim(std::string_view(body).substr(pos, end - pos));
        pos = end + 1;
        ++lineno;
        if (lineno == 1) {
            if (line != kCsvHeader) throw Malformed("expected header " + std::string(kCsvHeader), 1);
            continue;
        }
        if (line.empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 4) throw Malformed("expected 4 fields", lineno);
        double v[4];
        for (int i = 0; i < 4; ++i) {
            const auto d = text::parse_double(f[static_cast<std::size_t>(i)]);
            if (!d) throw Malformed("bad number", lineno);
            v[i] = *d;
        }
        ds.samples.push_back({v[0], v[1], v[2], v[3]});
    }
    if (lineno == 0) throw Malformed("empty dataset file", 1);
    if (ds.samples.size() != expected) {
        throw Malformed("sample count " + std::to_string(ds.samples.size()) + " does not match sidecar " +
                            std::to_string(expected),
                        lineno);
    }
    return ds;
}

}  // namespace itcg
