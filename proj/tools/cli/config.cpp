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

#include "config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "itcg/errors.hpp"
#include "itcg/text.hpp"

namespace itcg::cli {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

using Setter = std::function<void(const toml::node&, const std::string&)>;

double as_double(const toml::node& n, const std::string& key) {
    if (auto v = n.value_exact<double>()) return *v;
    if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
    throw ConfigError(key, "expected a number");
}

int as_int(const toml::node& n, const std::string& key) {
    auto v = n.value_exact<std::int64_t>();
    if (!v) throw ConfigError(key, "expected an integer");
    if (*v < INT32_MIN || *v > INT32_MAX) throw ConfigError(key, "integer out of range");
    return static_cast<int>(*v);
}

bool as_bool(const toml::node& n, const std::string& key) {
    auto v = n.value_exact<bool>();
    if (!v) throw ConfigError(key, "expected true or false");
    return *v;
}

std::vector<double> as_doubles(const toml::node& n, const std::string& key) {
    const toml::array* arr = n.as_array();
    if (!arr) throw ConfigError(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < arr->size(); ++i) out.push_back(as_double(*arr->get(i), key));
    return out;
}

Setter num(double& dst) {
    return [&dst](const toml::node& n, const std::string& k) { dst = as_double(n, k); };
}
Setter integer(int& dst) {
    return [&dst](const toml::node& n, const std::string& k) { dst = as_int(n, k); };
}
Setter flag(bool& dst) {
    return [&dst](const toml::node& n, const std::string& k) { dst = as_bool(n, k); };
}
Setter list(std::vector<double>& dst) {
    return [&dst](const toml::node& n, const std::string& k) { dst = as_doubles(n, k); };
}

void apply(const toml::table& root, PipelineConfig& c) {
    double eps = c.sweep.propagation.eps.value();
    int seed = static_cast<int>(c.train.seed);
    std::map<std::string, std::map<std::string, Setter>> schema{
        {"sweep",
         {{"sigma_max_deg", num(c.sweep.sigma_max_deg)},
          {"alpha_bar", num(c.sweep.grid.alpha_bar)},
          {"n_alpha", integer(c.sweep.grid.n_alpha)},
          {"n_beta", integer(c.sweep.grid.n_beta)},
          {"alpha_min_ratio", num(c.sweep.grid.alpha_min_ratio)},
          {"refine_gap", num(c.sweep.grid.refine_gap)},
          {"refine_depth", integer(c.sweep.grid.refine_depth)},
          {"T_bar", num(c.sweep.propagation.T_bar)},
          {"eps", num(eps)},
          {"tau0", num(c.sweep.propagation.tau0)},
          {"rel_tol", num(c.sweep.propagation.rel_tol)},
          {"abs_tol", num(c.sweep.propagation.abs_tol)},
          {"sample_dtau", num(c.sweep.propagation.sample_dtau)},
          {"reproject_every", integer(c.sweep.propagation.reproject_every)},
          {"min_success_ratio", num(c.sweep.min_success_ratio)},
          {"per_seed_files", flag(c.sweep.per_seed_files)}}},
        {"dataset", {{"stride", integer(c.dataset.stride)}}},
        {"train",
         {{"seed", integer(seed)},
          {"epochs", integer(c.train.epochs)},
          {"batch_size", integer(c.train.batch_size)},
          {"learning_rate", num(c.train.learning_rate)},
          {"lr_decay", num(c.train.lr_decay)},
          {"min_learning_rate", num(c.train.min_learning_rate)},
          {"validation_fraction", num(c.train.validation_fraction)},
          {"patience", integer(c.train.patience)}}},
        {"guidance",
         {{"t_ref", num(c.guidance.t_ref)},
          {"handover_t_go", num(c.guidance.handover_t_go)},
          {"a_max", num(c.guidance.a_max)},
          {"pn_gains", list(c.guidance.pn_gains)},
          {"pn_hold_fractions", list(c.guidance.pn_hold_fractions)}}},
        {"scenario",
         {{"r0", num(c.scenario.r0)},
          {"sigma0_deg", num(c.scenario.sigma0_deg)},
          {"speed", num(c.scenario.speed)},
          {"t_f", num(c.scenario.t_f)},
          {"dt_guidance", num(c.scenario.dt_guidance)},
          {"dt_integrate", num(c.scenario.dt_integrate)},
          {"capture_radius", num(c.scenario.capture_radius)},
          {"timeout", num(c.scenario.timeout)}}},
    };

    for (const auto& [name, node] : root) {
        const std::string section(name.str());
        auto s = schema.find(section);
        if (s == schema.end()) throw ConfigError(section, "unknown section");
        const toml::table* tbl = node.as_table();
        if (!tbl) throw ConfigError(section, "expected a table");
        for (const auto& [kname, value] : *tbl) {
            const std::string key = section + "." + std::string(kname.str());
            auto k = s->second.find(std::string(kname.str()));
            if (k == s->second.end()) throw ConfigError(key, "unknown key");
            k->second(value, key);
        }
    }
    if (!(eps > 0.0)) throw ConfigError("sweep.eps", "must be positive");
    c.sweep.propagation.eps = Epsilon(eps);
    if (seed < 0) throw ConfigError("train.seed", "must be non-negative");
    c.train.seed = static_cast<std::uint64_t>(seed);
}

template <class F>
void check(const std::string& key, F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

}  // namespace

double PipelineConfig::sigma_max() const { return sweep.sigma_max_deg * kDeg; }

ScalingParams PipelineConfig::scaling() const {
    ScalingParams sp;
    sp.t_ref = guidance.t_ref;
    sp.T_bar = sweep.propagation.T_bar;
    return sp;
}

Scenario PipelineConfig::make_scenario() const {
    Scenario sc;
    sc.r0 = scenario.r0;
    sc.sigma0 = scenario.sigma0_deg * kDeg;
    sc.speed = scenario.speed;
    sc.t_f = scenario.t_f;
    sc.sigma_max = sigma_max();
    sc.a_max = guidance.a_max;
    sc.dt_guidance = scenario.dt_guidance;
    sc.dt_integrate = scenario.dt_integrate;
    sc.capture_radius = scenario.capture_radius;
    sc.timeout = scenario.timeout;
    return sc;
}

void PipelineConfig::validate() const {
    if (!(sweep.sigma_max_deg > 0.0 && sweep.sigma_max_deg < 90.0)) {
        throw ConfigError("sweep.sigma_max_deg", "must be in (0, 90)");
    }
    check("sweep", [&] { sweep.grid.validate(); });
    check("sweep", [&] { sweep.propagation.validate(); });
    if (!(sweep.min_success_ratio >= 0.0 && sweep.min_success_ratio <= 1.0)) {
        throw ConfigError("sweep.min_success_ratio", "must be in [0, 1]");
    }
    if (dataset.stride < 1) throw ConfigError("dataset.stride", "must be >= 1");
    check("train", [&] { train.validate(); });
    check("guidance.t_ref", [&] { scaling().validate(); });
    if (!(guidance.handover_t_go >= 0.0)) throw ConfigError("guidance.handover_t_go", "must be >= 0");
    if (!(guidance.a_max > 0.0)) throw ConfigError("guidance.a_max", "must be positive");
    if (guidance.pn_gains.empty()) throw ConfigError("guidance.pn_gains", "needs at least one gain");
    for (double f : guidance.pn_hold_fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ConfigError("guidance.pn_hold_fractions", "entries must be in (0, 1]");
    }
    if (std::abs(scenario.sigma0_deg) > sweep.sigma_max_deg) {
        throw ConfigError("scenario.sigma0_deg", "outside the FOV limit sweep.sigma_max_deg");
    }
    check("scenario", [&] { make_scenario().validate(); });
}

PipelineConfig parse_config(const std::string& toml_text) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError("<syntax>", os.str());
    }
    PipelineConfig c;
    apply(root, c);
    c.validate();
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::string textv;
    try {
        textv = text::read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("<file>", e.what());
    }
    return parse_config(textv);
}

nlohmann::json to_json(const PipelineConfig& c) {
    const auto& g = c.sweep.grid;
    const auto& p = c.sweep.propagation;
    nlohmann::json j;
    j["sweep"] = {{"sigma_max_deg", c.sweep.sigma_max_deg},
                  {"alpha_bar", g.alpha_bar},
                  {"n_alpha", g.n_alpha},
                  {"n_beta", g.n_beta},
                  {"alpha_min_ratio", g.alpha_min_ratio},
                  {"refine_gap", g.refine_gap},
                  {"refine_depth", g.refine_depth},
                  {"T_bar", p.T_bar},
                  {"eps", p.eps.value()},
                  {"tau0", p.tau0},
                  {"rel_tol", p.rel_tol},
                  {"abs_tol", p.abs_tol},
                  {"sample_dtau", p.sample_dtau},
                  {"reproject_every", p.reproject_every},
                  {"min_success_ratio", c.sweep.min_success_ratio},
                  {"per_seed_files", c.sweep.per_seed_files}};
    j["dataset"] = {{"stride", c.dataset.stride}};
    j["train"] = {{"seed", c.train.seed},
                  {"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"learning_rate", c.train.learning_rate},
                  {"lr_decay", c.train.lr_decay},
                  {"min_learning_rate", c.train.min_learning_rate},
                  {"validation_fraction", c.train.validation_fraction},
                  {"patience", c.train.patience}};
    j["guidance"] = {{"t_ref", c.guidance.t_ref},
                     {"handover_t_go", c.guidance.handover_t_go},
                     {"a_max", c.guidance.a_max},
                     {"pn_gains", c.guidance.pn_gains},
                     {"pn_hold_fractions", c.guidance.pn_hold_fractions}};
    j["scenario"] = {{"r0", c.scenario.r0},
                     {"sigma0_deg", c.scenario.sigma0_deg},
                     {"speed", c.scenario.speed},
                     {"t_f", c.scenario.t_f},
                     {"dt_guidance", c.scenario.dt_guidance},
                     {"dt_integrate", c.scenario.dt_integrate},
                     {"capture_radius", c.scenario.capture_radius},
                     {"timeout", c.scenario.timeout}};
    return j;
}

}  // namespace itcg::cli
