// SPDX-License-Identifier: Apache-2.0
//
// beamrec - position-aided mmWave beam recommendation by smooth tensor completion
// Copyright (C) 2026 The beamrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BEAMREC_CONFIG_HPP
#define BEAMREC_CONFIG_HPP

#include "completion.hpp"
#include "database.hpp"
#include "metrics.hpp"
#include "scene.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamrec
{

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Every knob of one experiment. Defaults reproduce the reference setting: an 11 x 11
/// position grid over a 50 m x 50 m area, a 16 x 16 UPA with a 16 x 16 codebook, and a
/// top-10 % survey at K_op in {20 %, 40 %}.
struct ExperimentConfig
{
    ServiceArea area;
    double delta_s = 5.0;
    SceneOptions scene;
    std::uint64_t scene_seed = 2026;

    ArrayGeometry geometry;
    int c_theta = 16;
    int c_phi = 16;

    std::vector<double> k_op{0.2, 0.4};
    double top_fraction = 0.1;
    std::uint64_t survey_seed = 7;
    double survey_p_t_dbm = 30.0;
    double survey_noise_var_w = 0.0;
    PowerDomain domain = PowerDomain::db;

    SmcParams stage1;
    SmcParams stage2;
    bool positions_first = false;
    double reference_db = 10.0 * std::log10(db_floor_watts); // completion reference in the dB domain

    std::vector<double> n_tr_fractions{0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18, 0.20};
    std::vector<double> se_p_t_dbm{-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
    std::vector<int> se_n_tr{5, 10};
    LinkBudget budget;
    FrameTiming timing;

    unsigned workers = 1;

    int codebook_size() const { return c_theta * c_phi; }

    // n_tr for a trained-beam fraction, at least one beam.
    int n_tr_for(double fraction) const
    {
        return std::clamp(static_cast<int>(std::lround(fraction * codebook_size())), 1, codebook_size());
    }

    int max_n_tr() const
    {
        int n = 1;
        for (double f : n_tr_fractions)
            n = std::max(n, n_tr_for(f));
        for (int k : se_n_tr)
            n = std::max(n, std::min(k, codebook_size()));
        return n;
    }

    CompletionConfig completion() const
    {
        return {stage1, stage2, workers, positions_first, domain == PowerDomain::db ? reference_db : 0.0};
    }

    void validate() const
    {
        area.validate();
        geometry.validate();
        if (!(delta_s > 0.0))
            throw ConfigError("area.delta_s: must be positive");
        if (c_theta < 1 || c_phi < 1)
            throw ConfigError("codebook.c_theta / codebook.c_phi: must be at least 1");
        if (k_op.empty())
            throw ConfigError("survey.k_op: at least one value is required");
        for (double k : k_op)
            if (!(k > 0.0) || k > 1.0)
                throw ConfigError("survey.k_op: values must lie in (0, 1]");
        if (!(top_fraction > 0.0) || top_fraction > 1.0)
            throw ConfigError("survey.top_fraction: must lie in (0, 1]");
        if (!(survey_noise_var_w >= 0.0))
            throw ConfigError("survey.noise_var_w: must be non-negative");
        if (scene.n_clusters < 1 || scene.n_paths < 1)
            throw ConfigError("scene.n_clusters / scene.n_paths: must be at least 1");
        try
        {
            stage1.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(std::string("stage1: ") + e.what());
        }
        try
        {
            stage2.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(std::string("stage2: ") + e.what());
        }
        for (double f : n_tr_fractions)
            if (!(f > 0.0) || f > 1.0)
                throw ConfigError("evaluation.n_tr_fractions: values must lie in (0, 1]");
        for (int n : se_n_tr)
            if (n < 1 || n > codebook_size())
                throw ConfigError("evaluation.se_n_tr: values must lie in [1, |W|]");
        if (codebook_size() * timing.microslot_s > timing.frame_s)
            throw ConfigError("evaluation.microslot_s: exhaustive training must fit in one frame");
        try
        {
            budget.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(std::string("evaluation: ") + e.what());
        }
        if (workers < 1)
            throw ConfigError("run.workers: must be at least 1");
    }
};

namespace detail
{

inline std::vector<std::string> list_items(const std::string &raw)
{
    std::vector<std::string> out;
    for (auto &item : split(raw, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

} // namespace detail

/// Reads an INI-style config: `[section]` headers and `key = value` lines; lists are
/// comma separated. Unknown sections or keys are rejected.
inline ExperimentConfig parse_config(std::istream &is, const std::string &source = "<config>")
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try
    {
        pt::read_ini(is, tree);
    }
    catch (const pt::ini_parser_error &e)
    {
        throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    ExperimentConfig cfg;
    std::set<std::string> consumed;

    auto raw = [&](const std::string &section, const std::string &key) -> std::optional<std::string> {
        const auto sec = tree.get_child_optional(pt::ptree::path_type(section, '/'));
        if (!sec)
            return std::nullopt;
        const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '/'));
        if (!v)
            return std::nullopt;
        consumed.insert(section + "." + key);
        return *v;
    };
    auto field_error = [&](const std::string &section, const std::string &key, const std::string &what) {
        return ConfigError(source + ": field " + section + "." + key + ": " + what);
    };
    auto real = [&](const std::string &section, const std::string &key, double &target) {
        if (auto v = raw(section, key))
        {
            try
            {
                target = detail::parse_number<double>(*v, section + "." + key);
            }
            catch (const std::invalid_argument &e)
            {
                throw field_error(section, key, e.what());
            }
        }
    };
    auto integer = [&]<class T>(const std::string &section, const std::string &key, T &target) {
        if (auto v = raw(section, key))
        {
            try
            {
                target = detail::parse_number<T>(*v, section + "." + key);
            }
            catch (const std::invalid_argument &e)
            {
                throw field_error(section, key, e.what());
            }
        }
    };
    auto boolean = [&](const std::string &section, const std::string &key, bool &target) {
        if (auto v = raw(section, key))
        {
            if (*v == "true" || *v == "1")
                target = true;
            else if (*v == "false" || *v == "0")
                target = false;
            else
                throw field_error(section, key, "expected true or false");
        }
    };
    auto reals = [&](const std::string &section, const std::string &key, std::vector<double> &target) {
        if (auto v = raw(section, key))
        {
            target.clear();
            try
            {
                for (const auto &item : detail::list_items(*v))
                    target.push_back(detail::parse_number<double>(item, section + "." + key));
            }
            catch (const std::invalid_argument &e)
            {
                throw field_error(section, key, e.what());
            }
        }
    };
    auto integers = [&](const std::string &section, const std::string &key, std::vector<int> &target) {
        if (auto v = raw(section, key))
        {
            target.clear();
            try
            {
                for (const auto &item : detail::list_items(*v))
                    target.push_back(detail::parse_number<int>(item, section + "." + key));
            }
            catch (const std::invalid_argument &e)
            {
                throw field_error(section, key, e.what());
            }
        }
    };
    auto smc = [&](const std::string &section, SmcParams &p) {
        real(section, "gamma", p.gamma);
        real(section, "lambda", p.lambda);
        real(section, "beta", p.beta);
        real(section, "epsilon", p.epsilon);
        integer(section, "max_iter", p.max_iter);
    };

    real("area", "x0", cfg.area.x0);
    real("area", "x_end", cfg.area.x_end);
    real("area", "y0", cfg.area.y0);
    real("area", "y_end", cfg.area.y_end);
    real("area", "bs_x", cfg.area.bs_position.x());
    real("area", "bs_y", cfg.area.bs_position.y());
    real("area", "bs_z", cfg.area.bs_position.z());
    real("area", "ue_height", cfg.area.ue_height);
    integer("area", "ref_grid_n", cfg.area.ref_grid_n);
    real("area", "delta_s", cfg.delta_s);

    integer("scene", "seed", cfg.scene_seed);
    integer("scene", "n_clusters", cfg.scene.n_clusters);
    integer("scene", "n_paths", cfg.scene.n_paths);
    boolean("scene", "line_of_sight", cfg.scene.line_of_sight);
    real("scene", "cluster_spread_m", cfg.scene.cluster_spread_m);
    real("scene", "min_gain_db", cfg.scene.min_gain_db);
    real("scene", "max_gain_db", cfg.scene.max_gain_db);
    real("scene", "shadowing_corr_m", cfg.scene.shadowing_corr_m);
    real("scene", "shadowing_std_db", cfg.scene.shadowing_std_db);
    real("scene", "carrier_hz", cfg.scene.carrier_hz);

    integer("codebook", "n_x", cfg.geometry.n_x);
    integer("codebook", "n_y", cfg.geometry.n_y);
    real("codebook", "spacing", cfg.geometry.spacing);
    integer("codebook", "c_theta", cfg.c_theta);
    integer("codebook", "c_phi", cfg.c_phi);

    reals("survey", "k_op", cfg.k_op);
    real("survey", "top_fraction", cfg.top_fraction);
    integer("survey", "seed", cfg.survey_seed);
    real("survey", "p_t_dbm", cfg.survey_p_t_dbm);
    real("survey", "noise_var_w", cfg.survey_noise_var_w);
    if (auto v = raw("survey", "domain"))
    {
        if (*v == "db")
            cfg.domain = PowerDomain::db;
        else if (*v == "linear")
            cfg.domain = PowerDomain::linear_watts;
        else
            throw field_error("survey", "domain", "expected db or linear");
    }

    smc("stage1", cfg.stage1);
    smc("stage2", cfg.stage2);
    boolean("completion", "positions_first", cfg.positions_first);
    real("completion", "reference_db", cfg.reference_db);

    reals("evaluation", "n_tr_fractions", cfg.n_tr_fractions);
    reals("evaluation", "p_t_dbm", cfg.se_p_t_dbm);
    integers("evaluation", "se_n_tr", cfg.se_n_tr);
    real("evaluation", "bandwidth_hz", cfg.budget.bandwidth_hz);
    real("evaluation", "noise_psd_dbm_hz", cfg.budget.noise_psd_dbm_hz);
    real("evaluation", "antenna_efficiency", cfg.budget.antenna_efficiency);
    real("evaluation", "microslot_s", cfg.timing.microslot_s);
    real("evaluation", "frame_s", cfg.timing.frame_s);

    integer("run", "workers", cfg.workers);

    cfg.budget.carrier_hz = cfg.scene.carrier_hz;

    for (const auto &[section, body] : tree)
    {
        if (body.empty() && !body.data().empty())
            throw ConfigError(source + ": key '" + section + "' appears outside any section");
        for (const auto &[key, value] : body)
            if (!consumed.contains(section + "." + key))
                throw ConfigError(source + ": unknown field " + section + "." + key);
    }

    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string &path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config file " + path);
    return parse_config(is, path);
}

} // namespace beamrec

#endif
