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

#ifndef BEAMREC_EXPERIMENT_HPP
#define BEAMREC_EXPERIMENT_HPP

#include "completion.hpp"
#include "config.hpp"
#include "database.hpp"
#include "metrics.hpp"
#include "plot.hpp"
#include "recommend.hpp"
#include "scene.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamrec
{

namespace fs = std::filesystem;

/// Error raised by a pipeline stage; `stage()` names the failing subcommand.
class StageError : public std::runtime_error
{
public:
    StageError(std::string stage, const std::string &message)
        : std::runtime_error(stage + ": " + message), m_stage(std::move(stage))
    {
    }
    const std::string &stage() const { return m_stage; }

private:
    std::string m_stage;
};

// Files produced by the running invocation; removed again if it fails.
class ArtifactLog
{
public:
    void add(const fs::path &p) { m_paths.push_back(p); }

    void rollback() noexcept
    {
        for (auto it = m_paths.rbegin(); it != m_paths.rend(); ++it)
        {
            std::error_code ec;
            fs::remove(*it, ec);
        }
        m_paths.clear();
    }

    void commit() noexcept { m_paths.clear(); }

private:
    std::vector<fs::path> m_paths;
};

/// Output layout of one experiment directory.
struct ExperimentLayout
{
    fs::path root;

    fs::path scene() const { return root / "scene.ini"; }
    fs::path kop_dir(double k_op) const { return root / ("kop_" + detail::to_text(k_op)); }
    fs::path observed_positions(double k_op) const { return kop_dir(k_op) / "observed_positions.csv"; }
    fs::path measurements(double k_op) const { return kop_dir(k_op) / "measurements.csv"; }
    fs::path observed_tensor(double k_op) const { return kop_dir(k_op) / "observed_tensor.csv"; }
    fs::path completed_tensor(double k_op) const { return kop_dir(k_op) / "completed_tensor.csv"; }
    fs::path diagnostics(double k_op) const { return kop_dir(k_op) / "completion_diagnostics.csv"; }
    fs::path recommendations(double k_op) const { return kop_dir(k_op) / "recommendations.csv"; }
    fs::path results_ppl() const { return root / "results_ppl.csv"; }
    fs::path results_se() const { return root / "results_se.csv"; }
    fs::path plot_ppl() const { return root / "ppl.svg"; }
    fs::path plot_se() const { return root / "se.svg"; }
};

struct PplRow
{
    double k_op = 0.0;
    double n_tr_fraction = 0.0;
    int n_tr = 0;
    std::string method;
    double p_pl = 0.0;
};

struct SeRow
{
    double p_t_dbm = 0.0;
    std::string method;
    double k_op = 0.0;
    int n_tr = 0;
    double se_bps_hz = 0.0;
};

struct EvaluationResult
{
    std::vector<PplRow> ppl;
    std::vector<SeRow> se;

    const PplRow *find_ppl(const std::string &method, double k_op, int n_tr) const
    {
        for (const auto &r : ppl)
            if (r.method == method && r.k_op == k_op && r.n_tr == n_tr)
                return &r;
        return nullptr;
    }
    const SeRow *find_se(const std::string &method, double k_op, int n_tr, double p_t_dbm) const
    {
        for (const auto &r : se)
            if (r.method == method && r.k_op == k_op && r.n_tr == n_tr && r.p_t_dbm == p_t_dbm)
                return &r;
        return nullptr;
    }
};

namespace detail
{

inline void require_file(const std::string &stage, const fs::path &p, const std::string &producer)
{
    if (!fs::exists(p))
        throw StageError(stage, "required file " + p.string() + " is missing (run '" + producer + "' first)");
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline void save_positions(const fs::path &path, const std::set<PositionLabel> &positions)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path.string());
    os << "p_x,p_y\n";
    for (const auto &p : positions)
        os << p.x << ',' << p.y << '\n';
}

inline std::set<PositionLabel> load_positions(const fs::path &path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    if (trim(line) != "p_x,p_y")
        throw std::runtime_error("unexpected header in " + path.string());
    std::set<PositionLabel> out;
    while (std::getline(is, line))
    {
        if (trim(line).empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 2)
            throw std::runtime_error("malformed row in " + path.string());
        out.insert({parse_number<int>(f[0], path.string()), parse_number<int>(f[1], path.string())});
    }
    return out;
}

inline void save_diagnostics(const fs::path &path, const std::vector<SliceDiagnostic> &diag)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path.string());
    os << "stage,a,b,unknowns,iterations,final_gap,converged,skipped\n";
    for (const auto &d : diag)
        os << (d.kind == SliceKind::beam_plane ? "beam_plane" : "position_plane") << ',' << d.a << ',' << d.b << ','
           << d.unknowns << ',' << d.iterations << ',' << to_text(d.final_gap) << ',' << (d.converged ? 1 : 0) << ','
           << (d.skipped ? 1 : 0) << '\n';
}

} // namespace detail

/// The end-to-end experiment. Each stage reads its predecessor's files from the output
/// directory, so stages can be rerun individually.
class Experiment
{
public:
    Experiment(ExperimentConfig config, fs::path out_dir) : m_cfg(std::move(config)), m_layout{std::move(out_dir)}
    {
        m_cfg.validate();
    }

    const ExperimentConfig &config() const { return m_cfg; }
    const ExperimentLayout &layout() const { return m_layout; }

    GridSpec grid(const ServiceArea &area) const { return GridSpec::from_area(area, m_cfg.delta_s); }
    Codebook codebook() const { return build_codebook(m_cfg.geometry, m_cfg.c_theta, m_cfg.c_phi); }

    void scene_gen(ArtifactLog &log) const
    {
        fs::create_directories(m_layout.root);
        const Scene scene = generate_scene(m_cfg.area, m_cfg.scene, m_cfg.scene_seed);
        log.add(m_layout.scene());
        save_scene(m_layout.scene().string(), scene, m_cfg.area);
    }

    void survey(ArtifactLog &log) const
    {
        detail::require_file("survey", m_layout.scene(), "scene-gen");
        const LoadedScene loaded = load_scene(m_layout.scene().string());
        const GridSpec g = grid(loaded.area);
        const Codebook cb = codebook();
        for (double k_op : m_cfg.k_op)
        {
            fs::create_directories(m_layout.kop_dir(k_op));
            const auto observed = sample_observed_positions(g, k_op, m_cfg.survey_seed);
            MeasurementDatabase db;
            SurveyOptions opts{m_cfg.top_fraction, detail::dbm_to_watts(m_cfg.survey_p_t_dbm),
                               m_cfg.survey_noise_var_w, m_cfg.survey_seed};
            ingest_survey(db, loaded.scene, loaded.area, cb, g, observed, opts);
            log.add(m_layout.observed_positions(k_op));
            detail::save_positions(m_layout.observed_positions(k_op), observed);
            log.add(m_layout.measurements(k_op));
            save_measurements(m_layout.measurements(k_op).string(), db);
            log.add(m_layout.observed_tensor(k_op));
            save_tensor(m_layout.observed_tensor(k_op).string(), to_tensor(db, g, cb, m_cfg.domain));
        }
    }

    void complete(ArtifactLog &log) const
    {
        detail::require_file("complete", m_layout.scene(), "scene-gen");
        const LoadedScene loaded = load_scene(m_layout.scene().string());
        const GridSpec g = grid(loaded.area);
        const Codebook cb = codebook();
        for (double k_op : m_cfg.k_op)
        {
            detail::require_file("complete", m_layout.measurements(k_op), "survey");
            const MeasurementDatabase db = load_measurements(m_layout.measurements(k_op).string());
            if (db.empty())
                throw StageError("complete", m_layout.measurements(k_op).string() + " holds no measurements");
            const CompletedTensor done = beamrec::complete(to_tensor(db, g, cb, m_cfg.domain), m_cfg.completion());
            log.add(m_layout.completed_tensor(k_op));
            save_tensor(m_layout.completed_tensor(k_op).string(), done.values);
            log.add(m_layout.diagnostics(k_op));
            detail::save_diagnostics(m_layout.diagnostics(k_op), done.diagnostics);
        }
    }

    void recommend(ArtifactLog &log) const
    {
        detail::require_file("recommend", m_layout.scene(), "scene-gen");
        const LoadedScene loaded = load_scene(m_layout.scene().string());
        const GridSpec g = grid(loaded.area);
        const Codebook cb = codebook();
        const int n_tr = m_cfg.max_n_tr();
        for (double k_op : m_cfg.k_op)
        {
            detail::require_file("recommend", m_layout.completed_tensor(k_op), "complete");
            detail::require_file("recommend", m_layout.measurements(k_op), "survey");
            const PowerTensor t_hat =
                load_tensor(m_layout.completed_tensor(k_op).string(), g.l_x, g.l_y, cb.c_theta(), cb.c_phi());
            const MeasurementDatabase db = load_measurements(m_layout.measurements(k_op).string());
            std::vector<RecommendationSet> sets;
            for (const auto &p : g.all_labels())
                sets.push_back(select_beams(t_hat, p, n_tr));
            for (const auto &p : g.all_labels())
                sets.push_back(fingerprint_baseline(db, g, cb, p, n_tr));
            log.add(m_layout.recommendations(k_op));
            save_recommendations(m_layout.recommendations(k_op).string(), sets);
        }
    }

    /// Power loss probability and spectral efficiency over the reference coordinates
    /// whose labels were not surveyed.
    EvaluationResult evaluate() const
    {
        detail::require_file("evaluate", m_layout.scene(), "scene-gen");
        const LoadedScene loaded = load_scene(m_layout.scene().string());
        const ServiceArea &area = loaded.area;
        const GridSpec g = grid(area);
        const Codebook cb = codebook();
        const double wavelength = loaded.scene.wavelength();

        struct Point
        {
            PositionLabel label;
            CVector h_small_scale; // channel with the BS-UE free-space loss divided out
            Eigen::VectorXd truth;
            double distance = 0.0;
        };
        std::vector<Point> points;
        for (const Coordinate &c : area.reference_coordinates())
        {
            Point pt;
            pt.label = position_label(g, area, c);
            const CVector h = assemble_channel(channel_at(loaded.scene, area, c), cb.geometry());
            pt.truth = beam_powers(cb, h, 1.0);
            pt.distance = area.bs_distance(c);
            pt.h_small_scale = h * (4.0 * std::numbers::pi * pt.distance / wavelength);
            points.push_back(std::move(pt));
        }

        EvaluationResult result;
        for (double k_op : m_cfg.k_op)
        {
            detail::require_file("evaluate", m_layout.observed_positions(k_op), "survey");
            detail::require_file("evaluate", m_layout.recommendations(k_op), "recommend");
            const auto observed = detail::load_positions(m_layout.observed_positions(k_op));
            std::map<std::pair<PositionLabel, RecommendationSource>, RecommendationSet> recs;
            for (auto &s : load_recommendations(m_layout.recommendations(k_op).string()))
                recs[{s.position, s.source}] = std::move(s);

            std::vector<const Point *> eval;
            for (const auto &pt : points)
                if (!observed.contains(pt.label))
                    eval.push_back(&pt);
            if (eval.empty())
                throw StageError("evaluate", "no unobserved positions at k_op = " + detail::to_text(k_op));

            auto recommended = [&](const Point &pt, RecommendationSource src, int n_tr) {
                std::vector<int> flat;
                if (src == RecommendationSource::exhaustive)
                {
                    for (int b = 0; b < cb.size(); ++b)
                        flat.push_back(b);
                    return flat;
                }
                const auto it = recs.find({pt.label, src});
                if (it == recs.end())
                    throw StageError("evaluate", "no " + std::string(to_string(src)) + " recommendation for position (" +
                                                     std::to_string(pt.label.x) + "," + std::to_string(pt.label.y) + ")");
                if (static_cast<int>(it->second.beams.size()) < n_tr)
                    throw StageError("evaluate", "recommendation lists are shorter than n_tr = " + std::to_string(n_tr));
                for (const auto &b : it->second.prefix(static_cast<std::size_t>(n_tr)))
                    flat.push_back(cb.flat(b));
                return flat;
            };

            std::vector<Eigen::VectorXd> truth;
            for (const Point *pt : eval)
                truth.push_back(pt->truth);

            auto ppl = [&](RecommendationSource src, int n_tr) {
                std::vector<std::vector<int>> sets;
                for (const Point *pt : eval)
                    sets.push_back(recommended(*pt, src, n_tr));
                return power_loss_probability(truth, sets);
            };
            for (const auto src : {RecommendationSource::tensor_completion, RecommendationSource::fingerprint})
                for (double f : m_cfg.n_tr_fractions)
                    result.ppl.push_back({k_op, f, m_cfg.n_tr_for(f), std::string(to_string(src)),
                                          ppl(src, m_cfg.n_tr_for(f))});
            result.ppl.push_back({k_op, 1.0, cb.size(), "exhaustive", ppl(RecommendationSource::exhaustive, cb.size())});

            // The BS trains the recommended beams and keeps the strongest one.
            auto mean_se = [&](RecommendationSource src, int n_tr, double p_t_w) {
                double total = 0.0;
                for (const Point *pt : eval)
                {
                    int chosen = -1;
                    for (int b : recommended(*pt, src, n_tr))
                        if (chosen < 0 || pt->truth[b] > pt->truth[chosen] ||
                            (pt->truth[b] == pt->truth[chosen] && b < chosen))
                            chosen = b;
                    LinkBudget budget = m_cfg.budget;
                    budget.distance_m = pt->distance;
                    const LinkRate r =
                        spectral_efficiency(budget, m_cfg.timing, p_t_w, cb.vector(chosen), pt->h_small_scale, n_tr);
                    total += r.throughput_bps / budget.bandwidth_hz;
                }
                return total / static_cast<double>(eval.size());
            };
            for (double p_t_dbm : m_cfg.se_p_t_dbm)
            {
                const double p_t_w = detail::dbm_to_watts(p_t_dbm);
                for (const auto src : {RecommendationSource::tensor_completion, RecommendationSource::fingerprint})
                    for (int n_tr : m_cfg.se_n_tr)
                        result.se.push_back({p_t_dbm, std::string(to_string(src)), k_op, n_tr, mean_se(src, n_tr, p_t_w)});
                result.se.push_back(
                    {p_t_dbm, "exhaustive", k_op, cb.size(), mean_se(RecommendationSource::exhaustive, cb.size(), p_t_w)});
            }
        }
        return result;
    }

    void write_results(const EvaluationResult &r, ArtifactLog &log) const
    {
        log.add(m_layout.results_ppl());
        std::ofstream ppl(m_layout.results_ppl(), std::ios::binary);
        ppl << "k_op,n_tr_fraction,n_tr,method,p_pl\n";
        for (const auto &row : r.ppl)
            ppl << detail::to_text(row.k_op) << ',' << detail::to_text(row.n_tr_fraction) << ',' << row.n_tr << ','
                << row.method << ',' << detail::to_text(row.p_pl) << '\n';
        log.add(m_layout.results_se());
        std::ofstream se(m_layout.results_se(), std::ios::binary);
        se << "p_t_dbm,method,k_op,n_tr,se_bps_hz\n";
        for (const auto &row : r.se)
            se << detail::to_text(row.p_t_dbm) << ',' << row.method << ',' << detail::to_text(row.k_op) << ','
               << row.n_tr << ',' << detail::to_text(row.se_bps_hz) << '\n';
        if (!ppl || !se)
            throw StageError("evaluate", "failed to write result files");
    }

    void plot(ArtifactLog &log) const
    {
        detail::require_file("plot", m_layout.results_ppl(), "evaluate");
        detail::require_file("plot", m_layout.results_se(), "evaluate");
        const EvaluationResult r = load_results();

        PlotSpec ppl{"Power loss probability", "trained beams (% of codebook)", "P_pl", {}};
        std::map<std::string, PlotSeries> by_key;
        for (const auto &row : r.ppl)
        {
            if (row.method == "exhaustive")
                continue;
            auto &s = by_key[row.method + " K_op=" + detail::to_text(100.0 * row.k_op) + "%"];
            s.x.push_back(100.0 * row.n_tr_fraction);
            s.y.push_back(row.p_pl);
        }
        for (auto &[label, s] : by_key)
        {
            s.label = label;
            ppl.series.push_back(std::move(s));
        }

        PlotSpec se{"Spectral efficiency", "transmit power P_t (dBm)", "R_bar / B (bit/s/Hz)", {}};
        by_key.clear();
        for (const auto &row : r.se)
        {
            const std::string label = row.method == "exhaustive"
                                          ? "exhaustive K_op=" + detail::to_text(100.0 * row.k_op) + "%"
                                          : row.method + " K_op=" + detail::to_text(100.0 * row.k_op) +
                                                "% N_tr=" + std::to_string(row.n_tr);
            auto &s = by_key[label];
            s.x.push_back(row.p_t_dbm);
            s.y.push_back(row.se_bps_hz);
        }
        for (auto &[label, s] : by_key)
        {
            s.label = label;
            se.series.push_back(std::move(s));
        }

        log.add(m_layout.plot_ppl());
        write_line_chart(m_layout.plot_ppl().string(), ppl);
        log.add(m_layout.plot_se());
        write_line_chart(m_layout.plot_se().string(), se);
    }

    EvaluationResult load_results() const
    {
        EvaluationResult r;
        auto rows = [](const fs::path &p, std::size_t fields) {
            std::ifstream is(p);
            if (!is)
                throw std::runtime_error("cannot open " + p.string());
            std::vector<std::vector<std::string>> out;
            std::string line;
            std::getline(is, line);
            while (std::getline(is, line))
            {
                if (detail::trim(line).empty())
                    continue;
                auto f = detail::split(line, ',');
                if (f.size() != fields)
                    throw std::runtime_error("malformed row in " + p.string());
                out.push_back(std::move(f));
            }
            return out;
        };
        const std::string where = "results";
        for (const auto &f : rows(m_layout.results_ppl(), 5))
            r.ppl.push_back({detail::parse_number<double>(f[0], where), detail::parse_number<double>(f[1], where),
                             detail::parse_number<int>(f[2], where), f[3], detail::parse_number<double>(f[4], where)});
        for (const auto &f : rows(m_layout.results_se(), 5))
            r.se.push_back({detail::parse_number<double>(f[0], where), f[1], detail::parse_number<double>(f[2], where),
                            detail::parse_number<int>(f[3], where), detail::parse_number<double>(f[4], where)});
        return r;
    }

    // Runs one named stage, removing its outputs if it fails.
    template <class Fn>
    static void guarded(const std::string &stage, Fn &&fn)
    {
        ArtifactLog log;
        try
        {
            fn(log);
            log.commit();
        }
        catch (const StageError &)
        {
            log.rollback();
            throw;
        }
        catch (const std::exception &e)
        {
            log.rollback();
            throw StageError(stage, e.what());
        }
    }

    void run_scene_gen() const
    {
        guarded("scene-gen", [&](ArtifactLog &log) { scene_gen(log); });
    }
    void run_survey() const
    {
        guarded("survey", [&](ArtifactLog &log) { survey(log); });
    }
    void run_complete() const
    {
        guarded("complete", [&](ArtifactLog &log) { complete(log); });
    }
    void run_recommend() const
    {
        guarded("recommend", [&](ArtifactLog &log) { recommend(log); });
    }
    EvaluationResult run_evaluate() const
    {
        EvaluationResult r;
        guarded("evaluate", [&](ArtifactLog &log) {
            r = evaluate();
            write_results(r, log);
        });
        return r;
    }
    void run_plot() const
    {
        guarded("plot", [&](ArtifactLog &log) { plot(log); });
    }

    EvaluationResult run_all(bool with_plots) const
    {
        run_scene_gen();
        run_survey();
        run_complete();
        run_recommend();
        EvaluationResult r = run_evaluate();
        if (with_plots)
            run_plot();
        return r;
    }

private:
    ExperimentConfig m_cfg;
    ExperimentLayout m_layout;
};

} // namespace beamrec

#endif
