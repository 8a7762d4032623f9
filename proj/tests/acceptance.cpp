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

// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance <output-dir>

#include "beamrec/experiment.hpp"
#include "beamrec/smc.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace beamrec;

namespace
{

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start)
{
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

int failures = 0;

void report(const std::string &id, bool pass, const std::string &detail)
{
    std::printf("%s %s %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::string slurp(const fs::path &p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void observed_entries_preserved()
{
    const auto start = clock_type::now();
    std::mt19937_64 rng(101);
    int exact = 0;
    for (int k = 0; k < 100; ++k)
    {
        const SmcProblem prob = oracle::random_problem(rng, 16, 16, 0.1, 0.9);
        const SmcSolution sol = smc_solve(prob);
        exact += oracle::equal_on_mask(sol.completed, prob.values, prob.observed) ? 1 : 0;
    }
    const double t = seconds_since(start);
    report("AC1", exact == 100 && t < 30.0, fmt("bit-exact %.0f/100 in %.2f s", exact, t));
}

void svt_matches_numeric_prox()
{
    const auto start = clock_type::now();
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> um(1, 8), un(1, 6);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k)
    {
        const Eigen::MatrixXd a = oracle::gaussian_matrix(um(rng), un(rng), rng, 2.0);
        for (double tau : {0.1, 1.0, 5.0})
        {
            const Eigen::MatrixXd ref = oracle::numeric_prox(a, tau, rng());
            worst = std::max(worst, (svt(a, tau) - ref).norm());
        }
    }
    const double t = seconds_since(start);
    report("AC2", worst <= 1e-5 && t < 60.0, fmt("worst Frobenius error %.3g in %.2f s", worst, t));
}

void y_update_stationary()
{
    const auto start = clock_type::now();
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> weight(0.1, 5.0);
    double worst = 0.0;
    int solved = 0;
    while (solved < 25)
    {
        SmcProblem prob = oracle::random_problem(rng, 6, 6, 0.1, 0.9);
        if (prob.unknown_count() == 0)
            continue;
        prob.params.gamma = weight(rng);
        prob.params.lambda = weight(rng);
        const Eigen::MatrixXd x = oracle::gaussian_matrix(prob.rows(), prob.cols(), rng, 5.0);
        const Eigen::MatrixXd z = oracle::gaussian_matrix(prob.rows(), prob.cols(), rng, 2.0);
        const Eigen::MatrixXd y = solve_y(build_y_system(prob), prob, x, z);
        worst = std::max(worst, oracle::max_free_gradient(y, x, z, prob.observed, prob.params.gamma,
                                                          prob.params.lambda));
        ++solved;
    }
    const double t = seconds_since(start);
    report("AC3", worst <= 1e-4 && t < 60.0, fmt("max |gradient| %.3g on 25 problems in %.2f s", worst, t));
}

void smooth_low_rank_recovery()
{
    const Eigen::MatrixXd ramp = oracle::rank_one_ramp(16, 16);
    const BoolMatrix obs = oracle::hide_fraction(16, 16, 0.3, 7);
    SmcProblem prob{ramp, obs, SmcParams{}};
    const double err = oracle::hidden_relative_error(smc_solve(prob).completed, ramp, obs);

    const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(16, 16, 7.0);
    SmcProblem constant{flat, obs, SmcParams{}};
    const double dev = (smc_solve(constant).completed - flat).cwiseAbs().maxCoeff();
    report("AC4", err < 0.05 && dev <= 1e-3, fmt("rank-1 hidden relative error %.4f, constant max deviation %.2g", err, dev));
}

void end_to_end(const EvaluationResult &r, const ExperimentConfig &cfg, double runtime)
{
    bool monotone = true;
    for (double k_op : {0.2, 0.4})
    {
        double prev = 2.0;
        for (double f : cfg.n_tr_fractions)
        {
            const PplRow *row = r.find_ppl("tc", k_op, cfg.n_tr_for(f));
            if (!row || row->p_pl > prev)
                monotone = false;
            prev = row ? row->p_pl : prev;
        }
    }

    const int n2 = cfg.n_tr_for(0.02);
    const PplRow *tc = r.find_ppl("tc", 0.2, n2);
    const PplRow *fp = r.find_ppl("fingerprint", 0.2, n2);
    const bool margin = tc && fp && tc->p_pl <= fp->p_pl - 0.10;

    bool kop = true;
    double worst_increase = -1.0;
    for (double f : cfg.n_tr_fractions)
    {
        const PplRow *a = r.find_ppl("tc", 0.2, cfg.n_tr_for(f));
        const PplRow *b = r.find_ppl("tc", 0.4, cfg.n_tr_for(f));
        if (!a || !b)
        {
            kop = false;
            continue;
        }
        worst_increase = std::max(worst_increase, b->p_pl - a->p_pl);
        kop = kop && b->p_pl <= a->p_pl + 0.02;
    }

    std::ostringstream detail;
    detail << "(a) monotone " << (monotone ? "yes" : "no") << "; (b) P_pl at n_tr " << n2 << ": tc "
           << (tc ? tc->p_pl : -1.0) << " vs fingerprint " << (fp ? fp->p_pl : -1.0) << " (need gap >= 0.10) "
           << (margin ? "ok" : "missed") << "; (c) worst K_op increase " << worst_increase << "; runtime "
           << runtime << " s";
    report("AC5", monotone && margin && kop && runtime < 600.0, detail.str());
}

void timing_and_se(const EvaluationResult &r, const ExperimentConfig &cfg)
{
    const bool exact = comm_fraction(cfg.timing, 256) == 0.488;
    bool ordered = true;
    double worst = std::numeric_limits<double>::infinity();
    for (double p : cfg.se_p_t_dbm)
    {
        const SeRow *ex = r.find_se("exhaustive", 0.2, cfg.codebook_size(), p);
        for (int n : cfg.se_n_tr)
        {
            const SeRow *tc = r.find_se("tc", 0.2, n, p);
            if (!ex || !tc)
            {
                ordered = false;
                continue;
            }
            worst = std::min(worst, tc->se_bps_hz - ex->se_bps_hz);
            ordered = ordered && tc->se_bps_hz > ex->se_bps_hz;
        }
    }
    report("AC6", exact && ordered,
           fmt("f_comm(256) = %.15g; smallest SE(tc) - SE(exhaustive) margin %.4f bit/s/Hz", comm_fraction(cfg.timing, 256),
               worst));
}

} // namespace

int main(int argc, char **argv)
{
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::remove_all(out);

    observed_entries_preserved();
    svt_matches_numeric_prox();
    y_update_stationary();
    smooth_low_rank_recovery();

    const ExperimentConfig cfg;
    EvaluationResult result;
    double runtime = 0.0;
    try
    {
        const auto start = clock_type::now();
        result = Experiment(cfg, out / "run1").run_all(true);
        runtime = seconds_since(start);
    }
    catch (const std::exception &e)
    {
        report("AC5", false, std::string("pipeline failed: ") + e.what());
        report("AC6", false, "pipeline failed");
        report("AC7", false, "pipeline failed");
        return 1;
    }
    end_to_end(result, cfg, runtime);
    timing_and_se(result, cfg);

    try
    {
        Experiment(cfg, out / "run2").run_all(false);
        const ExperimentLayout a{out / "run1"}, b{out / "run2"};
        const bool same = slurp(a.results_ppl()) == slurp(b.results_ppl()) &&
                          slurp(a.results_se()) == slurp(b.results_se()) && !slurp(a.results_ppl()).empty();
        report("AC7", same, same ? "result CSVs byte-identical across reruns" : "result CSVs differ between reruns");
    }
    catch (const std::exception &e)
    {
        report("AC7", false, std::string("rerun failed: ") + e.what());
    }

    return failures == 0 ? 0 : 1;
}
