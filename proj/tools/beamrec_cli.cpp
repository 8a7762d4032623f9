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

// Command-line driver for the beam recommendation pipeline.
//
//   beamrec run --config exp.ini --out results/ [--seed N] [--workers N] [--plot]
//   beamrec scene-gen | survey | complete | recommend | evaluate | plot  (same flags)

#include "beamrec/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace
{

struct Options
{
    std::string config_path;
    std::string out_dir = "beamrec_out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    bool plot = false;
};

beamrec::Experiment make_experiment(const Options &opt)
{
    beamrec::ExperimentConfig cfg = opt.config_path.empty() ? beamrec::ExperimentConfig{}
                                                            : beamrec::load_config(opt.config_path);
    if (opt.seed)
    {
        cfg.scene_seed = *opt.seed;
        cfg.survey_seed = *opt.seed;
    }
    if (opt.workers)
        cfg.workers = *opt.workers;
    return beamrec::Experiment(std::move(cfg), opt.out_dir);
}

void print_summary(const beamrec::EvaluationResult &r)
{
    for (const auto &row : r.ppl)
        std::cout << "k_op=" << row.k_op << " n_tr=" << row.n_tr << " " << row.method << " P_pl=" << row.p_pl << "\n";
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Position-aided mmWave beam recommendation by two-stage smooth tensor completion"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", opt.config_path, "Experiment config (INI); defaults are used when omitted")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--seed", opt.seed, "Override the scene and survey seeds");
        sub->add_option("--workers", opt.workers, "Worker threads for slice-level parallelism")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--plot", opt.plot, "Also write SVG plots");
    };

    auto *run = app.add_subcommand("run", "Run every stage in order");
    auto *scene_gen = app.add_subcommand("scene-gen", "Generate and save the synthetic scene");
    auto *survey = app.add_subcommand("survey", "Sample observed positions and record measurements");
    auto *complete = app.add_subcommand("complete", "Two-stage completion of the measurement tensor");
    auto *recommend = app.add_subcommand("recommend", "Recommend beams for every position");
    auto *evaluate = app.add_subcommand("evaluate", "Power loss probability and spectral efficiency");
    auto *plot = app.add_subcommand("plot", "Render result CSVs as SVG charts");
    for (auto *sub : {run, scene_gen, survey, complete, recommend, evaluate, plot})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);

    std::string stage = "config";
    try
    {
        const beamrec::Experiment exp = make_experiment(opt);
        if (run->parsed())
        {
            stage = "run";
            print_summary(exp.run_all(opt.plot));
        }
        else if (scene_gen->parsed())
        {
            stage = "scene-gen";
            exp.run_scene_gen();
        }
        else if (survey->parsed())
        {
            stage = "survey";
            exp.run_survey();
        }
        else if (complete->parsed())
        {
            stage = "complete";
            exp.run_complete();
        }
        else if (recommend->parsed())
        {
            stage = "recommend";
            exp.run_recommend();
        }
        else if (evaluate->parsed())
        {
            stage = "evaluate";
            print_summary(exp.run_evaluate());
            if (opt.plot)
                exp.run_plot();
        }
        else if (plot->parsed())
        {
            stage = "plot";
            exp.run_plot();
        }
    }
    catch (const beamrec::StageError &e)
    {
        std::cerr << "beamrec: stage " << e.stage() << " failed: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "beamrec: stage " << stage << " failed: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
