/*
 * Copyright 2026 The rshdmr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "cli.hpp"

int main(int argc, char** argv) {
    using namespace rshdmr::cli;

    CLI::App app{"rshdmr: sums of lower-dimensional Gaussian-process components, and imputation "
                 "of missing inputs from first-order models"};
    app.require_subcommand(1);

    struct Options {
        std::string config;
        std::string out;
        std::string experiment;
        std::string model;
        std::optional<std::uint64_t> seed;
    } opt;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"gen", "generate a synthetic dataset (data.generator)"},
        {"fit", "train a model on data.path"},
        {"predict", "predict data.path with --model"},
        {"impute", "fill single missing values in data.path with --model"},
        {"eval", "score a model, an imputation, or run a built-in --experiment"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "INI config file");
        sub->add_option("--seed", opt.seed, "overrides run.seed");
        sub->add_option("--out", opt.out, "output directory (overrides run.out)");
        sub->add_option("--model", opt.model, "model file written by fit");
        if (name == "eval" || name == "fit")
            sub->add_option("--experiment", opt.experiment, "built-in reproduction")
                ->check(CLI::IsMember(experiment_names()));
    }

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = opt.config.empty() ? RunConfig{} : load_config(opt.config);
        if (opt.seed) cfg.seed = *opt.seed;
        if (!opt.out.empty()) cfg.out = opt.out;

        if (!opt.experiment.empty()) cfg.experiment = opt.experiment;
        if (!cfg.experiment.empty() && (cmd == "eval" || cmd == "fit"))
            return run_experiment(cfg.experiment, cfg, std::cout);
        if (cmd == "gen") return cmd_gen(cfg, std::cout);
        if (cmd == "fit") return cmd_fit(cfg, std::cout);
        if (cmd == "predict") return cmd_predict(cfg, opt.model, std::cout);
        if (cmd == "impute") return cmd_impute(cfg, opt.model, std::cout);
        return cmd_eval(cfg, opt.model, std::cout);
    } catch (const rshdmr::InputError& e) {
        std::cerr << "rshdmr " << cmd << ": error: " << e.what() << '\n';
        return 2;
    } catch (const rshdmr::ConditioningError& e) {
        std::cerr << "rshdmr " << cmd << ": conditioning error: " << e.what() << '\n';
        return 3;
    } catch (const rshdmr::NumericalError& e) {
        std::cerr << "rshdmr " << cmd << ": numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "rshdmr " << cmd << ": " << e.what() << '\n';
        return 1;
    }
}
