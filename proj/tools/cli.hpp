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

#pragma once

// Config-driven commands behind the `rshdmr` executable. Everything here
// works on files; main.cpp only parses argv.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rshdmr/rshdmr.hpp"

namespace rshdmr::cli {

namespace fs = std::filesystem;

/// All run parameters. Field names match `section.key` in the config file.
struct RunConfig {
    // [data]
    std::string data_path;
    std::string generator;  // additive | power | coupled | quartic | uneven
    long n = 10000;
    long dim = 3;
    long n_normal = 10000;
    long n_uniform = 5000;
    double noise_sigma = 0.0;
    long missing_per_column = 0;
    long train_rows = 0;
    bool scale = false;
    // [matrices]
    std::string matrices = "1d";
    // [kernel]
    KernelParams kernel{0.6, 1e-10};
    // [schedule]
    TrainingSchedule schedule{};
    // [imputation]
    ImputationPolicy policy{};
    // [predict]
    bool predict_std = true;
    // [eval]
    std::string imputed_path;
    std::string truth_path;
    // [run]
    std::uint64_t seed = 7;
    std::string out = "out";
    std::string experiment;  // built-in reproduction, see experiment_names()
};

/// Thrown for invalid configuration; names the offending field.
class ConfigError : public InputError {
public:
    ConfigError(const std::string& field, const std::string& msg)
        : InputError(field + ": " + msg), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

namespace detail {

template <typename T>
T parse_value(const std::string& field, const std::string& raw) {
    const std::string text = rshdmr::detail::trim(raw);
    if constexpr (std::is_same_v<T, std::string>) {
        return text;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
        if (text == "false" || text == "0" || text == "no" || text == "off") return false;
        throw ConfigError(field, "expected a boolean, got '" + text + "'");
    } else {
        T v{};
        const char* first = text.data();
        if (!text.empty() && text.front() == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size() || ptr == first)
            throw ConfigError(field, "not a valid number: '" + text + "'");
        return v;
    }
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <typename T>
Setter field(T RunConfig::*member) {
    return [member](RunConfig& c, const std::string& name, const std::string& raw) {
        c.*member = parse_value<T>(name, raw);
    };
}

inline const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> s = {
        {"data.path", field(&RunConfig::data_path)},
        {"data.generator", field(&RunConfig::generator)},
        {"data.n", field(&RunConfig::n)},
        {"data.dim", field(&RunConfig::dim)},
        {"data.n_normal", field(&RunConfig::n_normal)},
        {"data.n_uniform", field(&RunConfig::n_uniform)},
        {"data.noise_sigma", field(&RunConfig::noise_sigma)},
        {"data.missing_per_column", field(&RunConfig::missing_per_column)},
        {"data.train_rows", field(&RunConfig::train_rows)},
        {"data.scale", field(&RunConfig::scale)},
        {"matrices.spec", field(&RunConfig::matrices)},
        {"kernel.length_scale",
         [](RunConfig& c, const std::string& n, const std::string& r) {
             c.kernel.length_scale = parse_value<double>(n, r);
         }},
        {"kernel.noise_variance",
         [](RunConfig& c, const std::string& n, const std::string& r) {
             c.kernel.noise_variance = parse_value<double>(n, r);
         }},
        {"schedule.cycles",
         [](RunConfig& c, const std::string& n, const std::string& r) {
             c.schedule.cycles = parse_value<int>(n, r);
         }},
        {"schedule.scale_start",
         [](RunConfig& c, const std::string& n, const std::string& r) {
             c.schedule.scale_start = parse_value<double>(n, r);
         }},
        {"schedule.scale_rate",
         [](RunConfig& c, const std::string& n, const std::string& r) {
             c.schedule.scale_rate = parse_value<double>(n, r);
         }},
        {"imputation.delta",
         [](RunConfig& c, const std::string& n, const std::string& r) {
             c.policy.delta = parse_value<double>(n, r);
         }},
        {"imputation.subintervals",
         [](RunConfig& c, const std::string& n, const std::string& r) {
             c.policy.num_subintervals = parse_value<int>(n, r);
         }},
        {"predict.std", field(&RunConfig::predict_std)},
        {"eval.imputed_path", field(&RunConfig::imputed_path)},
        {"eval.truth_path", field(&RunConfig::truth_path)},
        {"run.seed", field(&RunConfig::seed)},
        {"run.out", field(&RunConfig::out)},
        {"run.experiment", field(&RunConfig::experiment)},
    };
    return s;
}

inline void check(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

}  // namespace detail

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "additive-fit", "additive-impute", "coupled-impute", "power-impute",
        "quartic-candidates", "uneven", "noisy", "d15", "confidence-contrast",
        "water-1d", "water-2d", "water-2dstar"};
    return names;
}

/// Numeric fields against their module-level invariants.
inline void validate(const RunConfig& c) {
    using detail::check;
    check(c.kernel.length_scale > 0.0, "kernel.length_scale", "must be > 0");
    check(c.kernel.noise_variance >= 0.0, "kernel.noise_variance", "must be >= 0");
    check(c.schedule.cycles >= 1, "schedule.cycles", "must be >= 1");
    check(c.schedule.scale_start > 0.0 && c.schedule.scale_start <= 1.0, "schedule.scale_start",
          "must lie in (0, 1]");
    check(c.schedule.scale_rate > 0.0, "schedule.scale_rate", "must be > 0");
    check(c.policy.delta >= 0.0, "imputation.delta", "must be >= 0");
    check(c.policy.num_subintervals >= 1, "imputation.subintervals", "must be >= 1");
    check(c.n >= 1, "data.n", "must be >= 1");
    check(c.dim >= 1, "data.dim", "must be >= 1");
    check(c.n_normal >= 0, "data.n_normal", "must be >= 0");
    check(c.n_uniform >= 0, "data.n_uniform", "must be >= 0");
    check(c.noise_sigma >= 0.0, "data.noise_sigma", "must be >= 0");
    check(c.missing_per_column >= 0, "data.missing_per_column", "must be >= 0");
    check(c.train_rows >= 0, "data.train_rows", "must be >= 0");
    check(!c.out.empty(), "run.out", "must not be empty");
    const auto& names = experiment_names();
    check(c.experiment.empty() || std::find(names.begin(), names.end(), c.experiment) != names.end(),
          "run.experiment", "unknown experiment '" + c.experiment + "'");
}

/// Reads an INI file. Unknown sections or keys are errors; relative paths,
/// including run.out, are resolved against the config file's directory.
inline RunConfig parse_config(std::istream& in, const fs::path& base_dir = {}) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config", std::string("malformed INI: ") + e.what());
    }
    RunConfig cfg;
    const auto& schema = detail::schema();
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, "keys must belong to a [section]");
        for (const auto& [key, value] : body) {
            const std::string name = section + "." + key;
            auto it = schema.find(name);
            if (it == schema.end()) throw ConfigError(name, "unknown config key");
            it->second(cfg, name, value.data());
        }
    }
    auto resolve = [&](std::string& p) {
        if (!p.empty() && !base_dir.empty() && fs::path(p).is_relative())
            p = (base_dir / p).lexically_normal().string();
    };
    resolve(cfg.data_path);
    resolve(cfg.imputed_path);
    resolve(cfg.truth_path);
    if (tree.get_child_optional("run.out")) resolve(cfg.out);
    validate(cfg);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    return parse_config(in, fs::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Output helpers

using Metrics = std::vector<std::pair<std::string, double>>;

inline std::string num(double v) { return rshdmr::detail::format_double(v); }

inline void write_metrics(const fs::path& path, const Metrics& m) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << "metric,value\n";
    for (const auto& [k, v] : m) out << k << ',' << num(v) << '\n';
}

inline Metrics read_metrics(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    Metrics m;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        bool ok = false;
        const double v = rshdmr::detail::parse_double(line.substr(comma + 1), ok);
        if (ok) m.emplace_back(line.substr(0, comma), v);
    }
    return m;
}

inline fs::path prepare_out(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    fs::create_directories(dir);
    return dir;
}

inline std::string require_path(const std::string& value, const std::string& field) {
    if (value.empty()) throw ConfigError(field, "required for this command");
    if (!fs::exists(value)) throw ConfigError(field, "file '" + value + "' does not exist");
    return value;
}

inline void write_history(const fs::path& path, const FitReport& report,
                          const std::optional<Scaler>& scaler) {
    std::ofstream out(path);
    out << "cycle,scale,rmse,rmse_unscaled\n";
    const double range = scaler ? scaler->target_range() : 1.0;
    for (const auto& h : report.history)
        out << h.cycle << ',' << num(h.scale) << ',' << num(h.rmse) << ',' << num(h.rmse * range)
            << '\n';
}

inline void write_components(const fs::path& path, const FitReport& report) {
    std::ofstream out(path);
    out << "component,label,mean,min,max\n";
    for (std::size_t i = 0; i < report.components.size(); ++i) {
        const auto& c = report.components[i];
        out << i + 1 << ",\"" << c.label << "\"," << num(c.mean) << ',' << num(c.min) << ','
            << num(c.max) << '\n';
    }
}

// ---------------------------------------------------------------------------
// gen

inline Dataset generate_dataset(const RunConfig& cfg) {
    const auto seed = stream_seed(cfg.seed, SeedStream::generate);
    Dataset d;
    const std::string& g = cfg.generator;
    if (g == "additive")
        d = gen_additive(cfg.n, cfg.dim, seed);
    else if (g == "power")
        d = gen_power(cfg.n, seed);
    else if (g == "coupled")
        d = gen_coupled(cfg.n, seed);
    else if (g == "quartic")
        d = gen_quartic(cfg.n, seed);
    else if (g == "uneven")
        d = gen_uneven(cfg.n_normal, cfg.n_uniform, seed);
    else if (g.empty())
        throw ConfigError("data.generator", "required for gen");
    else
        throw ConfigError("data.generator", "unknown generator '" + g + "'");
    return add_noise(d, cfg.noise_sigma, stream_seed(cfg.seed, SeedStream::noise));
}

/// data.csv, plus data_missing.csv and truth.csv when holes are requested.
inline int cmd_gen(const RunConfig& cfg, std::ostream& log) {
    const auto dir = prepare_out(cfg);
    const Dataset d = generate_dataset(cfg);
    save_csv(d, (dir / "data.csv").string());
    log << "wrote " << (dir / "data.csv").string() << " (" << d.rows() << " rows, D = " << d.dim()
        << ")\n";
    if (cfg.missing_per_column > 0) {
        const auto inj = inject_missing(d, static_cast<std::size_t>(cfg.missing_per_column),
                                        stream_seed(cfg.seed, SeedStream::holes));
        save_csv(inj.data, (dir / "data_missing.csv").string());
        std::ofstream t(dir / "truth.csv");
        write_truth(inj.truth, t);
        log << "wrote " << inj.truth.size() << " holes to " << (dir / "data_missing.csv").string()
            << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// fit

/// Loads the configured CSV and brings it to model units.
inline Dataset load_for_fit(const RunConfig& cfg) {
    Dataset raw = load_csv(require_path(cfg.data_path, "data.path"));
    return cfg.scale ? minmax_scale(raw) : raw;
}

inline Metrics fit_metrics(const FitReport& r) {
    Metrics m{{"rmse_train", r.rmse_train}};
    if (r.rmse_train_unscaled) m.emplace_back("rmse_train_unscaled", *r.rmse_train_unscaled);
    if (r.rmse_eval) m.emplace_back("rmse_eval", *r.rmse_eval);
    m.emplace_back("cycles", static_cast<double>(r.history.size()));
    return m;
}

/// model.json, fit_report.csv, history.csv (RMSE per cycle), components.csv.
inline int cmd_fit(const RunConfig& cfg, std::ostream& log) {
    const auto dir = prepare_out(cfg);
    const Dataset data = load_for_fit(cfg);
    SelectionList matrices;
    try {
        matrices = parse_matrices(cfg.matrices, static_cast<int>(data.dim()));
    } catch (const InputError& e) {
        throw ConfigError("matrices.spec", e.what());
    }
    Dataset train = data.take_rows(data.complete_rows());
    if (cfg.train_rows > 0) {
        if (cfg.train_rows > train.rows())
            throw ConfigError("data.train_rows", "exceeds the " + std::to_string(train.rows()) +
                                                     " complete rows");
        const auto split = random_split(train.rows(), {static_cast<std::size_t>(cfg.train_rows)},
                                        stream_seed(cfg.seed, SeedStream::split));
        train = train.take_rows(split[0]);
    }
    auto result = hdmr_train(train, matrices, cfg.kernel, cfg.schedule);
    const auto complete = data.take_rows(data.complete_rows());
    if (complete.rows() != train.rows()) result.report.rmse_eval = evaluate(result.model, complete);

    save_model(result.model, (dir / "model.json").string());
    write_metrics(dir / "fit_report.csv", fit_metrics(result.report));
    write_history(dir / "history.csv", result.report, result.model.scaler);
    write_components(dir / "components.csv", result.report);
    log << "trained " << matrices.size() << " components on " << train.rows()
        << " rows; training RMSE " << result.report.rmse_train << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// predict

inline Matrix to_model_units(const HdmrModel& model, const Matrix& raw_x) {
    return model.scaler ? model.scaler->scale_features(raw_x) : raw_x;
}

inline Vector from_model_units(const HdmrModel& model, const Vector& y) {
    return model.scaler ? model.scaler->unscale_target(y) : y;
}

/// predictions.csv: row, true, predicted[, std], in the file's units.
inline int cmd_predict(const RunConfig& cfg, const std::string& model_path, std::ostream& log) {
    if (model_path.empty()) throw ConfigError("--model", "required for predict");
    const auto dir = prepare_out(cfg);
    const HdmrModel model = load_model(model_path);
    const Dataset data = load_csv(require_path(cfg.data_path, "data.path"));
    if (data.missing_count() > 0)
        throw ConfigError("data.path", "predict needs complete rows; run impute first");
    const Matrix x = to_model_units(model, data.x);
    const Vector pred = from_model_units(model, model.predict(x));
    Vector sd;
    if (cfg.predict_std) {
        sd = model.predict_std(x);
        if (model.scaler) sd *= model.scaler->target_range();
    }
    std::ofstream out(dir / "predictions.csv");
    out << "row,true,predicted" << (cfg.predict_std ? ",std" : "") << '\n';
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        out << r << ',' << num(data.y(r)) << ',' << num(pred(r));
        if (cfg.predict_std) out << ',' << num(sd(r));
        out << '\n';
    }
    log << "wrote " << data.rows() << " predictions to " << (dir / "predictions.csv").string()
        << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// impute

/// completed.csv (known cells copied verbatim) and imputation_report.csv:
/// row, column, chosen, residual_target, candidates. Feature values are in
/// the file's units; the residual target is in model units.
inline int cmd_impute(const RunConfig& cfg, const std::string& model_path, std::ostream& log) {
    if (model_path.empty()) throw ConfigError("--model", "required for impute");
    const auto dir = prepare_out(cfg);
    const HdmrModel model = load_model(model_path);
    const Dataset raw = load_csv(require_path(cfg.data_path, "data.path"));
    Dataset scaled = raw;
    scaled.x = to_model_units(model, raw.x);
    if (model.scaler) scaled.y = model.scaler->scale_target(raw.y);
    const auto result = impute_dataset(model, scaled, cfg.policy);

    auto to_file_units = [&](double v, Eigen::Index col) {
        return model.scaler ? model.scaler->unscale_feature(v, col) : v;
    };
    Dataset completed = raw;
    for (const auto& s : result.sets)
        completed.x(s.row_index, s.variable_index) = to_file_units(s.chosen, s.variable_index);
    save_csv(completed, (dir / "completed.csv").string());

    std::ofstream rep(dir / "imputation_report.csv");
    rep << "row,column,chosen,residual_target,candidates\n";
    for (const auto& s : result.sets) {
        rep << s.row_index << ',' << raw.column_names[static_cast<std::size_t>(s.variable_index)]
            << ',' << num(to_file_units(s.chosen, s.variable_index)) << ','
            << num(s.target_value) << ',';
        for (std::size_t k = 0; k < s.candidates.size(); ++k)
            rep << (k ? ";" : "") << num(to_file_units(s.candidates[k], s.variable_index));
        rep << '\n';
    }
    log << "imputed " << result.sets.size() << " cells\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval and built-in experiments


inline void write_imputation_tables(const fs::path& dir, const ImputeExperimentResult& r) {
    std::map<std::pair<Eigen::Index, Eigen::Index>, double> truth;
    for (const auto& t : r.truth) truth[{t.row, t.column}] = t.value;
    std::ofstream imp(dir / "imputed.csv");
    std::ofstream cand(dir / "candidates.csv");
    imp << "row,column,true,chosen,num_candidates\n";
    cand << "row,column,true,candidate\n";
    for (const auto& s : r.imputation.sets) {
        const double t = truth.at({s.row_index, s.variable_index});
        imp << s.row_index << ',' << s.variable_index << ',' << num(t) << ',' << num(s.chosen) << ','
            << s.candidates.size() << '\n';
        for (double c : s.candidates)
            cand << s.row_index << ',' << s.variable_index << ',' << num(t) << ',' << num(c) << '\n';
    }
}

inline Metrics impute_metrics(const ImputeExperimentResult& r) {
    Metrics m{{"model_rmse_full", r.model_rmse_full},
              {"rmse_train", r.fit.rmse_train},
              {"delta", r.delta},
              {"candidate_hit_fraction", r.candidate_hit_fraction}};
    for (const auto& e : r.imputation.errors) {
        if (e.count == 0) continue;
        const std::string v = "x" + std::to_string(e.variable + 1);
        m.emplace_back("impute_rmse_" + v, e.rmse_chosen);
        m.emplace_back("impute_best_candidate_rmse_" + v, e.rmse_best_candidate);
    }
    if (r.retrain_rmse_full) m.emplace_back("retrain_rmse_full", *r.retrain_rmse_full);
    return m;
}

inline int run_experiment(const std::string& name, const RunConfig& cfg, std::ostream& log) {
    const auto dir = prepare_out(cfg);
    Metrics m;
    auto impute = [&](const ImputeExperimentResult& r) {
        m = impute_metrics(r);
        write_imputation_tables(dir, r);
        write_history(dir / "history.csv", r.fit, std::nullopt);
    };
    if (name == "additive-fit") {
        const auto r = additive_fit_experiment(cfg.seed);
        m = {{"rmse_full", r.rmse_full}, {"rmse_train", r.train.report.rmse_train}};
        write_history(dir / "history.csv", r.train.report, std::nullopt);
    } else if (name == "additive-impute") {
        impute(additive_impute_experiment(cfg.seed));
    } else if (name == "coupled-impute") {
        impute(coupled_impute_experiment(cfg.seed));
    } else if (name == "power-impute") {
        impute(power_impute_experiment(cfg.seed));
    } else if (name == "quartic-candidates") {
        impute(quartic_candidates_experiment(cfg.seed));
    } else if (name == "uneven") {
        impute(uneven_impute_experiment(cfg.seed));
    } else if (name == "noisy") {
        impute(noisy_impute_experiment(cfg.seed));
    } else if (name == "d15") {
        impute(d15_impute_experiment(cfg.seed));
    } else if (name == "confidence-contrast") {
        const auto c = confidence_contrast_experiment(cfg.seed);
        m = {{"mean_std_1d", c.mean_std_1d},
             {"mean_std_full", c.mean_std_full},
             {"rmse_1d", c.rmse_1d},
             {"rmse_full", c.rmse_full}};
    } else if (name.rfind("water-", 0) == 0) {
        const std::string family = name == "water-1d" ? "1d" : name == "water-2d" ? "2d" : "2d*";
        if (name != "water-1d" && name != "water-2d" && name != "water-2dstar")
            throw ConfigError("--experiment", "unknown experiment '" + name + "'");
        const Dataset raw = load_csv(require_path(cfg.data_path, "data.path"));
        const auto r = water_experiment(raw, family, cfg.seed);
        m = {{"rmse_full_scaled", r.rmse_scaled},
             {"rmse_full_raw", r.rmse_raw},
             {"rmse_train", r.fit.rmse_train}};
        write_history(dir / "history.csv", r.fit, std::nullopt);
    } else {
        throw ConfigError("--experiment", "unknown experiment '" + name + "'");
    }
    write_metrics(dir / "metrics.csv", m);
    for (const auto& [k, v] : m) log << k << " = " << v << '\n';
    return 0;
}

/// metrics.csv with the model's RMSE on the configured labeled file and,
/// when eval.imputed_path and eval.truth_path are set, per-variable
/// imputation RMSE against the withheld values.
inline int cmd_eval(const RunConfig& cfg, const std::string& model_path, std::ostream& log) {
    const auto dir = prepare_out(cfg);
    Metrics m;
    if (!model_path.empty()) {
        const HdmrModel model = load_model(model_path);
        const Dataset data = load_csv(require_path(cfg.data_path, "data.path"));
        const auto rows = data.complete_rows();
        if (rows.empty()) throw ConfigError("data.path", "no complete rows to evaluate");
        const Dataset eval = data.take_rows(rows);
        const Vector pred = model.predict(to_model_units(model, eval.x));
        const Vector truth_scaled = model.scaler ? model.scaler->scale_target(eval.y) : eval.y;
        const double scaled = rmse(pred, truth_scaled);
        m.emplace_back("rmse", scaled);
        if (model.scaler) m.emplace_back("rmse_unscaled", scaled * model.scaler->target_range());
        m.emplace_back("rows", static_cast<double>(eval.rows()));
    }
    if (!cfg.truth_path.empty() || !cfg.imputed_path.empty()) {
        const Dataset imputed = load_csv(require_path(cfg.imputed_path, "eval.imputed_path"));
        std::ifstream tin(require_path(cfg.truth_path, "eval.truth_path"));
        const auto truth = read_truth(tin, cfg.truth_path);
        std::map<Eigen::Index, std::pair<double, std::size_t>> acc;
        for (const auto& t : truth) {
            if (t.row >= imputed.rows() || t.column >= imputed.dim())
                throw ConfigError("eval.truth_path", "record outside the imputed file");
            const double d = imputed.x(t.row, t.column) - t.value;
            auto& a = acc[t.column];
            a.first += d * d;
            a.second += 1;
        }
        for (const auto& [col, a] : acc)
            m.emplace_back("impute_rmse_" + imputed.column_names[static_cast<std::size_t>(col)],
                           std::sqrt(a.first / static_cast<double>(a.second)));
    }
    if (m.empty())
        throw ConfigError("--model", "eval needs --model, eval.imputed_path/eval.truth_path, or "
                                     "--experiment");
    write_metrics(dir / "metrics.csv", m);
    for (const auto& [k, v] : m) log << k << " = " << v << '\n';
    return 0;
}

}  // namespace rshdmr::cli
