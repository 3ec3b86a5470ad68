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

#include <fstream>
#include <string>

#include <json.hpp>

#include "rshdmr/error.hpp"
#include "rshdmr/hdmr.hpp"

namespace rshdmr {

inline constexpr const char* kModelFormat = "rshdmr-model";
inline constexpr int kModelVersion = 1;

namespace detail {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
    require(j.is_array() && !j.empty(), "model file: '" + what + "' must be a non-empty array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols,
                "model file: '" + what + "' has ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

inline json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Vector vector_from_json(const json& j, const std::string& what) {
    require(j.is_array(), "model file: '" + what + "' must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

}  // namespace detail

inline nlohmann::json model_to_json(const HdmrModel& model) {
    using detail::json;
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["dim"] = model.dim();
    j["kernel"] = {{"length_scale", model.kernel.length_scale},
                   {"noise_variance", model.kernel.noise_variance}};
    j["schedule"] = {{"cycles", model.schedule.cycles},
                     {"scale_start", model.schedule.scale_start},
                     {"scale_rate", model.schedule.scale_rate}};
    j["train_rmse_history"] = model.train_rmse_history;
    if (model.scaler) {
        const auto& s = *model.scaler;
        j["scaler"] = {{"feature_min", detail::vector_to_json(s.feature_min)},
                       {"feature_max", detail::vector_to_json(s.feature_max)},
                       {"target_min", s.target_min},
                       {"target_max", s.target_max}};
    } else {
        j["scaler"] = nullptr;
    }
    json comps = json::array();
    for (const auto& c : model.components) {
        comps.push_back({{"label", c.selection.label()},
                         {"selection", detail::matrix_to_json(c.selection.entries())},
                         {"length_scale", c.gpr.kernel().length_scale},
                         {"noise_variance", c.gpr.kernel().noise_variance},
                         {"jitter", c.gpr.jitter()},
                         {"train_inputs", detail::matrix_to_json(c.gpr.train_inputs())},
                         {"weights", detail::vector_to_json(c.gpr.weights())}});
    }
    j["components"] = std::move(comps);
    return j;
}

inline HdmrModel model_from_json(const nlohmann::json& j) {
    try {
        detail::require(j.value("format", "") == kModelFormat, "model file: unrecognized format");
        const int version = j.at("version").get<int>();
        detail::require(version == kModelVersion,
                        "model file: unsupported version " + std::to_string(version));
        HdmrModel model;
        const auto dim = j.at("dim").get<Eigen::Index>();
        model.kernel.length_scale = j.at("kernel").at("length_scale").get<double>();
        model.kernel.noise_variance = j.at("kernel").at("noise_variance").get<double>();
        model.schedule.cycles = j.at("schedule").at("cycles").get<int>();
        model.schedule.scale_start = j.at("schedule").at("scale_start").get<double>();
        model.schedule.scale_rate = j.at("schedule").at("scale_rate").get<double>();
        model.schedule.validate();
        model.train_rmse_history = j.at("train_rmse_history").get<std::vector<double>>();
        if (!j.at("scaler").is_null()) {
            const auto& s = j.at("scaler");
            Scaler sc;
            sc.feature_min = detail::vector_from_json(s.at("feature_min"), "feature_min");
            sc.feature_max = detail::vector_from_json(s.at("feature_max"), "feature_max");
            sc.target_min = s.at("target_min").get<double>();
            sc.target_max = s.at("target_max").get<double>();
            sc.validate();
            detail::require(sc.dim() == dim, "model file: scaler dimension mismatch");
            model.scaler = std::move(sc);
        }
        const auto& comps = j.at("components");
        detail::require(comps.is_array() && !comps.empty(), "model file: no components");
        for (const auto& c : comps) {
            SelectionMatrix sel(detail::matrix_from_json(c.at("selection"), "selection"),
                                c.value("label", ""));
            detail::require(sel.input_dim() == dim, "model file: selection matrix rows != dim");
            KernelParams kp{c.at("length_scale").get<double>(), c.at("noise_variance").get<double>()};
            Matrix inputs = detail::matrix_from_json(c.at("train_inputs"), "train_inputs");
            detail::require(inputs.cols() == sel.output_dim(),
                            "model file: training inputs do not match selection matrix");
            auto gpr = GprModel::restore(std::move(inputs), kp, c.at("jitter").get<double>(),
                                         detail::vector_from_json(c.at("weights"), "weights"));
            model.components.push_back({std::move(sel), std::move(gpr)});
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model file: ") + e.what());
    }
}

inline void save_model(const HdmrModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << model_to_json(model).dump() << '\n';
}

inline HdmrModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

}  // namespace rshdmr
