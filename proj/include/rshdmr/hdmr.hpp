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

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rshdmr/datasets.hpp"
#include "rshdmr/error.hpp"
#include "rshdmr/gpr.hpp"
#include "rshdmr/projection.hpp"

namespace rshdmr {

/// Cycle count and the linear ramp of the down-weighting factor a(c).
struct TrainingSchedule {
    int cycles = 50;
    double scale_start = 0.1;
    double scale_rate = 2.0;

    void validate() const {
        detail::require(cycles >= 1, "schedule: cycles must be >= 1");
        detail::require(scale_start > 0.0 && scale_start <= 1.0,
                        "schedule: scale_start must lie in (0, 1]");
        detail::require(std::isfinite(scale_rate) && scale_rate > 0.0,
                        "schedule: scale_rate must be > 0");
    }
};

/// a(c) = min(s + (1 - s) e c / C, 1).
inline double scale_factor(int cycle, const TrainingSchedule& schedule) {
    schedule.validate();
    detail::require(cycle >= 0 && cycle < schedule.cycles,
                    "scale_factor: cycle " + std::to_string(cycle) + " outside [0, " +
                        std::to_string(schedule.cycles) + ")");
    const double s = schedule.scale_start;
    const double ramp = schedule.scale_rate * cycle / schedule.cycles;
    return std::min(s + (1.0 - s) * ramp, 1.0);
}

inline double rmse(const Vector& pred, const Vector& truth) {
    detail::require(pred.size() == truth.size(), "rmse: length mismatch");
    detail::require(pred.size() >= 1, "rmse: empty input");
    return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

struct Component {
    SelectionMatrix selection;
    GprModel gpr;
};

/// Sum of component GPRs, each fed X * A_i.
struct HdmrModel {
    std::vector<Component> components;
    KernelParams kernel;
    TrainingSchedule schedule;
    std::vector<double> train_rmse_history;
    std::optional<Scaler> scaler;

    Eigen::Index dim() const {
        detail::require(!components.empty(), "hdmr model has no components");
        return components.front().selection.input_dim();
    }

    /// Column i holds component i's mean at every query row.
    Matrix component_outputs(const Matrix& x) const {
        check_queries(x);
        Matrix out(x.rows(), static_cast<Eigen::Index>(components.size()));
        for (std::size_t i = 0; i < components.size(); ++i) {
            const auto& c = components[i];
            out.col(static_cast<Eigen::Index>(i)) = c.gpr.predict_mean(project(x, c.selection));
        }
        return out;
    }

    Vector predict(const Matrix& x) const {
        const Matrix parts = component_outputs(x);
        Vector out = Vector::Zero(x.rows());
        for (Eigen::Index i = 0; i < parts.cols(); ++i) out += parts.col(i);
        return out;
    }

    /// Square root of the summed component variances: the confidence of the
    /// expectation value, not an error bar on the fit.
    Vector predict_std(const Matrix& x) const {
        check_queries(x);
        Vector var = Vector::Zero(x.rows());
        for (const auto& c : components) var += c.gpr.predict_variance(project(x, c.selection));
        return var.array().sqrt().matrix();
    }

    /// True when every component is a single basis column (first-order model).
    bool is_first_order() const {
        return !components.empty() &&
               std::all_of(components.begin(), components.end(),
                           [](const Component& c) { return c.selection.is_first_order(); });
    }

private:
    void check_queries(const Matrix& x) const {
        detail::require(x.cols() == dim(), "hdmr predict: query has " + std::to_string(x.cols()) +
                                               " columns, model expects " +
                                               std::to_string(dim()));
        detail::require(!x.array().isNaN().any(), "hdmr predict: queries contain missing values");
    }
};

struct CycleRecord {
    int cycle = 0;
    double scale = 0.0;
    double rmse = 0.0;  // training RMSE in the scaled target units
};

struct ComponentSummary {
    std::string label;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct FitReport {
    double rmse_train = 0.0;
    std::optional<double> rmse_train_unscaled;
    std::optional<double> rmse_eval;
    std::vector<CycleRecord> history;
    std::vector<ComponentSummary> components;
};

/// State exposed to an observer just before a component is refitted.
struct TrainStep {
    int cycle;
    std::size_t component;
    const Vector& target;
    const std::vector<Vector>& stored_outputs;
    const Vector& y;
};

using TrainObserver = std::function<void(const TrainStep&)>;

struct TrainResult {
    HdmrModel model;
    FitReport report;
};

/// Self-consistent cyclic fitting. Every component's stored output starts at
/// a(0) y / N; each fit targets y minus the other stored outputs, after which
/// the component's stored output becomes a(c) times its mean on the training
/// set.
/// The kernel matrix of each component is factorized once and reused.
inline TrainResult hdmr_train(const Dataset& data, const SelectionList& matrices,
                              const KernelParams& kernel, const TrainingSchedule& schedule,
                              const TrainObserver& observer = {}) {
    data.validate();
    kernel.validate();
    schedule.validate();
    detail::require(!matrices.empty(), "hdmr_train: no selection matrices");
    detail::require(data.rows() >= 1, "hdmr_train: empty training set");
    detail::require(!data.x.array().isNaN().any(),
                    "hdmr_train: training data contains missing values");
    detail::require(data.x.allFinite() && data.y.allFinite(),
                    "hdmr_train: training data must be finite");
    for (std::size_t i = 0; i < matrices.size(); ++i)
        detail::require(matrices[i].input_dim() == data.dim(),
                        "hdmr_train: matrix " + std::to_string(i + 1) + " ('" +
                            matrices[i].label() + "') has " +
                            std::to_string(matrices[i].input_dim()) + " rows, data has D = " +
                            std::to_string(data.dim()));

    const std::size_t n = matrices.size();
    const Eigen::Index m = data.rows();
    const Vector& y = data.y;

    std::vector<Matrix> inputs;
    inputs.reserve(n);
    for (const auto& a : matrices) inputs.push_back(project(data.x, a));

    // Stored outputs always carry the a(c) factor; the initial guess is y / N.
    std::vector<Vector> stored(n, scale_factor(0, schedule) * (y / static_cast<double>(n)));
    std::vector<Vector> means(n);
    std::vector<std::optional<GprModel>> fits(n);

    TrainResult result;
    auto& report = result.report;

    for (int c = 0; c < schedule.cycles; ++c) {
        const double a = scale_factor(c, schedule);
        for (std::size_t i = 0; i < n; ++i) {
            Vector others = Vector::Zero(m);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others += stored[j];
            const Vector target = y - others;
            if (!target.allFinite())
                throw NumericalError("hdmr_train: non-finite residual target at cycle " +
                                     std::to_string(c) + ", component " + std::to_string(i + 1));
            if (observer) observer(TrainStep{c, i, target, stored, y});
            try {
                fits[i] = fits[i] ? fits[i]->refit(target)
                                  : GprModel::fit(inputs[i], target, kernel);
            } catch (const ConditioningError& e) {
                throw ConditioningError("cycle " + std::to_string(c) + ", component " +
                                            std::to_string(i + 1) + " ('" + matrices[i].label() +
                                            "'): " + e.what(),
                                        e.last_jitter());
            } catch (const NumericalError& e) {
                throw NumericalError("cycle " + std::to_string(c) + ", component " +
                                     std::to_string(i + 1) + ": " + e.what());
            }
            means[i] = fits[i]->predict_mean(inputs[i]);
            stored[i] = a * means[i];
        }
        Vector pred = Vector::Zero(m);
        for (const auto& v : means) pred += v;
        const double err = rmse(pred, y);
        if (!std::isfinite(err))
            throw NumericalError("hdmr_train: non-finite training RMSE at cycle " +
                                 std::to_string(c));
        report.history.push_back({c, a, err});
    }

    auto& model = result.model;
    model.kernel = kernel;
    model.schedule = schedule;
    model.scaler = data.scaler;
    for (std::size_t i = 0; i < n; ++i) {
        model.components.push_back({matrices[i], std::move(*fits[i])});
        report.components.push_back({matrices[i].label(), means[i].mean(), means[i].minCoeff(),
                                     means[i].maxCoeff()});
    }
    for (const auto& h : report.history) model.train_rmse_history.push_back(h.rmse);

    report.rmse_train = rmse(model.predict(data.x), y);
    if (data.scaler) report.rmse_train_unscaled = report.rmse_train * data.scaler->target_range();
    return result;
}

/// Fills rmse_eval (scaled units) on a labeled evaluation set.
inline double evaluate(const HdmrModel& model, const Dataset& eval) {
    eval.validate();
    return rmse(model.predict(eval.x), eval.y);
}

}  // namespace rshdmr
