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
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rshdmr/datasets.hpp"
#include "rshdmr/error.hpp"
#include "rshdmr/hdmr.hpp"

namespace rshdmr {

struct ImputationPolicy {
    double delta = 0.0;
    int num_subintervals = 1000;

    void validate() const {
        detail::require(std::isfinite(delta) && delta >= 0.0, "imputation: delta must be >= 0");
        detail::require(num_subintervals >= 1, "imputation: num_subintervals must be >= 1");
    }
};

/// First-order components tabulated on the left endpoints j / s, j = 0..s-1,
/// of a uniform partition of [0, 1]. The right endpoint 1 is not tabulated.
struct InverseLookupTable {
    int num_subintervals = 0;
    Vector grid;
    Matrix values;                     // row i: component i on the grid
    std::vector<Eigen::Index> variable;  // variable fed to component i
    std::vector<Eigen::Index> row_of_variable;

    Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(row_of_variable.size()); }
};

struct CandidateSet {
    Eigen::Index row_index = 0;
    Eigen::Index variable_index = 0;
    double target_value = 0.0;
    std::vector<double> candidates;  // by distance to target, then abscissa
    double chosen = 0.0;
};

namespace detail {

/// Component index per variable; every variable must feed exactly one
/// first-order component.
inline std::vector<Eigen::Index> first_order_layout(const HdmrModel& model) {
    require(model.is_first_order(),
            "imputation requires a first-order model (every selection matrix a single basis "
            "column)");
    const Eigen::Index dim = model.dim();
    std::vector<Eigen::Index> row_of(static_cast<std::size_t>(dim), -1);
    for (std::size_t i = 0; i < model.components.size(); ++i) {
        const Eigen::Index v = model.components[i].selection.basis_index(0);
        require(row_of[static_cast<std::size_t>(v)] < 0,
                "imputation: variable x" + std::to_string(v + 1) + " feeds several components");
        row_of[static_cast<std::size_t>(v)] = static_cast<Eigen::Index>(i);
    }
    for (Eigen::Index v = 0; v < dim; ++v)
        require(row_of[static_cast<std::size_t>(v)] >= 0,
                "imputation: variable x" + std::to_string(v + 1) + " has no component");
    return row_of;
}

inline double component_at(const HdmrModel& model, Eigen::Index component, double value) {
    Matrix q(1, 1);
    q(0, 0) = value;
    return model.components[static_cast<std::size_t>(component)].gpr.predict_mean(q)(0);
}

}  // namespace detail

inline InverseLookupTable build_lookup(const HdmrModel& model, int num_subintervals) {
    detail::require(num_subintervals >= 1, "build_lookup: num_subintervals must be >= 1");
    InverseLookupTable t;
    t.row_of_variable = detail::first_order_layout(model);
    t.num_subintervals = num_subintervals;
    t.grid.resize(num_subintervals);
    for (int j = 0; j < num_subintervals; ++j)
        t.grid(j) = static_cast<double>(j) / static_cast<double>(num_subintervals);
    const Matrix g = t.grid;
    t.values.resize(static_cast<Eigen::Index>(model.components.size()), num_subintervals);
    for (std::size_t i = 0; i < model.components.size(); ++i) {
        t.values.row(static_cast<Eigen::Index>(i)) =
            model.components[i].gpr.predict_mean(g).transpose();
        t.variable.push_back(model.components[i].selection.basis_index(0));
    }
    return t;
}

struct ResidualTarget {
    Eigen::Index variable_index = 0;
    double target_value = 0.0;
};

/// y minus every other component evaluated at the row's known values.
inline ResidualTarget residual_target(const HdmrModel& model, const Vector& x_row, double y) {
    const auto row_of = detail::first_order_layout(model);
    detail::require(x_row.size() == model.dim(), "residual_target: row length does not match D");
    detail::require(std::isfinite(y), "residual_target: target value must be known and finite");
    Eigen::Index missing = -1;
    for (Eigen::Index v = 0; v < x_row.size(); ++v) {
        if (!is_missing(x_row(v))) continue;
        detail::require(missing < 0, "residual_target: row has more than one missing entry");
        missing = v;
    }
    detail::require(missing >= 0, "residual_target: row has no missing entry");
    double target = y;
    for (Eigen::Index v = 0; v < x_row.size(); ++v)
        if (v != missing)
            target -= detail::component_at(model, row_of[static_cast<std::size_t>(v)], x_row(v));
    return {missing, target};
}

/// Candidate abscissae for one residual target.
///
/// A grid point qualifies when its tabulated value lies within d_min + delta
/// of the target (d_min: distance of the nearest grid value). In addition,
/// every subinterval [I_j, I_j+1] whose value span comes within D_min + delta
/// of the target (D_min: smallest such span distance, 0 whenever some
/// subinterval brackets the target) contributes its endpoint nearer in value,
/// so that each branch of a non-monotone component crossing the target is
/// represented even when the grid quantization exceeds delta. The global
/// nearest grid point always sorts first.
inline CandidateSet invert(const InverseLookupTable& table, Eigen::Index variable_index,
                           double target_value, const ImputationPolicy& policy) {
    policy.validate();
    detail::require(variable_index >= 0 && variable_index < table.dim(),
                    "invert: variable index out of range");
    detail::require(std::isfinite(target_value), "invert: target must be finite");
    const auto row =
        table.values.row(table.row_of_variable[static_cast<std::size_t>(variable_index)]);
    const auto s = static_cast<std::size_t>(row.size());

    std::vector<double> dist(s);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < s; ++j) {
        dist[j] = std::abs(row(static_cast<Eigen::Index>(j)) - target_value);
        dmin = std::min(dmin, dist[j]);
    }
    std::vector<char> take(s, 0);
    for (std::size_t j = 0; j < s; ++j)
        if (dist[j] <= dmin + policy.delta) take[j] = 1;

    if (s >= 2) {
        std::vector<double> span(s - 1);
        double span_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k + 1 < s; ++k) {
            const double a = row(static_cast<Eigen::Index>(k));
            const double b = row(static_cast<Eigen::Index>(k + 1));
            const double lo = std::min(a, b);
            const double hi = std::max(a, b);
            span[k] = target_value < lo ? lo - target_value
                                        : (target_value > hi ? target_value - hi : 0.0);
            span_min = std::min(span_min, span[k]);
        }
        for (std::size_t k = 0; k + 1 < s; ++k)
            if (span[k] <= span_min + policy.delta) take[dist[k + 1] < dist[k] ? k + 1 : k] = 1;
    }

    std::vector<std::size_t> hits;
    for (std::size_t j = 0; j < s; ++j)
        if (take[j]) hits.push_back(j);
    std::stable_sort(hits.begin(), hits.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    CandidateSet out;
    out.variable_index = variable_index;
    out.target_value = target_value;
    out.candidates.reserve(hits.size());
    for (auto j : hits) out.candidates.push_back(table.grid(static_cast<Eigen::Index>(j)));
    out.chosen = out.candidates.front();
    return out;
}

struct VariableImputationError {
    Eigen::Index variable = 0;
    std::size_t count = 0;
    double rmse_chosen = 0.0;
    double rmse_best_candidate = 0.0;  // candidate closest to the truth
};

struct ImputationResult {
    Dataset completed;
    std::vector<CandidateSet> sets;  // by row
    std::vector<VariableImputationError> errors;  // only with ground truth
};

/// Per-variable RMSE of the imputed values against withheld truth.
inline std::vector<VariableImputationError> imputation_errors(
    const std::vector<CandidateSet>& sets, const std::vector<TruthRecord>& truth, Eigen::Index dim) {
    std::map<std::pair<Eigen::Index, Eigen::Index>, const CandidateSet*> by_cell;
    for (const auto& s : sets) by_cell[{s.row_index, s.variable_index}] = &s;
    std::vector<VariableImputationError> out(static_cast<std::size_t>(dim));
    std::vector<double> sq_chosen(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> sq_best(static_cast<std::size_t>(dim), 0.0);
    for (const auto& t : truth) {
        auto it = by_cell.find({t.row, t.column});
        detail::require(it != by_cell.end(), "imputation_errors: truth record for row " +
                                                 std::to_string(t.row) + ", column " +
                                                 std::to_string(t.column) + " was not imputed");
        const CandidateSet& s = *it->second;
        double best = s.candidates.front();
        for (double c : s.candidates)
            if (std::abs(c - t.value) < std::abs(best - t.value)) best = c;
        const auto v = static_cast<std::size_t>(t.column);
        sq_chosen[v] += (s.chosen - t.value) * (s.chosen - t.value);
        sq_best[v] += (best - t.value) * (best - t.value);
        ++out[v].count;
    }
    for (std::size_t v = 0; v < out.size(); ++v) {
        out[v].variable = static_cast<Eigen::Index>(v);
        if (out[v].count == 0) continue;
        out[v].rmse_chosen = std::sqrt(sq_chosen[v] / static_cast<double>(out[v].count));
        out[v].rmse_best_candidate = std::sqrt(sq_best[v] / static_cast<double>(out[v].count));
    }
    return out;
}

/// Fills every single-missing row with its first candidate. `data` must be in
/// the model's scaled units.
inline ImputationResult impute_dataset(const HdmrModel& model, const Dataset& data,
                                       const ImputationPolicy& policy,
                                       const std::vector<TruthRecord>* truth = nullptr) {
    policy.validate();
    data.validate();
    detail::require(data.dim() == model.dim(), "impute_dataset: data has " +
                                                   std::to_string(data.dim()) +
                                                   " columns, model expects " +
                                                   std::to_string(model.dim()));
    const auto row_of = detail::first_order_layout(model);

    std::vector<Eigen::Index> bad;
    for (Eigen::Index r = 0; r < data.rows(); ++r)
        if (data.x.row(r).array().isNaN().count() > 1) bad.push_back(r);
    if (!bad.empty()) {
        std::string msg = "impute_dataset: rows with more than one missing entry:";
        for (std::size_t k = 0; k < bad.size() && k < 20; ++k) msg += " " + std::to_string(bad[k]);
        if (bad.size() > 20) msg += " ... (" + std::to_string(bad.size()) + " rows)";
        throw InputError(msg);
    }

    ImputationResult result;
    result.completed = data;
    if (data.missing_count() == 0) return result;

    // Component values at every known entry, one batch per variable.
    Matrix parts(data.rows(), data.dim());
    for (Eigen::Index v = 0; v < data.dim(); ++v) {
        Matrix col = data.x.col(v);
        for (Eigen::Index r = 0; r < col.rows(); ++r)
            if (is_missing(col(r, 0))) col(r, 0) = 0.0;
        parts.col(v) = model.components[static_cast<std::size_t>(row_of[static_cast<std::size_t>(v)])]
                           .gpr.predict_mean(col);
    }

    const InverseLookupTable table = build_lookup(model, policy.num_subintervals);
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        Eigen::Index missing = -1;
        for (Eigen::Index v = 0; v < data.dim(); ++v)
            if (is_missing(data.x(r, v))) missing = v;
        if (missing < 0) continue;
        double target = data.y(r);
        for (Eigen::Index v = 0; v < data.dim(); ++v)
            if (v != missing) target -= parts(r, v);
        if (!std::isfinite(target))
            throw NumericalError("impute_dataset: non-finite residual target on row " +
                                 std::to_string(r));
        CandidateSet set = invert(table, missing, target, policy);
        set.row_index = r;
        result.completed.x(r, missing) = set.chosen;
        result.sets.push_back(std::move(set));
    }
    if (truth) result.errors = imputation_errors(result.sets, *truth, data.dim());
    return result;
}

}  // namespace rshdmr
