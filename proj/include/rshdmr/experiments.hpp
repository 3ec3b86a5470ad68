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

// Built-in reproductions of the synthetic and water-PES studies. Each run is
// fully determined by its seed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rshdmr/datasets.hpp"
#include "rshdmr/hdmr.hpp"
#include "rshdmr/imputation.hpp"
#include "rshdmr/projection.hpp"

namespace rshdmr {

/// splitmix64 finalizer; gives independent streams from one user seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum class SeedStream : std::uint64_t { generate = 0, split = 1, holes = 2, noise = 3 };

inline std::uint64_t stream_seed(std::uint64_t seed, SeedStream s) {
    return derive_seed(seed, static_cast<std::uint64_t>(s));
}

inline const KernelParams kSyntheticKernel{0.6, 1e-10};
inline const KernelParams kWaterKernel{0.6, 1e-11};

/// Random split without replacement: the first `counts[0]` rows, the next
/// `counts[1]`, ...
inline std::vector<std::vector<Eigen::Index>> random_split(Eigen::Index rows,
                                                           const std::vector<std::size_t>& counts,
                                                           std::uint64_t seed) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    detail::require(total <= static_cast<std::size_t>(rows),
                    "random_split: requested " + std::to_string(total) + " rows of " +
                        std::to_string(rows));
    Rng rng(seed);
    const auto perm = rng.permutation(static_cast<std::size_t>(rows));
    std::vector<std::vector<Eigen::Index>> out;
    std::size_t next = 0;
    for (auto c : counts) {
        std::vector<Eigen::Index> part;
        for (std::size_t k = 0; k < c; ++k) part.push_back(static_cast<Eigen::Index>(perm[next++]));
        out.push_back(std::move(part));
    }
    return out;
}

// ---------------------------------------------------------------------------

struct FitExperimentResult {
    TrainResult train;
    double rmse_full = 0.0;  // scaled units, on every row of the dataset
};

/// Trains on `n_train` random rows of `full` and scores on all of it.
inline FitExperimentResult run_fit_experiment(const Dataset& full, const SelectionList& matrices,
                                              Eigen::Index n_train, const KernelParams& kernel,
                                              const TrainingSchedule& schedule,
                                              std::uint64_t seed) {
    const auto split =
        random_split(full.rows(), {static_cast<std::size_t>(n_train)}, stream_seed(seed, SeedStream::split));
    FitExperimentResult out{hdmr_train(full.take_rows(split[0]), matrices, kernel, schedule), 0.0};
    out.rmse_full = evaluate(out.train.model, full);
    return out;
}

/// 1d model of f = x + y + z on 100 random rows, scored on 10,000.
inline FitExperimentResult additive_fit_experiment(std::uint64_t seed, Eigen::Index n_train = 100,
                                                   Eigen::Index n_total = 10000) {
    const Dataset full = gen_additive(n_total, 3, stream_seed(seed, SeedStream::generate));
    return run_fit_experiment(full, build_one_d(3), n_train, kSyntheticKernel, TrainingSchedule{},
                              seed);
}

// ---------------------------------------------------------------------------

struct ImputeProtocol {
    Eigen::Index n_train = 100;
    std::vector<std::size_t> holes_per_column;  // one entry per feature
    KernelParams kernel = kSyntheticKernel;
    TrainingSchedule schedule{};
    ImputationPolicy policy{};
    bool delta_from_model_rmse = false;  // use the model's full-data RMSE as delta
    bool retrain = false;                // refit on train + imputed rows
};

struct ImputeExperimentResult {
    FitReport fit;
    double model_rmse_full = 0.0;
    std::optional<double> retrain_rmse_full;
    double delta = 0.0;
    ImputationResult imputation;
    std::vector<TruthRecord> truth;
    double candidate_hit_fraction = 0.0;  // truth within one grid step of a candidate
    double grid_step = 0.0;
};

/// Trains a first-order model on `n_train` complete rows, removes one value
/// from each of a disjoint set of rows, imputes them, and scores the result.
inline ImputeExperimentResult run_impute_experiment(const Dataset& full, const ImputeProtocol& p,
                                                    std::uint64_t seed) {
    detail::require(p.holes_per_column.size() == static_cast<std::size_t>(full.dim()),
                    "impute experiment: need one hole count per column");
    std::size_t n_holes = 0;
    for (auto c : p.holes_per_column) n_holes += c;
    const auto split = random_split(full.rows(), {static_cast<std::size_t>(p.n_train), n_holes},
                                    stream_seed(seed, SeedStream::split));
    const Dataset train = full.take_rows(split[0]);
    const auto injected = inject_missing(full.take_rows(split[1]), p.holes_per_column,
                                         stream_seed(seed, SeedStream::holes));

    ImputeExperimentResult out;
    auto fitted = hdmr_train(train, build_one_d(static_cast<int>(full.dim())), p.kernel, p.schedule);
    out.fit = fitted.report;
    out.model_rmse_full = evaluate(fitted.model, full);

    ImputationPolicy policy = p.policy;
    if (p.delta_from_model_rmse) policy.delta = out.model_rmse_full;
    out.delta = policy.delta;
    out.truth = injected.truth;
    out.imputation = impute_dataset(fitted.model, injected.data, policy, &out.truth);

    out.grid_step = 1.0 / policy.num_subintervals;
    std::size_t hits = 0;
    for (const auto& t : out.truth) {
        for (const auto& s : out.imputation.sets) {
            if (s.row_index != t.row || s.variable_index != t.column) continue;
            for (double c : s.candidates)
                if (std::abs(c - t.value) <= out.grid_step) {
                    ++hits;
                    break;
                }
        }
    }
    out.candidate_hit_fraction =
        out.truth.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(out.truth.size());

    if (p.retrain) {
        Dataset merged = train;
        const Dataset& imp = out.imputation.completed;
        merged.x.conservativeResize(train.rows() + imp.rows(), Eigen::NoChange);
        merged.y.conservativeResize(train.rows() + imp.rows());
        merged.x.bottomRows(imp.rows()) = imp.x;
        merged.y.tail(imp.rows()) = imp.y;
        const auto re = hdmr_train(merged, build_one_d(static_cast<int>(full.dim())), p.kernel,
                                   p.schedule);
        out.retrain_rmse_full = evaluate(re.model, full);
    }
    return out;
}

inline ImputeExperimentResult additive_impute_experiment(std::uint64_t seed) {
    ImputeProtocol p;
    p.n_train = 100;
    p.holes_per_column = {100, 100, 100};
    p.retrain = true;
    return run_impute_experiment(gen_additive(10000, 3, stream_seed(seed, SeedStream::generate)), p,
                                 seed);
}

inline ImputeExperimentResult coupled_impute_experiment(std::uint64_t seed) {
    ImputeProtocol p;
    p.n_train = 100;
    p.holes_per_column = {100, 100, 100};
    return run_impute_experiment(gen_coupled(10000, stream_seed(seed, SeedStream::generate)), p,
                                 seed);
}

inline ImputeExperimentResult power_impute_experiment(std::uint64_t seed,
                                                      std::size_t holes_per_column = 100) {
    ImputeProtocol p;
    p.n_train = 100;
    p.holes_per_column = {holes_per_column, holes_per_column, holes_per_column};
    return run_impute_experiment(gen_power(10000, stream_seed(seed, SeedStream::generate)), p, seed);
}

inline ImputeExperimentResult quartic_candidates_experiment(std::uint64_t seed) {
    ImputeProtocol p;
    p.n_train = 100;
    p.holes_per_column = {100, 0, 0};
    p.delta_from_model_rmse = true;
    return run_impute_experiment(gen_quartic(10000, stream_seed(seed, SeedStream::generate)), p,
                                 seed);
}

namespace detail {

inline ImputeProtocol first_variable_protocol(Eigen::Index dim) {
    ImputeProtocol p;
    p.n_train = 200;
    p.holes_per_column.assign(static_cast<std::size_t>(dim), 0);
    p.holes_per_column[0] = 100;
    return p;
}

}  // namespace detail

inline ImputeExperimentResult d15_impute_experiment(std::uint64_t seed) {
    return run_impute_experiment(gen_additive(10000, 15, stream_seed(seed, SeedStream::generate)),
                                 detail::first_variable_protocol(15), seed);
}

/// Noise of standard deviation `sigma` on the raw (unscaled) target.
inline ImputeExperimentResult noisy_impute_experiment(std::uint64_t seed, double sigma = 0.05) {
    const Dataset clean = gen_additive(10000, 3, stream_seed(seed, SeedStream::generate));
    return run_impute_experiment(add_noise(clean, sigma, stream_seed(seed, SeedStream::noise)),
                                 detail::first_variable_protocol(3), seed);
}

inline ImputeExperimentResult uneven_impute_experiment(std::uint64_t seed) {
    return run_impute_experiment(gen_uneven(10000, 5000, stream_seed(seed, SeedStream::generate)),
                                 detail::first_variable_protocol(3), seed);
}

// ---------------------------------------------------------------------------

struct ConfidenceContrast {
    double mean_std_1d = 0.0;
    double mean_std_full = 0.0;
    double rmse_1d = 0.0;
    double rmse_full = 0.0;
};

/// 1d model versus a single full-dimensional GPR on the same sparse data of
/// the coupled function; std averaged over queries inside [0.1, 0.9]^3.
inline ConfidenceContrast confidence_contrast_experiment(std::uint64_t seed,
                                                         Eigen::Index n_train = 100) {
    const Dataset full = gen_coupled(10000, stream_seed(seed, SeedStream::generate));
    const auto one_d = run_fit_experiment(full, build_one_d(3), n_train, kSyntheticKernel,
                                          TrainingSchedule{}, seed);
    const auto full_d = run_fit_experiment(full, build_full(3), n_train, kSyntheticKernel,
                                           TrainingSchedule{}, seed);
    std::vector<Eigen::Index> inner;
    for (Eigen::Index r = 0; r < full.rows(); ++r)
        if ((full.x.row(r).array() >= 0.1).all() && (full.x.row(r).array() <= 0.9).all())
            inner.push_back(r);
    const Matrix queries = full.take_rows(inner).x;
    ConfidenceContrast out;
    out.mean_std_1d = one_d.train.model.predict_std(queries).mean();
    out.mean_std_full = full_d.train.model.predict_std(queries).mean();
    out.rmse_1d = one_d.rmse_full;
    out.rmse_full = full_d.rmse_full;
    return out;
}

// ---------------------------------------------------------------------------

struct WaterResult {
    std::string model;
    double rmse_scaled = 0.0;
    double rmse_raw = 0.0;  // target units of the file (cm^-1)
    FitReport fit;
};

/// 2d model on linear combinations (x1, x2+x3), (x1+x2, x3), (x1+x3, x2).
inline SelectionList water_2dstar_matrices() {
    return parse_matrices("[[1,0],[0,1],[0,1]]; [[1,0],[1,0],[0,1]]; [[1,0],[0,1],[1,0]]", 3);
}

/// Scales the raw file to [0,1], trains on 1000 random rows with the given
/// family ("1d", "2d", "2d*"), and scores on every row.
inline WaterResult water_experiment(const Dataset& raw, const std::string& family,
                                    std::uint64_t seed, Eigen::Index n_train = 1000) {
    detail::require(raw.dim() == 3, "water experiment: expected 3 features");
    const Dataset scaled = minmax_scale(raw);
    const SelectionList matrices =
        family == "2d*" ? water_2dstar_matrices() : parse_matrices(family, 3);
    const auto r = run_fit_experiment(scaled, matrices, n_train, kWaterKernel,
                                      TrainingSchedule{50, 0.1, 1.0}, seed);
    WaterResult out;
    out.model = family;
    out.rmse_scaled = r.rmse_full;
    out.rmse_raw = r.rmse_full * scaled.scaler->target_range();
    out.fit = r.train.report;
    return out;
}

}  // namespace rshdmr
