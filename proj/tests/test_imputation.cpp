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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "rshdmr/datasets.hpp"
#include "rshdmr/experiments.hpp"
#include "rshdmr/hdmr.hpp"
#include "rshdmr/imputation.hpp"
#include "rshdmr/random.hpp"

namespace rshdmr {
namespace {

using Fn = std::function<double(double)>;

InverseLookupTable analytic_table(const Fn& f, int s) {
    InverseLookupTable t;
    t.num_subintervals = s;
    t.grid.resize(s);
    t.values.resize(1, s);
    for (int j = 0; j < s; ++j) {
        t.grid(j) = static_cast<double>(j) / s;
        t.values(0, j) = f(t.grid(j));
    }
    t.variable = {0};
    t.row_of_variable = {0};
    return t;
}

// Roots of f - target on [0, 1) by sign change plus bisection on a fine mesh.
std::vector<double> roots(const Fn& f, double target) {
    std::vector<double> out;
    const int mesh = 200000;
    double a = 0.0;
    double fa = f(a) - target;
    for (int k = 1; k < mesh; ++k) {
        double b = static_cast<double>(k) / mesh;
        double fb = f(b) - target;
        if (fa == 0.0) out.push_back(a);
        else if (fa * fb < 0.0) {
            double lo = a, hi = b;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((f(lo) - target) * (f(mid) - target) <= 0.0) hi = mid;
                else lo = mid;
            }
            out.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    return out;
}

const TrainingSchedule kShort{20, 0.1, 2.0};

HdmrModel additive_model() {
    return hdmr_train(gen_additive(100, 3, 21), build_one_d(3), kSyntheticKernel, kShort).model;
}

TEST(ImputationPolicy, Validation) {
    EXPECT_THROW((ImputationPolicy{-0.1, 10}.validate()), InputError);
    EXPECT_THROW((ImputationPolicy{0.0, 0}.validate()), InputError);
    EXPECT_THROW((ImputationPolicy{std::nan(""), 10}.validate()), InputError);
    EXPECT_NO_THROW((ImputationPolicy{0.0, 1}.validate()));
}

TEST(BuildLookup, RejectsHigherOrderModels) {
    const auto r = hdmr_train(gen_coupled(30, 22), build_mixed(3, {1, 2}), kSyntheticKernel,
                              TrainingSchedule{3, 0.1, 1.0});
    EXPECT_THROW(build_lookup(r.model, 100), InputError);
    const auto twice = hdmr_train(gen_coupled(30, 22), parse_matrices("[[1],[0],[0]]; [[1],[0],[0]]; [[0],[1],[0]]", 3),
                                  kSyntheticKernel, TrainingSchedule{3, 0.1, 1.0});
    EXPECT_THROW(build_lookup(twice.model, 100), InputError);
}

TEST(BuildLookup, GridAndValues) {
    const HdmrModel m = additive_model();
    const auto one = build_lookup(m, 1);
    ASSERT_EQ(one.grid.size(), 1);
    EXPECT_EQ(one.grid(0), 0.0);
    EXPECT_THROW(build_lookup(m, 0), InputError);

    const auto t = build_lookup(m, 250);
    ASSERT_EQ(t.values.rows(), 3);
    ASSERT_EQ(t.values.cols(), 250);
    EXPECT_EQ(t.grid(249), 249.0 / 250.0);
    for (int c = 0; c < 3; ++c) {
        Matrix q(1, 1);
        for (int j : {0, 17, 125, 249}) {
            q(0, 0) = j / 250.0;
            EXPECT_NEAR(t.values(t.row_of_variable[c], j),
                        m.components[t.row_of_variable[c]].gpr.predict_mean(q)(0), 1e-14);
        }
        EXPECT_EQ(t.variable[t.row_of_variable[c]], c);
        // Each component is x / 3 up to a constant.
        EXPECT_NEAR(t.values(c, 200) - t.values(c, 50), 150.0 / 250.0 / 3.0, 1e-3);
    }
}

TEST(BuildLookup, LayoutFollowsSelectionNotOrder) {
    const auto r = hdmr_train(gen_power(100, 23),
                              parse_matrices("[[0],[0],[1]]; [[1],[0],[0]]; [[0],[1],[0]]", 3),
                              kSyntheticKernel, kShort);
    const auto t = build_lookup(r.model, 10);
    EXPECT_EQ(t.row_of_variable, (std::vector<Eigen::Index>{1, 2, 0}));
    EXPECT_EQ(t.variable, (std::vector<Eigen::Index>{2, 0, 1}));
}

TEST(ResidualTarget, SubtractsKnownComponents) {
    const HdmrModel m = additive_model();
    Vector row(3);
    row << 0.2, kMissing, 0.55;
    const auto r = residual_target(m, row, 0.6);
    EXPECT_EQ(r.variable_index, 1);
    Matrix a(1, 1), b(1, 1);
    a(0, 0) = 0.2;
    b(0, 0) = 0.55;
    const double expected = 0.6 - m.components[0].gpr.predict_mean(a)(0) -
                            m.components[2].gpr.predict_mean(b)(0);
    EXPECT_NEAR(r.target_value, expected, 1e-14);
}

TEST(ResidualTarget, SingleVariableTargetIsY) {
    const auto m = hdmr_train(gen_additive(30, 1, 24), build_one_d(1), kSyntheticKernel, kShort).model;
    Vector row(1);
    row << kMissing;
    const auto r = residual_target(m, row, 0.37);
    EXPECT_EQ(r.variable_index, 0);
    EXPECT_EQ(r.target_value, 0.37);
}

TEST(ResidualTarget, Errors) {
    const HdmrModel m = additive_model();
    Vector full(3), two(3), shortrow(2);
    full << 0.1, 0.2, 0.3;
    two << kMissing, kMissing, 0.3;
    shortrow << kMissing, 0.1;
    EXPECT_THROW(residual_target(m, full, 0.5), InputError);
    EXPECT_THROW(residual_target(m, two, 0.5), InputError);
    EXPECT_THROW(residual_target(m, shortrow, 0.5), InputError);
    Vector one(3);
    one << kMissing, 0.2, 0.3;
    EXPECT_THROW(residual_target(m, one, kMissing), InputError);
}

TEST(Invert, IdentityComponent) {
    const auto t = analytic_table([](double x) { return x; }, 1000);
    const auto c = invert(t, 0, 0.42, ImputationPolicy{});
    ASSERT_EQ(c.candidates.size(), 1u);
    EXPECT_NEAR(c.chosen, 0.42, 1e-3);
    EXPECT_EQ(c.target_value, 0.42);
    const auto above = invert(t, 0, 5.0, ImputationPolicy{});
    EXPECT_EQ(above.chosen, 0.999);
    const auto below = invert(t, 0, -5.0, ImputationPolicy{});
    EXPECT_EQ(below.chosen, 0.0);
    EXPECT_THROW(invert(t, 1, 0.5, ImputationPolicy{}), InputError);
    EXPECT_THROW(invert(t, 0, std::nan(""), ImputationPolicy{}), InputError);
}

TEST(Invert, ParabolaHasTwoBranches) {
    const Fn f = [](double x) { return (x - 0.5) * (x - 0.5); };
    const auto t = analytic_table(f, 1000);
    const auto c = invert(t, 0, 0.04, ImputationPolicy{1e-4, 1000});
    bool lo = false, hi = false;
    for (double x : c.candidates) {
        lo = lo || std::abs(x - 0.3) <= 1e-3;
        hi = hi || std::abs(x - 0.7) <= 1e-3;
    }
    EXPECT_TRUE(lo);
    EXPECT_TRUE(hi);
}

TEST(Invert, QuarticHasFourBranches) {
    const Fn g = [](double x) { return quartic_component(x); };
    const auto t = analytic_table(g, 1000);
    const auto r = roots(g, 0.5);
    ASSERT_EQ(r.size(), 4u);
    const auto c = invert(t, 0, 0.5, ImputationPolicy{});
    EXPECT_EQ(c.candidates.size(), 4u);
    for (double root : r) {
        bool found = false;
        for (double x : c.candidates) found = found || std::abs(x - root) <= 1e-3;
        EXPECT_TRUE(found) << "root " << root;
    }
}

TEST(Invert, CandidatesSortedByDistanceThenAbscissa) {
    const Fn f = [](double x) { return (x - 0.5) * (x - 0.5); };
    const auto t = analytic_table(f, 100);
    const auto c = invert(t, 0, 0.01, ImputationPolicy{0.05, 100});
    ASSERT_GE(c.candidates.size(), 3u);
    for (std::size_t k = 1; k < c.candidates.size(); ++k) {
        const double da = std::abs(f(c.candidates[k - 1]) - 0.01);
        const double db = std::abs(f(c.candidates[k]) - 0.01);
        EXPECT_LE(da, db);
        if (da == db) EXPECT_LT(c.candidates[k - 1], c.candidates[k]);
    }
    EXPECT_EQ(c.chosen, c.candidates.front());
    // Symmetric grid points tie exactly; the smaller abscissa wins.
    const auto v = analytic_table([](double x) { return std::abs(x - 0.5); }, 8);
    const auto tie = invert(v, 0, 0.25, ImputationPolicy{});
    EXPECT_EQ(tie.candidates, (std::vector<double>{0.25, 0.75}));
}

TEST(Invert, LargeDeltaTakesWholeGrid) {
    const auto t = analytic_table([](double x) { return std::sin(7 * x); }, 50);
    EXPECT_EQ(invert(t, 0, 0.2, ImputationPolicy{10.0, 50}).candidates.size(), 50u);
}

TEST(Invert, MonotoneZeroDeltaGivesGlobalNearest) {
    const Fn f = [](double x) { return x * x * x + 0.1 * x; };
    const auto t = analytic_table(f, 500);
    Rng rng(31);
    for (int k = 0; k < 200; ++k) {
        const double target = -0.2 + 1.5 * rng.uniform();
        std::size_t best = 0;
        for (std::size_t j = 1; j < 500; ++j)
            if (std::abs(t.values(0, j) - target) < std::abs(t.values(0, best) - target)) best = j;
        const auto c = invert(t, 0, target, ImputationPolicy{});
        ASSERT_EQ(c.candidates.size(), 1u) << target;
        EXPECT_EQ(c.chosen, t.grid(best));
    }
}

TEST(Invert, Deterministic) {
    const auto t = analytic_table([](double x) { return quartic_component(x); }, 777);
    const auto a = invert(t, 0, 0.3, ImputationPolicy{0.01, 777});
    const auto b = invert(t, 0, 0.3, ImputationPolicy{0.01, 777});
    EXPECT_EQ(a.candidates, b.candidates);
    EXPECT_EQ(a.chosen, b.chosen);
}

TEST(Invert, EveryBranchIsRepresented) {
    const std::vector<Fn> fns = {
        [](double x) { return quartic_component(x); },
        [](double x) { return (x - 0.5) * (x - 0.5); },
        [](double x) { return std::sin(9.0 * x); },
    };
    Rng rng(32);
    for (const auto& f : fns) {
        for (int s : {50, 1000}) {
            const auto t = analytic_table(f, s);
            const double lo = t.values.minCoeff();
            const double hi = t.values.maxCoeff();
            for (int k = 0; k < 40; ++k) {
                const double target = lo + (hi - lo) * rng.uniform();
                const auto c = invert(t, 0, target, ImputationPolicy{0.0, s});
                for (double root : roots(f, target)) {
                    if (root >= t.grid(s - 1)) continue;  // beyond the last tabulated point
                    bool found = false;
                    for (double x : c.candidates) found = found || std::abs(x - root) <= 1.0 / s;
                    EXPECT_TRUE(found) << "s=" << s << " target=" << target << " root=" << root;
                }
            }
        }
    }
}

TEST(ImputeDataset, RejectsRowsWithSeveralHoles) {
    const HdmrModel m = additive_model();
    Dataset d = gen_additive(10, 3, 25);
    d.x(3, 0) = d.x(3, 2) = kMissing;
    d.x(7, 1) = d.x(7, 2) = kMissing;
    d.x(5, 1) = kMissing;
    try {
        impute_dataset(m, d, ImputationPolicy{});
        FAIL();
    } catch (const InputError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find(" 3"), std::string::npos);
        EXPECT_NE(msg.find(" 7"), std::string::npos);
        EXPECT_EQ(msg.find(" 5"), std::string::npos);
    }
    EXPECT_THROW(impute_dataset(m, gen_additive(5, 4, 1), ImputationPolicy{}), InputError);
}

TEST(ImputeDataset, NoHolesIsPassthrough) {
    const HdmrModel m = additive_model();
    const Dataset d = gen_additive(20, 3, 26);
    const auto r = impute_dataset(m, d, ImputationPolicy{});
    EXPECT_TRUE(r.sets.empty());
    EXPECT_TRUE(r.completed.x == d.x);
    EXPECT_TRUE(r.completed.y == d.y);
}

TEST(ImputeDataset, MatchesScalarPathAndTruth) {
    const HdmrModel m = additive_model();
    const auto inj = inject_missing(gen_additive(60, 3, 27), 15, 28);
    const auto r = impute_dataset(m, inj.data, ImputationPolicy{}, &inj.truth);
    ASSERT_EQ(r.sets.size(), 45u);
    const auto table = build_lookup(m, 1000);
    for (const auto& s : r.sets) {
        const auto rt = residual_target(m, inj.data.x.row(s.row_index).transpose(), inj.data.y(s.row_index));
        EXPECT_EQ(rt.variable_index, s.variable_index);
        EXPECT_NEAR(rt.target_value, s.target_value, 1e-12);
        EXPECT_NEAR(invert(table, rt.variable_index, rt.target_value, ImputationPolicy{}).chosen,
                    s.chosen, 1e-3);
        EXPECT_EQ(r.completed.x(s.row_index, s.variable_index), s.chosen);
    }
    for (Eigen::Index i = 0; i < inj.data.rows(); ++i)
        for (Eigen::Index v = 0; v < 3; ++v)
            if (!is_missing(inj.data.x(i, v))) EXPECT_EQ(r.completed.x(i, v), inj.data.x(i, v));
    EXPECT_EQ(r.completed.missing_count(), 0u);
    ASSERT_EQ(r.errors.size(), 3u);
    for (const auto& e : r.errors) {
        EXPECT_EQ(e.count, 15u);
        EXPECT_LE(e.rmse_chosen, 0.01);
        EXPECT_LE(e.rmse_best_candidate, e.rmse_chosen);
    }
}

TEST(ImputationErrors, HandOracle) {
    std::vector<CandidateSet> sets(2);
    sets[0] = {0, 0, 0.0, {0.3, 0.8}, 0.3};
    sets[1] = {4, 0, 0.0, {0.5}, 0.5};
    const std::vector<TruthRecord> truth = {{0, 0, 0.7}, {4, 0, 0.4}};
    const auto e = imputation_errors(sets, truth, 2);
    EXPECT_EQ(e[0].count, 2u);
    EXPECT_NEAR(e[0].rmse_chosen, std::sqrt((0.16 + 0.01) / 2), 1e-15);
    EXPECT_NEAR(e[0].rmse_best_candidate, std::sqrt((0.01 + 0.01) / 2), 1e-15);
    EXPECT_EQ(e[1].count, 0u);
    EXPECT_THROW(imputation_errors(sets, {{2, 1, 0.1}}, 2), InputError);
}

TEST(ImputeExperiment, FlatRegionsImputeWorse) {
    const auto r = power_impute_experiment(33, 150);
    double flat = 0.0, steep = 0.0;
    int n_flat = 0, n_steep = 0;
    for (const auto& t : r.truth) {
        if (t.column != 0) continue;
        const double chosen = r.imputation.completed.x(t.row, 0);
        if (t.value < 0.1) {
            flat += std::abs(chosen - t.value);
            ++n_flat;
        } else if (t.value > 0.3) {
            steep += std::abs(chosen - t.value);
            ++n_steep;
        }
    }
    ASSERT_GT(n_flat, 0);
    ASSERT_GT(n_steep, 0);
    EXPECT_GT(flat / n_flat, steep / n_steep);
}

}  // namespace
}  // namespace rshdmr
