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

#include "rshdmr/projection.hpp"
#include "rshdmr/random.hpp"

namespace rshdmr {
namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

Matrix random_data(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    return x;
}

TEST(SelectionMatrix, Invariants) {
    EXPECT_THROW(SelectionMatrix(mat({{1, 0}, {0, 0}})), InputError);    // zero column
    EXPECT_THROW(SelectionMatrix(mat({{1, 0, 0}, {0, 1, 0}})), InputError);  // d' > D
    EXPECT_THROW(SelectionMatrix(Matrix(0, 0)), InputError);
    EXPECT_NO_THROW(SelectionMatrix(mat({{1, 0}, {0, 1}, {0, 1}})));
}

TEST(SelectionMatrix, LabelsDescribeInputs) {
    EXPECT_EQ(SelectionMatrix(mat({{1}, {0}, {0}})).label(), "x1");
    EXPECT_EQ(SelectionMatrix(mat({{1, 0}, {0, 1}, {0, 1}})).label(), "x1|x2+x3");
    EXPECT_EQ(SelectionMatrix(mat({{2}, {0}, {-1}})).label(), "2*x1-x3");
    EXPECT_EQ(SelectionMatrix(mat({{1}, {0}}), "custom").label(), "custom");
}

TEST(Project, UnitColumnSelectsFeature) {
    const Matrix x = random_data(50, 3, 1);
    const Matrix p = project(x, SelectionMatrix(mat({{1}, {0}, {0}})));
    ASSERT_EQ(p.cols(), 1);
    EXPECT_TRUE(p.col(0) == x.col(0));
}

TEST(Project, IdentityIsExact) {
    const Matrix x = random_data(40, 5, 2);
    EXPECT_TRUE(project(x, build_full(5).front()) == x);
}

TEST(Project, LinearCombination) {
    const Matrix x = random_data(30, 3, 3);
    const Matrix p = project(x, SelectionMatrix(mat({{1, 0}, {0, 1}, {0, 1}})));
    EXPECT_TRUE(p.col(0) == x.col(0));
    EXPECT_TRUE(p.col(1).isApprox(x.col(1) + x.col(2), 1e-15));
}

TEST(Project, DimensionMismatchThrows) {
    EXPECT_THROW(project(random_data(5, 2, 4), build_one_d(3).front()), InputError);
}

TEST(Builders, OneD) {
    const auto three = build_one_d(3);
    ASSERT_EQ(three.size(), 3u);
    EXPECT_TRUE(three[0].entries() == mat({{1}, {0}, {0}}));
    EXPECT_TRUE(three[1].entries() == mat({{0}, {1}, {0}}));
    EXPECT_TRUE(three[2].entries() == mat({{0}, {0}, {1}}));
    const auto one = build_one_d(1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_TRUE(one[0].entries() == mat({{1}}));
    const auto fifteen = build_one_d(15);
    ASSERT_EQ(fifteen.size(), 15u);
    for (int i = 0; i < 15; ++i) EXPECT_EQ(fifteen[i].basis_index(0), i);
    EXPECT_THROW(build_one_d(0), InputError);
}

TEST(Builders, AllPairs) {
    const auto three = build_all_pairs(3);
    ASSERT_EQ(three.size(), 3u);
    EXPECT_TRUE(three[0].entries() == mat({{1, 0}, {0, 1}, {0, 0}}));
    EXPECT_TRUE(three[1].entries() == mat({{1, 0}, {0, 0}, {0, 1}}));
    EXPECT_TRUE(three[2].entries() == mat({{0, 0}, {1, 0}, {0, 1}}));
    const auto two = build_all_pairs(2);
    ASSERT_EQ(two.size(), 1u);
    EXPECT_TRUE(two[0].entries() == Matrix::Identity(2, 2));
    EXPECT_EQ(build_all_pairs(14).size(), 91u);
    EXPECT_THROW(build_all_pairs(1), InputError);
}

TEST(Builders, Mixed) {
    const auto six = build_mixed(3, {1, 2});
    ASSERT_EQ(six.size(), 6u);
    const auto one = build_one_d(3);
    const auto two = build_all_pairs(3);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(six[i], one[i]);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(six[3 + i], two[i]);

    const auto full = build_mixed(3, {3});
    ASSERT_EQ(full.size(), 1u);
    EXPECT_TRUE(full[0].entries() == Matrix::Identity(3, 3));
    EXPECT_EQ(build_mixed(4, {1, 2}).size(), 10u);
    EXPECT_THROW(build_mixed(3, {4}), InputError);
    EXPECT_THROW(build_mixed(3, {}), InputError);
}

TEST(Builders, FamilyEqualitiesAndInvariants) {
    for (int d = 2; d <= 7; ++d) {
        const auto a = build_mixed(d, {1});
        const auto b = build_one_d(d);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
        const auto c = build_mixed(d, {2});
        const auto e = build_all_pairs(d);
        ASSERT_EQ(c.size(), e.size());
        for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], e[i]);
        for (int o = 1; o <= d; ++o)
            for (const auto& m : build_order(d, o)) {
                EXPECT_EQ(m.input_dim(), d);
                EXPECT_EQ(m.output_dim(), o);
                for (Eigen::Index j = 0; j < m.output_dim(); ++j) EXPECT_GE(m.basis_index(j), 0);
            }
    }
}

TEST(ParseMatrices, Keywords) {
    const auto one = parse_matrices("1d", 3);
    ASSERT_EQ(one.size(), 3u);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(one[i], build_one_d(3)[i]);
    EXPECT_EQ(parse_matrices(" 2d ", 4).size(), 6u);
    EXPECT_EQ(parse_matrices("mixed: 1, 2", 3).size(), 6u);
    const auto full = parse_matrices("full", 5);
    ASSERT_EQ(full.size(), 1u);
    EXPECT_TRUE(full[0].entries() == Matrix::Identity(5, 5));
}

TEST(ParseMatrices, ExplicitLinearCombinations) {
    const auto list = parse_matrices(
        "[[1,0],[0,1],[0,1]];\n [[1, 0], [1, 0], [0, 1]] ; [[1,0],[0,1],[1,0]]", 3);
    ASSERT_EQ(list.size(), 3u);
    EXPECT_TRUE(list[0].entries() == mat({{1, 0}, {0, 1}, {0, 1}}));
    EXPECT_TRUE(list[1].entries() == mat({{1, 0}, {1, 0}, {0, 1}}));
    EXPECT_TRUE(list[2].entries() == mat({{1, 0}, {0, 1}, {1, 0}}));
    EXPECT_EQ(list[0].label(), "x1|x2+x3");
    EXPECT_EQ(parse_matrices("[[0.5],[-1.25e0],[+2]]", 3)[0].entries()(1, 0), -1.25);
}

TEST(ParseMatrices, FormatRoundTrip) {
    const auto list = parse_matrices("[[1,0],[0.1,1],[0,1]]; [[3],[0],[0]]", 3);
    const auto again = parse_matrices(format_matrices(list), 3);
    ASSERT_EQ(again.size(), list.size());
    for (std::size_t i = 0; i < list.size(); ++i) EXPECT_EQ(again[i], list[i]);
}

TEST(ParseMatrices, Errors) {
    EXPECT_THROW(parse_matrices("", 3), InputError);
    EXPECT_THROW(parse_matrices("3d", 3), InputError);
    EXPECT_THROW(parse_matrices("mixed:1,4", 3), InputError);
    EXPECT_THROW(parse_matrices("mixed:a", 3), InputError);
    EXPECT_THROW(parse_matrices("[[1],[0]]", 3), InputError);              // row count
    EXPECT_THROW(parse_matrices("[[1,0],[0]]", 2), InputError);            // ragged
    EXPECT_THROW(parse_matrices("[[1],[0],[0]]; [[0],[0],[0]]", 3), InputError);  // zero column
    EXPECT_THROW(parse_matrices("[[1],[x],[0]]", 3), InputError);
    try {
        parse_matrices("[[1],[0],[0]]; [[0],[0],[0]]", 3);
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("matrix 2"), std::string::npos) << e.what();
    }
}

}  // namespace
}  // namespace rshdmr
