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
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rshdmr/error.hpp"
#include "rshdmr/gpr.hpp"

namespace rshdmr {

/// D x d' matrix selecting (or linearly combining) the inputs of one
/// component function: the component sees X * A.
class SelectionMatrix {
public:
    SelectionMatrix(Matrix entries, std::string label = {})
        : entries_(std::move(entries)), label_(std::move(label)) {
        detail::require(entries_.rows() >= 1, "selection matrix must have at least one row");
        detail::require(entries_.cols() >= 1 && entries_.cols() <= entries_.rows(),
                        "selection matrix must have between 1 and D columns");
        detail::require(entries_.allFinite(), "selection matrix entries must be finite");
        for (Eigen::Index j = 0; j < entries_.cols(); ++j)
            detail::require(!entries_.col(j).isZero(0.0),
                            "selection matrix column " + std::to_string(j + 1) + " is all zero");
        if (label_.empty()) label_ = describe(entries_);
    }

    const Matrix& entries() const noexcept { return entries_; }
    const std::string& label() const noexcept { return label_; }
    Eigen::Index input_dim() const noexcept { return entries_.rows(); }
    Eigen::Index output_dim() const noexcept { return entries_.cols(); }

    /// Index of the single unit entry of column `col`, or -1 if the column is
    /// not a standard basis vector.
    Eigen::Index basis_index(Eigen::Index col) const {
        Eigen::Index hit = -1;
        for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
            const double v = entries_(r, col);
            if (v == 0.0) continue;
            if (v != 1.0 || hit >= 0) return -1;
            hit = r;
        }
        return hit;
    }

    /// True when the matrix is one basis column, i.e. a first-order component.
    bool is_first_order() const { return output_dim() == 1 && basis_index(0) >= 0; }

    /// "x1", "x1|x2", "x1|x2+x3", "2*x1-x3", ...
    static std::string describe(const Matrix& a) {
        std::ostringstream os;
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j) os << '|';
            bool first = true;
            for (Eigen::Index r = 0; r < a.rows(); ++r) {
                const double v = a(r, j);
                if (v == 0.0) continue;
                if (!first || v < 0.0) os << (v < 0.0 ? "-" : "+");
                if (std::abs(v) != 1.0) os << std::abs(v) << '*';
                os << 'x' << (r + 1);
                first = false;
            }
        }
        return os.str();
    }

    friend bool operator==(const SelectionMatrix& a, const SelectionMatrix& b) {
        return a.entries_.rows() == b.entries_.rows() && a.entries_.cols() == b.entries_.cols() &&
               a.entries_ == b.entries_;
    }

private:
    Matrix entries_;
    std::string label_;
};

using SelectionList = std::vector<SelectionMatrix>;

/// X * A. Unit basis columns are copied rather than multiplied.
inline Matrix project(const Matrix& x, const SelectionMatrix& a) {
    detail::require(x.cols() == a.input_dim(),
                    "project: data has " + std::to_string(x.cols()) +
                        " columns but selection matrix '" + a.label() + "' has " +
                        std::to_string(a.input_dim()) + " rows");
    Matrix out(x.rows(), a.output_dim());
    for (Eigen::Index j = 0; j < a.output_dim(); ++j) {
        const Eigen::Index b = a.basis_index(j);
        if (b >= 0)
            out.col(j) = x.col(b);
        else
            out.col(j).noalias() = x * a.entries().col(j);
    }
    return out;
}

namespace detail {

inline void for_each_combination(int n, int k, std::vector<int>& current, int start,
                                 std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == k) {
        out.push_back(current);
        return;
    }
    for (int i = start; i < n; ++i) {
        current.push_back(i);
        for_each_combination(n, k, current, i + 1, out);
        current.pop_back();
    }
}

inline SelectionMatrix basis_columns(int dim, const std::vector<int>& cols) {
    Matrix a = Matrix::Zero(dim, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) a(cols[j], static_cast<Eigen::Index>(j)) = 1.0;
    return SelectionMatrix(std::move(a));
}

}  // namespace detail

/// All order-`order` subsets of the D variables, lexicographic.
inline SelectionList build_order(int dim, int order) {
    detail::require(dim >= 1, "dimension must be >= 1");
    detail::require(order >= 1 && order <= dim,
                    "component order " + std::to_string(order) + " must lie in [1, " +
                        std::to_string(dim) + "]");
    std::vector<std::vector<int>> combos;
    std::vector<int> current;
    detail::for_each_combination(dim, order, current, 0, combos);
    SelectionList out;
    out.reserve(combos.size());
    for (const auto& c : combos) out.push_back(detail::basis_columns(dim, c));
    return out;
}

inline SelectionList build_one_d(int dim) { return build_order(dim, 1); }

inline SelectionList build_all_pairs(int dim) {
    detail::require(dim >= 2, "all-pairs family needs D >= 2");
    return build_order(dim, 2);
}

/// Per-order families concatenated in ascending order.
inline SelectionList build_mixed(int dim, const std::set<int>& orders) {
    detail::require(!orders.empty(), "mixed family needs at least one order");
    SelectionList out;
    for (int o : orders) {
        auto fam = build_order(dim, o);
        out.insert(out.end(), fam.begin(), fam.end());
    }
    return out;
}

inline SelectionList build_full(int dim) { return build_order(dim, dim); }

namespace detail {

class MatrixTextParser {
public:
    explicit MatrixTextParser(std::string_view text) : text_(text) {}

    SelectionList parse_list(int dim) {
        SelectionList out;
        skip_ws();
        while (true) {
            const std::size_t index = out.size() + 1;
            Matrix m = parse_matrix(index);
            if (m.rows() != dim)
                fail("matrix " + std::to_string(index) + " has " + std::to_string(m.rows()) +
                     " rows, expected D = " + std::to_string(dim));
            try {
                out.emplace_back(std::move(m));
            } catch (const InputError& e) {
                fail("matrix " + std::to_string(index) + ": " + e.what());
            }
            skip_ws();
            if (pos_ == text_.size()) break;
            expect(';');
            skip_ws();
            if (pos_ == text_.size()) break;
        }
        return out;
    }

private:
    Matrix parse_matrix(std::size_t index) {
        expect('[');
        std::vector<std::vector<double>> rows;
        while (true) {
            skip_ws();
            rows.push_back(parse_row());
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            expect(']');
            break;
        }
        const std::size_t cols = rows.front().size();
        for (const auto& r : rows)
            if (r.size() != cols) fail("matrix " + std::to_string(index) + " has ragged rows");
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols; ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        return m;
    }

    std::vector<double> parse_row() {
        expect('[');
        std::vector<double> row;
        while (true) {
            skip_ws();
            row.push_back(parse_number());
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            expect(']');
            break;
        }
        return row;
    }

    double parse_number() {
        std::size_t start = pos_;
        if (pos_ < text_.size() && text_[pos_] == '+') ++start, ++pos_;
        double v = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr == first) fail("expected a number");
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return v;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError("matrix spec: " + msg + " at offset " + std::to_string(pos_));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a builder keyword (`1d`, `2d`, `mixed:1,2`, `full`) or an explicit
/// `;`-separated list of bracketed matrices such as
/// `[[1,0],[0,1],[0,1]]; [[1,0],[1,0],[0,1]]`.
inline SelectionList parse_matrices(std::string_view spec_text, int dim) {
    detail::require(dim >= 1, "matrix spec: dimension must be >= 1");
    const std::string text = detail::trim(spec_text);
    detail::require(!text.empty(), "matrix spec: empty");
    std::string compact;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);

    if (compact == "1d") return build_one_d(dim);
    if (compact == "2d") return build_all_pairs(dim);
    if (compact == "full") return build_full(dim);
    if (compact.rfind("mixed:", 0) == 0) {
        std::set<int> orders;
        std::string_view rest(compact);
        rest.remove_prefix(6);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto tok = rest.substr(0, comma);
            int v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 1)
                throw InputError("matrix spec: bad order '" + std::string(tok) + "' in mixed:");
            if (v > dim)
                throw InputError("matrix spec: order " + std::to_string(v) + " exceeds D = " +
                                 std::to_string(dim));
            orders.insert(v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        return build_mixed(dim, orders);
    }
    if (compact.front() != '[')
        throw InputError("matrix spec: unknown builder '" + compact + "'");
    return detail::MatrixTextParser(text).parse_list(dim);
}

/// Inverse of parse_matrices for explicit lists; round-trips exactly.
inline std::string format_matrices(const SelectionList& list) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t m = 0; m < list.size(); ++m) {
        if (m) os << "; ";
        const Matrix& a = list[m].entries();
        os << '[';
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            if (r) os << ',';
            os << '[';
            for (Eigen::Index c = 0; c < a.cols(); ++c) {
                if (c) os << ',';
                os << a(r, c);
            }
            os << ']';
        }
        os << ']';
    }
    return os.str();
}

}  // namespace rshdmr
