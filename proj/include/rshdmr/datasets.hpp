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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rshdmr/error.hpp"
#include "rshdmr/gpr.hpp"
#include "rshdmr/random.hpp"

namespace rshdmr {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Per-column affine maps to [0, 1] for the features and the target.
struct Scaler {
    Vector feature_min;
    Vector feature_max;
    double target_min = 0.0;
    double target_max = 1.0;

    Eigen::Index dim() const noexcept { return feature_min.size(); }
    double feature_range(Eigen::Index col) const { return feature_max(col) - feature_min(col); }
    double target_range() const noexcept { return target_max - target_min; }

    void validate() const {
        detail::require(feature_min.size() == feature_max.size(), "scaler: size mismatch");
        for (Eigen::Index c = 0; c < dim(); ++c)
            detail::require(feature_max(c) > feature_min(c),
                            "scaler: column " + std::to_string(c + 1) + " is constant");
        detail::require(target_max > target_min, "scaler: target column is constant");
    }

    /// Missing entries stay missing.
    Matrix scale_features(const Matrix& raw) const {
        detail::require(raw.cols() == dim(), "scaler: feature column count mismatch");
        Matrix out(raw.rows(), raw.cols());
        for (Eigen::Index c = 0; c < raw.cols(); ++c)
            for (Eigen::Index r = 0; r < raw.rows(); ++r)
                out(r, c) = (raw(r, c) - feature_min(c)) / feature_range(c);
        return out;
    }

    double unscale_feature(double v, Eigen::Index col) const {
        return feature_min(col) + v * feature_range(col);
    }

    Vector scale_target(const Vector& raw) const {
        return ((raw.array() - target_min) / target_range()).matrix();
    }

    Vector unscale_target(const Vector& v) const {
        return (target_min + v.array() * target_range()).matrix();
    }
};

/// M x D inputs (NaN marks a missing entry), M targets, optional scaling.
struct Dataset {
    std::vector<std::string> column_names;  // D feature names, then the target name
    Matrix x;
    Vector y;
    std::optional<Scaler> scaler;

    Eigen::Index rows() const noexcept { return x.rows(); }
    Eigen::Index dim() const noexcept { return x.cols(); }

    std::size_t missing_count() const {
        return static_cast<std::size_t>(x.array().isNaN().count());
    }

    std::vector<Eigen::Index> complete_rows() const {
        std::vector<Eigen::Index> out;
        for (Eigen::Index r = 0; r < rows(); ++r)
            if (!x.row(r).array().isNaN().any()) out.push_back(r);
        return out;
    }

    Dataset take_rows(const std::vector<Eigen::Index>& idx) const {
        Dataset out;
        out.column_names = column_names;
        out.scaler = scaler;
        out.x.resize(static_cast<Eigen::Index>(idx.size()), dim());
        out.y.resize(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            detail::require(idx[i] >= 0 && idx[i] < rows(), "take_rows: index out of range");
            out.x.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
            out.y(static_cast<Eigen::Index>(i)) = y(idx[i]);
        }
        return out;
    }

    void validate() const {
        detail::require(y.size() == x.rows(), "dataset: target length does not match rows");
        detail::require(!y.array().isNaN().any(), "dataset: target values must all be present");
        detail::require(column_names.empty() ||
                            column_names.size() == static_cast<std::size_t>(dim() + 1),
                        "dataset: column name count must be D + 1");
    }
};

inline std::vector<std::string> default_column_names(Eigen::Index dim) {
    std::vector<std::string> names;
    for (Eigen::Index c = 0; c < dim; ++c) names.push_back("x" + std::to_string(c + 1));
    names.push_back("y");
    return names;
}

/// Fits a min-max scaler on the non-missing values and applies it.
inline Dataset minmax_scale(const Dataset& data) {
    data.validate();
    detail::require(data.rows() >= 1, "minmax_scale: empty dataset");
    Scaler s;
    s.feature_min.resize(data.dim());
    s.feature_max.resize(data.dim());
    for (Eigen::Index c = 0; c < data.dim(); ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (Eigen::Index r = 0; r < data.rows(); ++r) {
            const double v = data.x(r, c);
            if (is_missing(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo))
            throw InputError("minmax_scale: column '" +
                             (data.column_names.empty() ? std::to_string(c + 1)
                                                        : data.column_names[c]) +
                             "' is constant or empty");
        s.feature_min(c) = lo;
        s.feature_max(c) = hi;
    }
    s.target_min = data.y.minCoeff();
    s.target_max = data.y.maxCoeff();
    if (!(s.target_max > s.target_min)) throw InputError("minmax_scale: target column is constant");

    Dataset out;
    out.column_names = data.column_names;
    out.x = s.scale_features(data.x);
    out.y = s.scale_target(data.y);
    out.scaler = std::move(s);
    return out;
}

/// Maps scaled values of one column back to raw units. Column D is the target.
inline Vector unscale(const Vector& values, const Scaler& scaler, Eigen::Index column) {
    detail::require(column >= 0 && column <= scaler.dim(), "unscale: column out of range");
    if (column == scaler.dim()) return scaler.unscale_target(values);
    Vector out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i)
        out(i) = scaler.unscale_feature(values(i), column);
    return out;
}

namespace detail {

inline Scaler unit_feature_scaler(Eigen::Index dim, double target_min, double target_max) {
    Scaler s;
    s.feature_min = Vector::Zero(dim);
    s.feature_max = Vector::Ones(dim);
    s.target_min = target_min;
    s.target_max = target_max;
    return s;
}

/// Uniform features on [0,1)^d, y = f(row) divided by the analytic maximum.
template <typename F>
Dataset generate(Eigen::Index n, Eigen::Index dim, std::uint64_t seed, double target_max, F f) {
    require(n >= 1, "generator: n must be >= 1");
    require(dim >= 1, "generator: dimension must be >= 1");
    Rng rng(seed);
    Dataset d;
    d.column_names = default_column_names(dim);
    d.x.resize(n, dim);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) d.x(r, c) = rng.uniform();
    d.y.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) d.y(r) = f(d.x.row(r)) / target_max;
    d.scaler = unit_feature_scaler(dim, 0.0, target_max);
    return d;
}

}  // namespace detail

/// f = x1 + ... + xd.
inline Dataset gen_additive(Eigen::Index n, Eigen::Index dim, std::uint64_t seed) {
    return detail::generate(n, dim, seed, static_cast<double>(dim),
                            [](const auto& row) { return row.sum(); });
}

/// f = x^3 + y + z^5.
inline double power_function(double x, double y, double z) {
    return x * x * x + y + z * z * z * z * z;
}

inline Dataset gen_power(Eigen::Index n, std::uint64_t seed) {
    return detail::generate(n, 3, seed, 3.0, [](const auto& row) {
        return power_function(row(0), row(1), row(2));
    });
}

/// f = x + 0.2 x y + y + z.
inline double coupled_function(double x, double y, double z) { return x + 0.2 * x * y + y + z; }

inline Dataset gen_coupled(Eigen::Index n, std::uint64_t seed) {
    return detail::generate(n, 3, seed, 3.2, [](const auto& row) {
        return coupled_function(row(0), row(1), row(2));
    });
}

/// g(x) = 0.5((3.5(x-0.5))^4 - (5.5(x-0.5))^2 + 1.6), multivalued on [0,1].
inline double quartic_component(double x) {
    const double a = 3.5 * (x - 0.5);
    const double b = 5.5 * (x - 0.5);
    return 0.5 * (a * a * a * a - b * b + 1.6);
}

/// Analytic maximum of g + y + z on [0,1]^3, attained at x = 0 or 1.
inline double quartic_target_max() { return quartic_component(0.0) + 2.0; }

inline Dataset gen_quartic(Eigen::Index n, std::uint64_t seed) {
    return detail::generate(n, 3, seed, quartic_target_max(), [](const auto& row) {
        return quartic_component(row(0)) + row(1) + row(2);
    });
}

/// Three features, each column holding `n_normal` draws from N(0.1, 0.01)
/// clipped to [0,1) followed by `n_uniform` draws from U[0,1); additive target.
inline Dataset gen_uneven(Eigen::Index n_normal, Eigen::Index n_uniform, std::uint64_t seed) {
    constexpr Eigen::Index kDim = 3;
    detail::require(n_normal >= 0 && n_uniform >= 0 && n_normal + n_uniform >= 1,
                    "gen_uneven: need at least one row");
    const double below_one = std::nextafter(1.0, 0.0);
    Rng rng(seed);
    Dataset d;
    d.column_names = default_column_names(kDim);
    d.x.resize(n_normal + n_uniform, kDim);
    for (Eigen::Index c = 0; c < kDim; ++c) {
        for (Eigen::Index r = 0; r < n_normal; ++r)
            d.x(r, c) = std::clamp(rng.normal(0.1, 0.01), 0.0, below_one);
        for (Eigen::Index r = n_normal; r < n_normal + n_uniform; ++r) d.x(r, c) = rng.uniform();
    }
    d.y = d.x.rowwise().sum() / static_cast<double>(kDim);
    d.scaler = detail::unit_feature_scaler(kDim, 0.0, static_cast<double>(kDim));
    return d;
}

/// Gaussian noise on the target. `sigma` is in raw target units when the
/// dataset carries a scaler, otherwise in the units of `y`.
inline Dataset add_noise(const Dataset& data, double sigma, std::uint64_t seed) {
    detail::require(std::isfinite(sigma) && sigma >= 0.0, "add_noise: sigma must be >= 0");
    Dataset out = data;
    if (sigma == 0.0) return out;
    const double s = data.scaler ? sigma / data.scaler->target_range() : sigma;
    Rng rng(seed);
    for (Eigen::Index r = 0; r < out.rows(); ++r) out.y(r) += rng.normal(0.0, s);
    return out;
}

/// One withheld value.
struct TruthRecord {
    Eigen::Index row = 0;
    Eigen::Index column = 0;
    double value = 0.0;
};

struct MissingInjection {
    Dataset data;
    std::vector<TruthRecord> truth;  // sorted by row
};

/// Removes `counts[c]` values from column c, at most one per row, choosing
/// rows at random among the currently complete ones.
inline MissingInjection inject_missing(const Dataset& data, const std::vector<std::size_t>& counts,
                                       std::uint64_t seed) {
    data.validate();
    detail::require(counts.size() == static_cast<std::size_t>(data.dim()),
                    "inject_missing: need one count per column");
    std::size_t total = 0;
    for (auto c : counts) total += c;
    const auto candidates = data.complete_rows();
    if (total > candidates.size())
        throw InputError("inject_missing: " + std::to_string(total) + " holes requested but only " +
                         std::to_string(candidates.size()) + " complete rows available");
    MissingInjection out{data, {}};
    if (total == 0) return out;
    Rng rng(seed);
    const auto perm = rng.permutation(candidates.size());
    std::size_t next = 0;
    for (std::size_t col = 0; col < counts.size(); ++col) {
        for (std::size_t k = 0; k < counts[col]; ++k) {
            const Eigen::Index row = candidates[perm[next++]];
            const auto c = static_cast<Eigen::Index>(col);
            out.truth.push_back({row, c, out.data.x(row, c)});
            out.data.x(row, c) = kMissing;
        }
    }
    std::sort(out.truth.begin(), out.truth.end(),
              [](const TruthRecord& a, const TruthRecord& b) { return a.row < b.row; });
    return out;
}

/// Same count for every column.
inline MissingInjection inject_missing(const Dataset& data, std::size_t per_column_count,
                                       std::uint64_t seed) {
    return inject_missing(data, std::vector<std::size_t>(static_cast<std::size_t>(data.dim()),
                                                         per_column_count),
                          seed);
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(trim(cur));
    for (auto& f : fields)
        if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    return fields;
}

inline bool is_missing_token(const std::string& s) {
    if (s.empty()) return true;
    if (s.size() != 3) return false;
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return lower == "nan";
}

inline double parse_double(const std::string& s, bool& ok) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    ok = ec == std::errc() && ptr == s.data() + s.size() && ptr != first;
    return v;
}

}  // namespace detail

/// Comma-delimited, header row, target in the last column; empty fields and
/// `nan` (any case) mark missing features.
inline Dataset read_csv(std::istream& in, const std::string& source = "<csv>") {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) {
            header = detail::split_csv_line(line);
            break;
        }
    }
    if (header.size() < 2)
        throw InputError(source + ": header must name at least one feature and the target");

    const std::size_t ncol = header.size();
    std::vector<double> values;
    std::size_t nrows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != ncol)
            throw InputError(source + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(ncol));
        for (std::size_t c = 0; c < ncol; ++c) {
            const auto& f = fields[c];
            double v = kMissing;
            if (!detail::is_missing_token(f)) {
                bool ok = false;
                v = detail::parse_double(f, ok);
                if (!ok)
                    throw InputError(source + ": line " + std::to_string(line_no) + ", column '" +
                                     header[c] + "': not a number: '" + f + "'");
            } else if (c + 1 == ncol) {
                throw InputError(source + ": line " + std::to_string(line_no) +
                                 ": target value is missing");
            }
            values.push_back(v);
        }
        ++nrows;
    }

    Dataset d;
    d.column_names = header;
    const auto dim = static_cast<Eigen::Index>(ncol - 1);
    d.x.resize(static_cast<Eigen::Index>(nrows), dim);
    d.y.resize(static_cast<Eigen::Index>(nrows));
    for (std::size_t r = 0; r < nrows; ++r) {
        for (std::size_t c = 0; c + 1 < ncol; ++c)
            d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * ncol + c];
        d.y(static_cast<Eigen::Index>(r)) = values[r * ncol + ncol - 1];
    }
    return d;
}

inline Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_csv(in, path);
}

/// Shortest round-trip decimal for every value; missing cells are empty.
inline void write_csv(const Dataset& data, std::ostream& out) {
    const auto names =
        data.column_names.empty() ? default_column_names(data.dim()) : data.column_names;
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << '\n';
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.dim(); ++c) {
            const double v = data.x(r, c);
            if (!is_missing(v)) out << detail::format_double(v);
            out << ',';
        }
        out << detail::format_double(data.y(r)) << '\n';
    }
}

inline void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_csv(data, out);
}

inline void write_truth(const std::vector<TruthRecord>& truth, std::ostream& out) {
    out << "row,column,true_value\n";
    for (const auto& t : truth)
        out << t.row << ',' << t.column << ',' << detail::format_double(t.value) << '\n';
}

inline std::vector<TruthRecord> read_truth(std::istream& in, const std::string& source = "<truth>") {
    std::string line;
    std::vector<TruthRecord> out;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto f = detail::split_csv_line(line);
        bool ok_r = false, ok_c = false, ok_v = false;
        const double r = f.size() == 3 ? detail::parse_double(f[0], ok_r) : 0.0;
        const double c = f.size() == 3 ? detail::parse_double(f[1], ok_c) : 0.0;
        const double v = f.size() == 3 ? detail::parse_double(f[2], ok_v) : 0.0;
        if (!(ok_r && ok_c && ok_v) || r < 0 || c < 0)
            throw InputError(source + ": malformed truth record on line " +
                             std::to_string(line_no));
        out.push_back({static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), v});
    }
    return out;
}

}  // namespace rshdmr
