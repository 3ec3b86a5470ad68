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

#include <stdexcept>
#include <string>
#include <string_view>

namespace rshdmr {

/// Malformed arguments: dimension mismatches, out-of-range parameters,
/// unparseable files.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cholesky factorization failed even after the largest jitter step.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, double last_jitter)
        : std::runtime_error(what), last_jitter_(last_jitter) {}

    double last_jitter() const noexcept { return last_jitter_; }

private:
    double last_jitter_;
};

/// Non-finite intermediate values during training or imputation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InputError(msg);
}

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail
}  // namespace rshdmr
