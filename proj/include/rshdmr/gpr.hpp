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

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>

#include "rshdmr/error.hpp"

namespace rshdmr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Hyperparameters of the isotropic squared-exponential kernel with unit
/// signal variance. `noise_variance` is added to the kernel-matrix diagonal.
struct KernelParams {
    double length_scale = 0.6;
    double noise_variance = 1e-10;

    void validate() const {
        detail::require(std::isfinite(length_scale) && length_scale > 0.0,
                        "kernel length_scale must be > 0");
        detail::require(std::isfinite(noise_variance) && noise_variance >= 0.0,
                        "kernel noise_variance must be >= 0");
    }
};

/// Diagonal additions tried, in order, when the plain factorization fails.
inline constexpr std::array<double, 4> kJitterLadder{1e-12, 1e-10, 1e-8, 1e-6};

/// exp(-|a-b|^2 / (2 l^2)).
template <typename DerivedA, typename DerivedB>
double kernel_value(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                    const KernelParams& params) {
    detail::require(a.size() == b.size(), "kernel_value: dimension mismatch");
    double sq = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double d = a(k) - b(k);
        sq += d * d;
    }
    return std::exp(-sq / (2.0 * params.length_scale * params.length_scale));
}

/// Entry (i, j) is kernel_value(row i of x1, row j of x2).
inline Matrix kernel_matrix(const Matrix& x1, const Matrix& x2, const KernelParams& params) {
    detail::require(x1.cols() == x2.cols(), "kernel_matrix: column counts differ (" +
                                                std::to_string(x1.cols()) + " vs " +
                                                std::to_string(x2.cols()) + ")");
    Matrix k(x1.rows(), x2.rows());
    if (&x1 == &x2) {
        for (Eigen::Index j = 0; j < x2.rows(); ++j) {
            k(j, j) = 1.0;
            for (Eigen::Index i = j + 1; i < x1.rows(); ++i) {
                k(i, j) = kernel_value(x1.row(i), x2.row(j), params);
                k(j, i) = k(i, j);
            }
        }
        return k;
    }
    for (Eigen::Index j = 0; j < x2.rows(); ++j)
        for (Eigen::Index i = 0; i < x1.rows(); ++i)
            k(i, j) = kernel_value(x1.row(i), x2.row(j), params);
    return k;
}

/// Exact Gaussian process regression with zero prior mean.
///
/// A fitted model is immutable. The Cholesky factor of K + (noise + jitter) I
/// is held behind a shared pointer so that refitting the same inputs against
/// new targets (the inner step of every HDMR cycle) reuses it.
class GprModel {
public:
    /// Factorizes the training kernel matrix, escalating jitter on failure,
    /// and solves for the weights.
    static GprModel fit(Matrix train_inputs, const Vector& targets, const KernelParams& params) {
        params.validate();
        detail::require(train_inputs.rows() >= 1, "gpr_fit: need at least one training row");
        detail::require(train_inputs.cols() >= 1, "gpr_fit: need at least one input column");
        detail::require(targets.size() == train_inputs.rows(),
                        "gpr_fit: target length does not match training rows");
        detail::require(train_inputs.allFinite(), "gpr_fit: training inputs must be finite");

        auto factor = std::make_shared<Factor>();
        factor->inputs = std::move(train_inputs);
        factor->params = params;
        const Matrix k = kernel_matrix(factor->inputs, factor->inputs, params);

        if (!try_factor(*factor, k, 0.0)) {
            bool ok = false;
            for (double jitter : kJitterLadder) {
                if (try_factor(*factor, k, jitter)) {
                    ok = true;
                    break;
                }
            }
            if (!ok) {
                std::ostringstream msg;
                msg << "gpr_fit: Cholesky factorization failed for " << k.rows()
                    << " points after jitter " << kJitterLadder.back();
                throw ConditioningError(msg.str(), kJitterLadder.back());
            }
        }
        GprModel model(std::move(factor));
        model.set_targets(targets);
        return model;
    }

    /// Rebuilds a model from stored parts, replaying the recorded jitter.
    static GprModel restore(Matrix train_inputs, const KernelParams& params, double jitter,
                            Vector weights) {
        params.validate();
        detail::require(train_inputs.rows() >= 1 && weights.size() == train_inputs.rows(),
                        "gpr restore: weights do not match training rows");
        auto factor = std::make_shared<Factor>();
        factor->inputs = std::move(train_inputs);
        factor->params = params;
        const Matrix k = kernel_matrix(factor->inputs, factor->inputs, params);
        if (!try_factor(*factor, k, jitter))
            throw ConditioningError("gpr restore: stored jitter no longer factorizes", jitter);
        GprModel model(std::move(factor));
        model.weights_ = std::move(weights);
        return model;
    }

    /// Same inputs and factorization, new targets.
    GprModel refit(const Vector& targets) const {
        GprModel model(factor_);
        model.set_targets(targets);
        return model;
    }

    Vector predict_mean(const Matrix& queries) const {
        check_queries(queries);
        Vector out(queries.rows());
        for_each_block(queries, [&](Eigen::Index start, const Matrix& ks) {
            out.segment(start, ks.rows()).noalias() = ks * weights_;
        });
        return out;
    }

    /// Diagonal of K** - K* K^-1 K*^T via triangular solves, clamped at 0.
    Vector predict_variance(const Matrix& queries) const {
        check_queries(queries);
        Vector out(queries.rows());
        for_each_block(queries, [&](Eigen::Index start, const Matrix& ks) {
            Matrix v = ks.transpose();
            factor_->llt.matrixL().solveInPlace(v);
            const Vector reduction = v.colwise().squaredNorm().transpose();
            for (Eigen::Index i = 0; i < ks.rows(); ++i)
                out(start + i) = std::max(0.0, 1.0 - reduction(i));
        });
        return out;
    }

    const Matrix& train_inputs() const noexcept { return factor_->inputs; }
    const KernelParams& kernel() const noexcept { return factor_->params; }
    double jitter() const noexcept { return factor_->jitter; }
    const Vector& weights() const noexcept { return weights_; }
    Matrix chol_factor() const { return factor_->llt.matrixL(); }
    Eigen::Index input_dim() const noexcept { return factor_->inputs.cols(); }
    Eigen::Index size() const noexcept { return factor_->inputs.rows(); }

private:
    struct Factor {
        Matrix inputs;
        KernelParams params;
        double jitter = 0.0;
        Eigen::LLT<Matrix> llt;
    };

    explicit GprModel(std::shared_ptr<const Factor> factor) : factor_(std::move(factor)) {}

    static bool try_factor(Factor& f, const Matrix& k, double jitter) {
        Matrix a = k;
        a.diagonal().array() += f.params.noise_variance + jitter;
        f.llt.compute(a);
        if (f.llt.info() != Eigen::Success) return false;
        const auto& l = f.llt.matrixLLT();
        for (Eigen::Index i = 0; i < l.rows(); ++i)
            if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return false;
        f.jitter = jitter;
        return true;
    }

    void set_targets(const Vector& targets) {
        detail::require(targets.size() == factor_->inputs.rows(),
                        "gpr_fit: target length does not match training rows");
        if (!targets.allFinite()) throw NumericalError("gpr_fit: non-finite training targets");
        weights_ = factor_->llt.solve(targets);
    }

    void check_queries(const Matrix& queries) const {
        detail::require(queries.cols() == factor_->inputs.cols(),
                        "gpr predict: query has " + std::to_string(queries.cols()) +
                            " columns, model expects " + std::to_string(factor_->inputs.cols()));
    }

    template <typename Fn>
    void for_each_block(const Matrix& queries, Fn&& fn) const {
        constexpr Eigen::Index kBlock = 512;
        for (Eigen::Index start = 0; start < queries.rows(); start += kBlock) {
            const Eigen::Index len = std::min(kBlock, queries.rows() - start);
            const Matrix block = queries.middleRows(start, len);
            fn(start, kernel_matrix(block, factor_->inputs, factor_->params));
        }
    }

    std::shared_ptr<const Factor> factor_;
    Vector weights_;
};

}  // namespace rshdmr
