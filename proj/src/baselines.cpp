#include "crlr/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crlr/errors.hpp"

namespace crlr {

Vector fit_logistic(const Dataset& dataset, double l1, double l2, const SolverConfig& config) {
    if (!(l1 >= 0.0) || !(l2 >= 0.0)) {
        throw validation_error("l1 and l2 penalties must be >= 0");
    }
    Hyperparams hyper;
    hyper.lambda1 = 0.0;
    hyper.lambda2 = 0.0;
    hyper.lambda3 = l2;
    hyper.lambda4 = l1;
    hyper.lambda5 = 0.0;
    SolverConfig cfg = config;
    cfg.update_omega = false;  // weights stay frozen at uniform 1/n
    return fit(dataset, hyper, cfg).state.beta;
}

SingleBalanceResult single_treatment_weights(const Matrix& X, Index treatment,
                                             const BalanceSolveConfig& config) {
    const Index n = X.rows();
    const Index p = X.cols();
    if (treatment < 0 || treatment >= p) {
        throw validation_error("treatment feature index out of range");
    }

    std::vector<Index> treated_rows;
    std::vector<Index> control_rows;
    for (Index i = 0; i < n; ++i) {
        if (X(i, treatment) == 1.0) {
            treated_rows.push_back(i);
        } else {
            control_rows.push_back(i);
        }
    }
    if (treated_rows.empty() || control_rows.empty()) {
        throw validation_error("treatment feature " + std::to_string(treatment) +
                               " is degenerate (empty treated or control group)");
    }

    // Confounder columns with the treatment coordinate zeroed.
    const Index m = static_cast<Index>(control_rows.size());
    Matrix A(p, m);  // columns are control-sample confounder vectors
    for (Index k = 0; k < m; ++k) {
        A.col(k) = X.row(control_rows[static_cast<std::size_t>(k)]).transpose();
        A(treatment, k) = 0.0;
    }
    Vector target = Vector::Zero(p);
    for (Index i : treated_rows) {
        target += X.row(i).transpose();
    }
    target /= static_cast<double>(treated_rows.size());
    target[treatment] = 0.0;

    SingleBalanceResult result;
    result.treatment_feature = treatment;
    result.control_rows = control_rows;
    result.weights = Vector::Constant(m, 1.0 / static_cast<double>(m));

    // Fixed step 1/L keeps projected gradient monotone; L from the small
    // p x p Gram matrix.
    const Matrix gram = A * A.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const double lmax = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 0.0);

    Vector resid = A * result.weights - target;
    result.objective_trace.push_back(resid.squaredNorm());
    if (lmax <= 0.0) {
        result.residual_imbalance = resid.squaredNorm();
        return result;
    }
    const double step = 1.0 / lmax;

    for (int it = 0; it < config.max_iters; ++it) {
        Vector grad = 2.0 * (A.transpose() * resid);
        double pg_sq = 0.0;
        for (Index k = 0; k < m; ++k) {
            const double g = result.weights[k] > 0.0 ? grad[k] : std::min(grad[k], 0.0);
            pg_sq += g * g;
        }
        if (std::sqrt(pg_sq) < config.grad_tol) {
            result.iterations = it;
            break;
        }
        result.weights = (result.weights - step * grad).cwiseMax(0.0);
        resid = A * result.weights - target;
        result.objective_trace.push_back(resid.squaredNorm());
        result.iterations = it + 1;
    }
    result.residual_imbalance = resid.squaredNorm();
    return result;
}

namespace {

double balanced_effect(const Matrix& X, const Vector& Y, Index j,
                       const BalanceSolveConfig& config, bool& valid) {
    const SingleBalanceResult bal = single_treatment_weights(X, j, config);
    double treated_sum = 0.0;
    Index treated_count = 0;
    for (Index i = 0; i < X.rows(); ++i) {
        if (X(i, j) == 1.0) {
            treated_sum += Y[i];
            ++treated_count;
        }
    }
    const double treated_mean = treated_sum / static_cast<double>(treated_count);

    const double wsum = bal.weights.sum();
    if (wsum <= 1e-12) {
        valid = false;  // balancing drove every control weight to zero
        return 0.0;
    }
    double control_weighted = 0.0;
    for (Index k = 0; k < bal.weights.size(); ++k) {
        control_weighted += bal.weights[k] * Y[bal.control_rows[static_cast<std::size_t>(k)]];
    }
    valid = true;
    return treated_mean - control_weighted / wsum;
}

}  // namespace

TwoStepResult two_step_fit(const Dataset& dataset, int top_k, double l1, double l2,
                           const SolverConfig& config, const BalanceSolveConfig& balance_config) {
    dataset.validate();
    const Index p = dataset.p();
    if (top_k < 1 || top_k > p) {
        throw validation_error("top_k must be in [1, p]");
    }

    const IndicatorMatrix indicator = indicator_from_features(dataset);
    TwoStepResult result;
    result.effects = Vector::Zero(p);
    result.effect_valid.assign(static_cast<std::size_t>(p), false);

    std::string deferred_error;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(config.threads, 1)) \
    if (config.threads > 1)
    for (Index j = 0; j < p; ++j) {
        if (indicator.degenerate[static_cast<std::size_t>(j)]) continue;
        try {
            bool valid = false;
            const double effect =
                balanced_effect(dataset.features, dataset.labels, j, balance_config, valid);
            result.effects[j] = effect;
            result.effect_valid[static_cast<std::size_t>(j)] = valid;
        } catch (const std::exception& e) {
#pragma omp critical
            deferred_error = e.what();
        }
    }
    if (!deferred_error.empty()) {
        throw numerical_error("two-step effect estimation failed: " + deferred_error);
    }

    // Rank by |effect| descending, index ascending on ties.
    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::abs(result.effects[a]) > std::abs(result.effects[b]);
    });
    result.selected.assign(order.begin(), order.begin() + top_k);
    std::sort(result.selected.begin(), result.selected.end());

    Dataset sub;
    sub.features.resize(dataset.n(), top_k);
    sub.labels = dataset.labels;
    for (Index k = 0; k < top_k; ++k) {
        sub.features.col(k) = dataset.features.col(result.selected[static_cast<std::size_t>(k)]);
        if (!dataset.feature_names.empty()) {
            sub.feature_names.push_back(
                dataset.feature_names[static_cast<std::size_t>(result.selected[static_cast<std::size_t>(k)])]);
        }
    }

    Vector sub_beta;
    if (top_k == 1) {
        // The solver requires p >= 2. An all-zero pad column never leaves
        // zero under the proximal updates, so the first coefficient matches
        // the 1-D fit.
        Dataset padded = sub;
        padded.features.conservativeResize(Eigen::NoChange, 2);
        padded.features.col(1).setZero();
        if (!padded.feature_names.empty()) padded.feature_names.push_back("__pad__");
        Vector padded_beta = fit_logistic(padded, l1, l2, config);
        sub_beta = padded_beta.head(1);
    } else {
        sub_beta = fit_logistic(sub, l1, l2, config);
    }

    result.coefficients = Vector::Zero(p);
    for (Index k = 0; k < top_k; ++k) {
        result.coefficients[result.selected[static_cast<std::size_t>(k)]] = sub_beta[k];
    }
    return result;
}

}  // namespace crlr
