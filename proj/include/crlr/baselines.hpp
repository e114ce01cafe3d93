#pragma once

#include <vector>

#include "crlr/dataset.hpp"
#include "crlr/solver.hpp"

namespace crlr {

/// Nonnegative weights over the control group that pull the weighted control
/// confounder sum toward the treated confounder mean for one treatment
/// feature.
struct SingleBalanceResult {
    Index treatment_feature = -1;
    std::vector<Index> control_rows;  // row indices the weights refer to
    Vector weights;                   // length control_rows.size(), >= 0
    double residual_imbalance = 0.0;  // objective value at the solution
    int iterations = 0;
    std::vector<double> objective_trace;
};

struct BalanceSolveConfig {
    int max_iters = 10000;
    double grad_tol = 1e-8;  // projected gradient norm stopping criterion
};

// Plain / elastic-net logistic regression: the joint solver with the
// balancing machinery off and the sample weights frozen uniform.
Vector fit_logistic(const Dataset& dataset, double l1, double l2, const SolverConfig& config);

SingleBalanceResult single_treatment_weights(const Matrix& features, Index treatment,
                                             const BalanceSolveConfig& config = {});

struct TwoStepResult {
    Vector coefficients;           // length p, zeros for unselected features
    std::vector<Index> selected;   // ascending feature indices
    Vector effects;                // per-feature balanced effect estimates
    std::vector<bool> effect_valid;  // false where the feature was degenerate
};

// Balance-then-regress baseline: per-feature causal effects from
// single-treatment balancing, top-k selection by absolute effect, then
// logistic regression on the selected features only.
TwoStepResult two_step_fit(const Dataset& dataset, int top_k, double l1, double l2,
                           const SolverConfig& config,
                           const BalanceSolveConfig& balance_config = {});

}  // namespace crlr
