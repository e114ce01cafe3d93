#pragma once

#include <utility>
#include <vector>

#include "crlr/dataset.hpp"

namespace crlr {

/// Trade-off parameters of the joint objective:
///   lambda1  confounder balancing
///   lambda2  ||W||_2^2 (weight variance)
///   lambda3  ||beta||_2^2 (ridge)
///   lambda4  ||beta||_1 (lasso)
///   lambda5  (sum W - 1)^2 (weight-sum anchor)
struct Hyperparams {
    double lambda1 = 1.0;
    double lambda2 = 0.1;
    double lambda3 = 0.01;
    double lambda4 = 0.001;
    double lambda5 = 1.0;
    double denom_epsilon = 1e-12;  // floor for balancing denominators

    void validate() const;
};

struct TracePoint {
    int iteration = 0;
    double objective = 0.0;
};

/// Coefficients beta plus the sample-weight root omega; W = omega .* omega
/// keeps the weights nonnegative by construction.
struct ModelState {
    Vector beta;
    Vector omega;
    std::vector<TracePoint> objective_trace;

    Vector weights() const { return omega.cwiseProduct(omega); }
};

struct BalanceReport {
    Vector per_feature_loss;    // squared-norm imbalance per treatment feature
    std::vector<bool> skipped;  // degenerate features excluded from the sum
    double total = 0.0;
};

struct ObjectiveBreakdown {
    double logistic = 0.0;
    double balance = 0.0;     // lambda1 * balancing total
    double w_norm = 0.0;      // lambda2 * ||W||^2
    double beta_ridge = 0.0;  // lambda3 * ||beta||^2
    double beta_lasso = 0.0;  // lambda4 * ||beta||_1
    double w_sum = 0.0;       // lambda5 * (sum W - 1)^2
    double total = 0.0;
};

/// Evaluation policy for the feature-parallel sums. threads <= 1 runs the
/// serial fixed-order reference; anything larger uses the OpenMP kernel.
struct ExecPolicy {
    int threads = 1;
};

// sum_i W_i * softplus((1-2Y_i) * x_i beta); stable for |x_i beta| up to 1e4.
double weighted_logistic_loss(const Matrix& features, const Vector& labels, const Vector& beta,
                              const Vector& weights);

BalanceReport balancing_loss(const Matrix& features, const IndicatorMatrix& indicator,
                             const Vector& weights, double denom_epsilon,
                             const ExecPolicy& policy = {});

ObjectiveBreakdown objective(const Matrix& features, const Vector& labels,
                             const IndicatorMatrix& indicator, const Vector& beta,
                             const Vector& omega, const Hyperparams& hyper,
                             const ExecPolicy& policy = {});

// Gradient of the smooth part of the beta subproblem:
//   sum_i W_i (1-2Y_i) sigma((1-2Y_i) x_i beta) x_i + 2 lambda3 beta
Vector grad_smooth_beta(const Matrix& features, const Vector& labels, const Vector& beta,
                        const Vector& weights, double lambda3);

// Exact gradient of the omega-parameterized objective (logistic + balancing
// + lambda2 + lambda5 terms; the beta penalties are constant in omega).
Vector grad_omega(const Matrix& features, const Vector& labels, const IndicatorMatrix& indicator,
                  const Vector& beta, const Vector& omega, const Hyperparams& hyper,
                  const ExecPolicy& policy = {});

}  // namespace crlr
