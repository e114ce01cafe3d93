#include "crlr/loss.hpp"

#include <cmath>
#include <string>

#include "crlr/errors.hpp"
#include "crlr/kernels.hpp"
#include "crlr/numerics.hpp"

namespace crlr {

void Hyperparams::validate() const {
    const double ls[] = {lambda1, lambda2, lambda3, lambda4, lambda5};
    for (int k = 0; k < 5; ++k) {
        if (!(ls[k] >= 0.0) || !std::isfinite(ls[k])) {
            throw validation_error("lambda" + std::to_string(k + 1) + " must be >= 0");
        }
    }
    if (!(denom_epsilon > 0.0)) {
        throw validation_error("denom_epsilon must be > 0");
    }
}

namespace {

void check_dims(const Matrix& X, const Vector& Y, const Vector& beta, const Vector* W) {
    if (Y.size() != X.rows()) {
        throw validation_error("labels size " + std::to_string(Y.size()) +
                               " does not match sample count " + std::to_string(X.rows()));
    }
    if (beta.size() != X.cols()) {
        throw validation_error("beta size " + std::to_string(beta.size()) +
                               " does not match feature count " + std::to_string(X.cols()));
    }
    if (W && W->size() != X.rows()) {
        throw validation_error("weights size " + std::to_string(W->size()) +
                               " does not match sample count " + std::to_string(X.rows()));
    }
}

// softplus((1-2Y_i) * (x_i beta)) per sample
Vector per_sample_softplus(const Matrix& X, const Vector& Y, const Vector& beta) {
    Vector margin = X * beta;
    Vector out(Y.size());
    for (Index i = 0; i < Y.size(); ++i) {
        out[i] = softplus((1.0 - 2.0 * Y[i]) * margin[i]);
    }
    return out;
}

}  // namespace

double weighted_logistic_loss(const Matrix& X, const Vector& Y, const Vector& beta,
                              const Vector& W) {
    check_dims(X, Y, beta, &W);
    return W.dot(per_sample_softplus(X, Y, beta));
}

BalanceReport balancing_loss(const Matrix& X, const IndicatorMatrix& indicator, const Vector& W,
                             double denom_epsilon, const ExecPolicy& policy) {
    if (indicator.entries.rows() != X.rows() || indicator.entries.cols() != X.cols()) {
        throw validation_error("indicator dimensions do not match feature matrix");
    }
    if (W.size() != X.rows()) {
        throw validation_error("weights size does not match sample count");
    }
    if (indicator.active_features() == 0) {
        throw validation_error("all features are degenerate; balancing loss is undefined");
    }

    BalanceReport report;
    report.skipped = indicator.degenerate;
    balance_kernel(X, indicator.entries, indicator.degenerate, W, denom_epsilon,
                   report.per_feature_loss, nullptr, policy.threads);
    // Fixed-order total regardless of how the per-feature slots were filled.
    double total = 0.0;
    for (Index j = 0; j < report.per_feature_loss.size(); ++j) {
        total += report.per_feature_loss[j];
    }
    report.total = total;
    return report;
}

ObjectiveBreakdown objective(const Matrix& X, const Vector& Y, const IndicatorMatrix& indicator,
                             const Vector& beta, const Vector& omega, const Hyperparams& hyper,
                             const ExecPolicy& policy) {
    hyper.validate();
    const Vector W = omega.cwiseProduct(omega);
    check_dims(X, Y, beta, &W);

    ObjectiveBreakdown out;
    out.logistic = weighted_logistic_loss(X, Y, beta, W);
    // The balancing sum is only evaluated when it carries weight; this keeps
    // the lambda1 = 0 objective defined even for all-degenerate designs.
    out.balance = hyper.lambda1 > 0.0
                      ? hyper.lambda1 *
                            balancing_loss(X, indicator, W, hyper.denom_epsilon, policy).total
                      : 0.0;
    out.w_norm = hyper.lambda2 * W.squaredNorm();
    out.beta_ridge = hyper.lambda3 * beta.squaredNorm();
    out.beta_lasso = hyper.lambda4 * beta.lpNorm<1>();
    const double wsum = W.sum();
    out.w_sum = hyper.lambda5 * (wsum - 1.0) * (wsum - 1.0);
    out.total = out.logistic + out.balance + out.w_norm + out.beta_ridge + out.beta_lasso +
                out.w_sum;
    return out;
}

Vector grad_smooth_beta(const Matrix& X, const Vector& Y, const Vector& beta, const Vector& W,
                        double lambda3) {
    check_dims(X, Y, beta, &W);
    Vector margin = X * beta;
    Vector coeff(Y.size());
    for (Index i = 0; i < Y.size(); ++i) {
        const double s = 1.0 - 2.0 * Y[i];
        coeff[i] = W[i] * s * sigmoid(s * margin[i]);
    }
    return X.transpose() * coeff + 2.0 * lambda3 * beta;
}

Vector grad_omega(const Matrix& X, const Vector& Y, const IndicatorMatrix& indicator,
                  const Vector& beta, const Vector& omega, const Hyperparams& hyper,
                  const ExecPolicy& policy) {
    hyper.validate();
    const Vector W = omega.cwiseProduct(omega);
    check_dims(X, Y, beta, &W);

    // logistic term: d/d omega_i of omega_i^2 * softplus_i
    const Vector sp = per_sample_softplus(X, Y, beta);
    Vector grad = 2.0 * omega.cwiseProduct(sp);

    if (hyper.lambda1 > 0.0) {
        Vector per_feature(X.cols());
        Vector grad_w(X.rows());
        balance_kernel(X, indicator.entries, indicator.degenerate, W, hyper.denom_epsilon,
                       per_feature, &grad_w, policy.threads);
        for (Index j = 0; j < per_feature.size(); ++j) {
            if (!std::isfinite(per_feature[j])) {
                throw numerical_error("non-finite balancing term at feature " +
                                      std::to_string(j));
            }
        }
        // chain rule through W = omega .* omega
        grad += hyper.lambda1 * 2.0 * omega.cwiseProduct(grad_w);
    }

    // lambda2 ||W||^2 = lambda2 sum omega_i^4
    grad += 4.0 * hyper.lambda2 * omega.cwiseProduct(omega).cwiseProduct(omega);

    // lambda5 (sum omega_k^2 - 1)^2
    const double resid = W.sum() - 1.0;
    grad += 4.0 * hyper.lambda5 * resid * omega;

    for (Index i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            throw numerical_error("non-finite omega gradient at sample " + std::to_string(i));
        }
    }
    return grad;
}

}  // namespace crlr
