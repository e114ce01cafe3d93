#include "crlr/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crlr {

namespace {

// One treatment feature. sum_xw = X^T W and wsum = sum(W) are shared across
// features and passed in precomputed.
void balance_one_feature(const Matrix& X, const Matrix& I, const Vector& W, double eps,
                         const Vector& sum_xw, double wsum, Index j, double& loss_out,
                         Vector* grad_w_out) {
    const Index n = X.rows();

    Vector wt = W.cwiseProduct(I.col(j));  // weights restricted to treated rows
    const double c_raw = wt.sum();
    const double d_raw = wsum - c_raw;
    const double cf = std::max(c_raw, eps);
    const double df = std::max(d_raw, eps);

    Vector u = X.transpose() * wt;  // treated-side weighted confounder sums
    Vector v = sum_xw - u;          // control side
    u[j] = 0.0;                     // column j of X_{-j} is zero
    v[j] = 0.0;

    Vector b = u / cf - v / df;
    loss_out = b.squaredNorm();

    if (grad_w_out == nullptr) return;

    // d||b||^2/dW_i = 2 b^T [ I_ij (x~_i - m_t)/cf - (1-I_ij)(x~_i - m_c)/df ]
    // where x~_i is row i of X_{-j}; b[j] = 0 makes X*b equal X_{-j}*b.
    const Vector t = X * b;
    const double bu = b.dot(u) / cf;
    const double bv = b.dot(v) / df;
    const double ct = c_raw > eps ? bu : 0.0;  // floored denominator is flat
    const double dt = d_raw > eps ? bv : 0.0;

    Vector& g = *grad_w_out;
    for (Index i = 0; i < n; ++i) {
        const double ind = I(i, j);
        g[i] += 2.0 * (ind * (t[i] - ct) / cf - (1.0 - ind) * (t[i] - dt) / df);
    }
}

}  // namespace

void balance_kernel_serial(const Matrix& X, const Matrix& I, const std::vector<bool>& degenerate,
                           const Vector& W, double eps, Vector& per_feature_loss,
                           Vector* grad_w) {
    const Index p = X.cols();
    per_feature_loss.setZero(p);
    if (grad_w) grad_w->setZero(X.rows());
    const Vector sum_xw = X.transpose() * W;
    const double wsum = W.sum();
    for (Index j = 0; j < p; ++j) {
        if (degenerate[static_cast<std::size_t>(j)]) continue;
        balance_one_feature(X, I, W, eps, sum_xw, wsum, j, per_feature_loss[j], grad_w);
    }
}

void balance_kernel_omp(const Matrix& X, const Matrix& I, const std::vector<bool>& degenerate,
                        const Vector& W, double eps, Vector& per_feature_loss, Vector* grad_w,
                        int threads) {
#ifndef _OPENMP
    (void)threads;
    balance_kernel_serial(X, I, degenerate, W, eps, per_feature_loss, grad_w);
#else
    const Index n = X.rows();
    const Index p = X.cols();
    per_feature_loss.setZero(p);
    if (grad_w) grad_w->setZero(n);
    const Vector sum_xw = X.transpose() * W;
    const double wsum = W.sum();

    const int nthreads = std::max(threads, 1);
    std::vector<Vector> partial;
    if (grad_w) {
        partial.assign(static_cast<std::size_t>(nthreads), Vector::Zero(n));
    }

#pragma omp parallel num_threads(nthreads)
    {
        const int tid = omp_get_thread_num();
        Vector* local = grad_w ? &partial[static_cast<std::size_t>(tid)] : nullptr;
#pragma omp for schedule(static)
        for (Index j = 0; j < p; ++j) {
            if (degenerate[static_cast<std::size_t>(j)]) continue;
            balance_one_feature(X, I, W, eps, sum_xw, wsum, j, per_feature_loss[j], local);
        }
    }

    if (grad_w) {
        for (const Vector& g : partial) {
            *grad_w += g;
        }
    }
#endif
}

void balance_kernel(const Matrix& X, const Matrix& I, const std::vector<bool>& degenerate,
                    const Vector& W, double eps, Vector& per_feature_loss, Vector* grad_w,
                    int threads) {
    if (threads <= 1) {
        balance_kernel_serial(X, I, degenerate, W, eps, per_feature_loss, grad_w);
    } else {
        balance_kernel_omp(X, I, degenerate, W, eps, per_feature_loss, grad_w, threads);
    }
}

}  // namespace crlr
