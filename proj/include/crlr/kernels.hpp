#pragma once

#include <vector>

#include "crlr/dataset.hpp"

namespace crlr {

// Per-treatment-feature balancing kernels. For each non-degenerate feature j
// the treated/control weighted confounder means are
//   m_t = X_{-j}^T (W .* I_j) / (W^T I_j),   m_c = X_{-j}^T (W .* (1-I_j)) / (W^T (1-I_j)),
// with denominators floored at eps, and the per-feature loss is ||m_t - m_c||^2.
// When grad_w is non-null the kernel also accumulates the exact derivative of
// the summed loss with respect to W (the flooring is treated as a flat region,
// so the derivative through a floored denominator is zero).
//
// The serial kernel is the fixed-order reference; the OpenMP kernel splits the
// feature loop across threads. Per-feature losses land in preassigned slots,
// so they are identical between the two; the gradient accumulation order
// differs, which perturbs the result only at floating-point summation level.

void balance_kernel_serial(const Matrix& features, const Matrix& indicator,
                           const std::vector<bool>& degenerate, const Vector& weights,
                           double eps, Vector& per_feature_loss, Vector* grad_w);

void balance_kernel_omp(const Matrix& features, const Matrix& indicator,
                        const std::vector<bool>& degenerate, const Vector& weights, double eps,
                        Vector& per_feature_loss, Vector* grad_w, int threads);

// Dispatch: threads <= 1 selects the serial reference.
void balance_kernel(const Matrix& features, const Matrix& indicator,
                    const std::vector<bool>& degenerate, const Vector& weights, double eps,
                    Vector& per_feature_loss, Vector* grad_w, int threads);

}  // namespace crlr
