#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "crlr/dataset.hpp"
#include "crlr/loss.hpp"

namespace crlr {

struct SolverConfig {
    int max_outer_iters = 200;
    int inner_beta_iters = 50;
    int inner_omega_iters = 50;
    double rel_tol = 1e-6;       // relative objective change for convergence
    double armijo_shrink = 0.5;  // in (0,1)
    double armijo_slope = 1e-4;  // in (0,1)
    double initial_step = 1.0;
    unsigned long seed = 0;      // reserved for randomized initialization
    bool update_omega = true;    // false freezes the sample weights (plain weighted LR)
    int threads = 1;
    bool record_inner_trace = false;

    void validate() const;
};

// One accepted inner step; block is 'b' (beta subproblem) or 'w' (omega
// subproblem). Values within one (outer, block) run are comparable.
struct InnerStep {
    int outer = 0;
    char block = 'b';
    double value = 0.0;
};

struct FitResult {
    ModelState state;
    bool converged = false;
    int iterations_used = 0;
    std::vector<TracePoint> objective_trace;
    BalanceReport balance;  // at the solution
    std::vector<InnerStep> inner_trace;
    std::vector<std::string> notes;  // line-search stalls etc.
};

// Proximal-gradient pass on the beta subproblem with fixed W; backtracking
// guarantees the composite objective does not increase.
Vector update_beta(const ModelState& state, const Matrix& features, const Vector& labels,
                   const Hyperparams& hyper, const SolverConfig& config,
                   std::vector<InnerStep>* steps = nullptr, int outer_iter = 0);

// Armijo line-searched gradient descent on the omega subproblem with fixed
// beta; every accepted step strictly reduces the omega objective.
Vector update_omega(const ModelState& state, const Matrix& features, const Vector& labels,
                    const IndicatorMatrix& indicator, const Hyperparams& hyper,
                    const SolverConfig& config, std::vector<InnerStep>* steps = nullptr,
                    int outer_iter = 0, std::vector<std::string>* notes = nullptr);

FitResult fit(const Dataset& dataset, const Hyperparams& hyper, const SolverConfig& config);

Vector predict_proba(const Vector& beta, const Matrix& features);

// Label 1 iff probability >= threshold (ties map to 1).
Eigen::VectorXi predict(const Vector& beta, const Matrix& features, double threshold = 0.5);

struct SavedModel {
    Vector beta;
    std::vector<std::string> feature_names;
    Hyperparams hyper;
    SolverConfig config;
};

// Versioned plain-text model format; beta is emitted with 17 significant
// digits so write -> read round-trips bit-exactly.
void save_model(const std::filesystem::path& path, const SavedModel& model);
SavedModel load_model(const std::filesystem::path& path);

}  // namespace crlr
