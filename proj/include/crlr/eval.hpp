#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crlr/baselines.hpp"
#include "crlr/dataset.hpp"
#include "crlr/loss.hpp"
#include "crlr/solver.hpp"
#include "crlr/synthgen.hpp"

namespace crlr {

struct MetricReport {
    double accuracy = 0.0;
    double f1 = 0.0;    // positive class; 0 when precision + recall is 0
    double rmse = 0.0;  // predicted probability vs binary label
    Index n_test = 0;
};

MetricReport metrics(const Vector& y_true, const Eigen::VectorXi& y_pred_labels,
                     const Vector& y_pred_proba);

// Distribution-shift proxy between two datasets: the 1-norm of the
// difference of their mean feature vectors (first-moment surrogate for the
// mover's distance between average feature vectors).
double bias_level(const Dataset& train, const Dataset& test);

enum class Method { crlr, lr, lr_l1, two_step };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct MethodParams {
    Hyperparams crlr_hyper;
    double lr_l1_penalty = 0.001;
    double lr_l2_penalty = 0.0;
    int two_step_top_k = 0;  // 0 resolves to ceil(p/2)
};

struct SweepConfig {
    SynthConfig train_config;  // bias_rate is the training bias; seed is the base seed
    Index train_n = 2000;
    Index test_n = 2000;
    std::vector<double> grid;  // test bias rates
    std::vector<Method> methods;
    int repeats = 10;
    MethodParams params;
    SolverConfig solver;

    void validate() const;
};

struct SweepRecord {
    Method method;
    double bias_rate;
    int repeat;
    MetricReport report;
};

struct RmseStats {
    double mean = 0.0;
    double stddev = 0.0;  // unbiased (n-1) denominator
    int count = 0;
};

struct SweepResult {
    SweepConfig config;
    std::vector<SweepRecord> records;  // repeat-major, then method, then grid order
    std::vector<std::uint64_t> train_seeds;
    std::vector<std::string> failures;  // failed repeats, recorded not imputed

    // RMSE aggregated across the grid for one (method, repeat) pair.
    RmseStats across_grid(Method m, int repeat) const;
    // RMSE aggregated across repeats at one grid point.
    RmseStats across_repeats(Method m, double bias_rate) const;
    // RMSE over every (grid point, repeat) cell.
    RmseStats overall(Method m) const;
};

SweepResult run_bias_sweep(const SweepConfig& config);

// (method, bias_rate, repeat, rmse, accuracy, f1), 6 significant digits.
void write_records_csv(const std::filesystem::path& path, const SweepResult& result);
// (method, bias_rate, mean_rmse, std_rmse), 6 significant digits.
void write_summary_csv(const std::filesystem::path& path, const SweepResult& result);

struct GridSearchResult {
    Hyperparams best;
    double best_rmse = 0.0;
    std::vector<std::pair<Hyperparams, double>> tried;
};

// Validation-split selection for the joint model: candidates are scored by
// RMSE on the held-out tail of the training data (drawn at the training bias
// rate). Ties resolve to the earliest candidate.
GridSearchResult grid_search_crlr(const Dataset& train, double val_fraction,
                                  const std::vector<Hyperparams>& candidates,
                                  const SolverConfig& solver);

}  // namespace crlr
