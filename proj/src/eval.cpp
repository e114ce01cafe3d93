#include "crlr/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "crlr/errors.hpp"
#include "crlr/numerics.hpp"

namespace crlr {

MetricReport metrics(const Vector& y_true, const Eigen::VectorXi& y_pred_labels,
                     const Vector& y_pred_proba) {
    const Index n = y_true.size();
    if (n == 0) {
        throw validation_error("metrics on empty input");
    }
    if (y_pred_labels.size() != n || y_pred_proba.size() != n) {
        throw validation_error("metrics inputs have mismatched lengths");
    }

    Index correct = 0;
    Index tp = 0, fp = 0, fn = 0;
    double sq = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double y = y_true[i];
        if (y != 0.0 && y != 1.0) {
            throw validation_error("y_true must be binary");
        }
        const double pr = y_pred_proba[i];
        if (!(pr >= 0.0 && pr <= 1.0)) {
            throw validation_error("probabilities must lie in [0,1]");
        }
        const int pred = y_pred_labels[i];
        if (pred == static_cast<int>(y)) ++correct;
        if (pred == 1 && y == 1.0) ++tp;
        if (pred == 1 && y == 0.0) ++fp;
        if (pred == 0 && y == 1.0) ++fn;
        sq += (pr - y) * (pr - y);
    }

    MetricReport rep;
    rep.n_test = n;
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    rep.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    rep.rmse = std::sqrt(sq / static_cast<double>(n));
    return rep;
}

double bias_level(const Dataset& train, const Dataset& test) {
    if (train.p() != test.p()) {
        throw validation_error("bias_level requires matching feature counts");
    }
    const Vector mean_train = train.features.colwise().mean();
    const Vector mean_test = test.features.colwise().mean();
    return (mean_train - mean_test).lpNorm<1>();
}

std::string method_name(Method m) {
    switch (m) {
        case Method::crlr: return "crlr";
        case Method::lr: return "lr";
        case Method::lr_l1: return "lr_l1";
        case Method::two_step: return "two_step";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "crlr") return Method::crlr;
    if (name == "lr") return Method::lr;
    if (name == "lr_l1") return Method::lr_l1;
    if (name == "two_step" || name == "twostep") return Method::two_step;
    throw validation_error("unknown method '" + name +
                           "' (expected crlr|lr|lr_l1|two_step)");
}

void SweepConfig::validate() const {
    train_config.validate();
    if (train_n < 2 || test_n < 2) throw validation_error("train_n and test_n must be >= 2");
    if (grid.empty()) throw validation_error("sweep grid is empty");
    for (double r : grid) {
        if (!(r > 0.0 && r < 1.0)) throw validation_error("grid bias rates must be in (0,1)");
    }
    if (methods.empty()) throw validation_error("no methods requested");
    if (repeats < 1) throw validation_error("repeats must be >= 1");
    params.crlr_hyper.validate();
    solver.validate();
}

namespace {

RmseStats make_stats(const std::vector<double>& values) {
    RmseStats s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

Vector fit_method(Method m, const Dataset& train, const SweepConfig& config) {
    switch (m) {
        case Method::crlr:
            return fit(train, config.params.crlr_hyper, config.solver).state.beta;
        case Method::lr:
            return fit_logistic(train, 0.0, config.params.lr_l2_penalty, config.solver);
        case Method::lr_l1:
            return fit_logistic(train, config.params.lr_l1_penalty,
                                config.params.lr_l2_penalty, config.solver);
        case Method::two_step: {
            const int top_k = config.params.two_step_top_k > 0
                                  ? config.params.two_step_top_k
                                  : static_cast<int>((train.p() + 1) / 2);
            return two_step_fit(train, top_k, 0.0, config.params.lr_l2_penalty, config.solver)
                .coefficients;
        }
    }
    throw validation_error("unknown method");
}

}  // namespace

RmseStats SweepResult::across_grid(Method m, int repeat) const {
    std::vector<double> values;
    for (const auto& rec : records) {
        if (rec.method == m && rec.repeat == repeat) values.push_back(rec.report.rmse);
    }
    return make_stats(values);
}

RmseStats SweepResult::across_repeats(Method m, double bias_rate) const {
    std::vector<double> values;
    for (const auto& rec : records) {
        if (rec.method == m && rec.bias_rate == bias_rate) values.push_back(rec.report.rmse);
    }
    return make_stats(values);
}

RmseStats SweepResult::overall(Method m) const {
    std::vector<double> values;
    for (const auto& rec : records) {
        if (rec.method == m) values.push_back(rec.report.rmse);
    }
    return make_stats(values);
}

SweepResult run_bias_sweep(const SweepConfig& config) {
    config.validate();

    SweepResult result;
    result.config = config;

    for (int rep = 0; rep < config.repeats; ++rep) {
        try {
            SynthConfig train_cfg = config.train_config;
            train_cfg.seed = derive_seed(config.train_config.seed,
                                         0x74726e00ULL + static_cast<std::uint64_t>(rep));
            const SynthDataset train = generate_n(train_cfg, config.train_n);

            std::vector<Dataset> tests;
            tests.reserve(config.grid.size());
            for (std::size_t g = 0; g < config.grid.size(); ++g) {
                SynthConfig test_cfg = config.train_config;
                test_cfg.bias_rate = config.grid[g];
                test_cfg.seed = derive_seed(
                    config.train_config.seed,
                    0x74737400ULL + static_cast<std::uint64_t>(rep) * 1024ULL + g);
                tests.push_back(generate_n(test_cfg, config.test_n).data);
            }

            for (Method m : config.methods) {
                const Vector beta = fit_method(m, train.data, config);
                for (std::size_t g = 0; g < config.grid.size(); ++g) {
                    const Vector proba = predict_proba(beta, tests[g].features);
                    const Eigen::VectorXi labels = predict(beta, tests[g].features);
                    result.records.push_back(
                        {m, config.grid[g], rep, metrics(tests[g].labels, labels, proba)});
                }
            }
            result.train_seeds.push_back(train_cfg.seed);
        } catch (const std::exception& e) {
            result.failures.push_back("repeat " + std::to_string(rep) + ": " + e.what());
        }
    }
    return result;
}

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

// The f1 column supports relative-improvement readings: for a method m at a
// grid point, (f1_m - best baseline f1) / best baseline f1 over the same
// cells. Only the raw per-cell values are emitted here.
void write_records_csv(const std::filesystem::path& path, const SweepResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write sweep records: " + path.string());
    out << "method,bias_rate,repeat,rmse,accuracy,f1\n";
    for (const auto& rec : result.records) {
        out << method_name(rec.method) << ',' << fmt6(rec.bias_rate) << ',' << rec.repeat << ','
            << fmt6(rec.report.rmse) << ',' << fmt6(rec.report.accuracy) << ','
            << fmt6(rec.report.f1) << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

void write_summary_csv(const std::filesystem::path& path, const SweepResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write sweep summary: " + path.string());
    out << "method,bias_rate,mean_rmse,std_rmse\n";
    for (Method m : result.config.methods) {
        for (double r : result.config.grid) {
            const RmseStats s = result.across_repeats(m, r);
            out << method_name(m) << ',' << fmt6(r) << ',' << fmt6(s.mean) << ','
                << fmt6(s.stddev) << '\n';
        }
    }
    if (!out) throw io_error("write failed: " + path.string());
}

GridSearchResult grid_search_crlr(const Dataset& train, double val_fraction,
                                  const std::vector<Hyperparams>& candidates,
                                  const SolverConfig& solver) {
    if (candidates.empty()) throw validation_error("grid search needs candidates");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw validation_error("val_fraction must be in (0,1)");
    }
    const Index n = train.n();
    const Index n_val = std::max<Index>(1, static_cast<Index>(
                                               std::floor(val_fraction * static_cast<double>(n))));
    const Index n_fit = n - n_val;
    if (n_fit < 2) throw validation_error("training split too small for grid search");

    Dataset fit_part;
    fit_part.features = train.features.topRows(n_fit);
    fit_part.labels = train.labels.head(n_fit);
    fit_part.feature_names = train.feature_names;
    Dataset val_part;
    val_part.features = train.features.bottomRows(n_val);
    val_part.labels = train.labels.tail(n_val);
    val_part.feature_names = train.feature_names;

    GridSearchResult out;
    bool first = true;
    for (const Hyperparams& h : candidates) {
        const Vector beta = fit(fit_part, h, solver).state.beta;
        const Vector proba = predict_proba(beta, val_part.features);
        const Eigen::VectorXi labels = predict(beta, val_part.features);
        const double rmse = metrics(val_part.labels, labels, proba).rmse;
        out.tried.emplace_back(h, rmse);
        if (first || rmse < out.best_rmse) {
            out.best = h;
            out.best_rmse = rmse;
            first = false;
        }
    }
    return out;
}

}  // namespace crlr
