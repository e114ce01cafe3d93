#include "crlr/solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crlr/errors.hpp"
#include "crlr/kernels.hpp"
#include "crlr/numerics.hpp"

namespace crlr {

void SolverConfig::validate() const {
    if (max_outer_iters < 1) throw validation_error("max_outer_iters must be >= 1");
    if (inner_beta_iters < 1) throw validation_error("inner_beta_iters must be >= 1");
    if (inner_omega_iters < 1) throw validation_error("inner_omega_iters must be >= 1");
    if (!(rel_tol >= 0.0)) throw validation_error("rel_tol must be >= 0");
    if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
        throw validation_error("armijo_shrink must be in (0,1)");
    }
    if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) {
        throw validation_error("armijo_slope must be in (0,1)");
    }
    if (!(initial_step > 0.0)) throw validation_error("initial_step must be > 0");
    if (threads < 1) throw validation_error("threads must be >= 1");
}

namespace {

constexpr int kMaxShrinks = 50;

Vector soft_threshold(const Vector& v, double level) {
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        if (v[i] > level) {
            out[i] = v[i] - level;
        } else if (v[i] < -level) {
            out[i] = v[i] + level;
        } else {
            out[i] = 0.0;
        }
    }
    return out;
}

// Smooth part of the beta subproblem: weighted logistic + ridge.
double beta_smooth_value(const Matrix& X, const Vector& Y, const Vector& W, const Vector& beta,
                         double lambda3) {
    Vector margin = X * beta;
    double acc = 0.0;
    for (Index i = 0; i < Y.size(); ++i) {
        acc += W[i] * softplus((1.0 - 2.0 * Y[i]) * margin[i]);
    }
    return acc + lambda3 * beta.squaredNorm();
}

// Omega objective from the reparameterized subproblem: the beta penalties are
// constant here and omitted. softplus_vec depends only on beta and is
// precomputed once per update_omega call.
double omega_objective(const Matrix& X, const IndicatorMatrix& indicator,
                       const Vector& softplus_vec, const Vector& omega, const Hyperparams& hyper,
                       int threads) {
    const Vector W = omega.cwiseProduct(omega);
    double val = W.dot(softplus_vec);
    if (hyper.lambda1 > 0.0) {
        Vector per_feature(X.cols());
        balance_kernel(X, indicator.entries, indicator.degenerate, W, hyper.denom_epsilon,
                       per_feature, nullptr, threads);
        double total = 0.0;
        for (Index j = 0; j < per_feature.size(); ++j) total += per_feature[j];
        val += hyper.lambda1 * total;
    }
    val += hyper.lambda2 * W.squaredNorm();
    const double resid = W.sum() - 1.0;
    val += hyper.lambda5 * resid * resid;
    return val;
}

}  // namespace

Vector update_beta(const ModelState& state, const Matrix& X, const Vector& Y,
                   const Hyperparams& hyper, const SolverConfig& config,
                   std::vector<InnerStep>* steps, int outer_iter) {
    const Vector W = state.weights();
    Vector beta = state.beta;
    double step = config.initial_step;
    double f_cur = beta_smooth_value(X, Y, W, beta, hyper.lambda3);

    for (int it = 0; it < config.inner_beta_iters; ++it) {
        Vector grad = grad_smooth_beta(X, Y, beta, W, hyper.lambda3);
        for (Index j = 0; j < grad.size(); ++j) {
            if (!std::isfinite(grad[j])) {
                throw numerical_error("non-finite beta gradient at coordinate " +
                                      std::to_string(j));
            }
        }

        // Backtrack until the quadratic model majorizes the smooth part at
        // the prox candidate; that certifies composite descent.
        Vector cand;
        double f_cand = 0.0;
        bool accepted = false;
        for (int shrink = 0; shrink <= kMaxShrinks; ++shrink) {
            cand = soft_threshold(beta - step * grad, step * hyper.lambda4);
            Vector diff = cand - beta;
            const double diff_sq = diff.squaredNorm();
            if (diff_sq == 0.0) {
                // prox fixed point; nothing further to do this pass
                return beta;
            }
            f_cand = beta_smooth_value(X, Y, W, cand, hyper.lambda3);
            if (f_cand <= f_cur + grad.dot(diff) + diff_sq / (2.0 * step)) {
                accepted = true;
                break;
            }
            step *= config.armijo_shrink;
        }
        if (!accepted) {
            break;  // step underflowed, keep current beta
        }
        beta = cand;
        f_cur = f_cand;
        if (steps) {
            steps->push_back({outer_iter, 'b', f_cur + hyper.lambda4 * beta.lpNorm<1>()});
        }
    }
    return beta;
}

Vector update_omega(const ModelState& state, const Matrix& X, const Vector& Y,
                    const IndicatorMatrix& indicator, const Hyperparams& hyper,
                    const SolverConfig& config, std::vector<InnerStep>* steps, int outer_iter,
                    std::vector<std::string>* notes) {
    Vector omega = state.omega;
    Vector margin = X * state.beta;
    Vector softplus_vec(Y.size());
    for (Index i = 0; i < Y.size(); ++i) {
        softplus_vec[i] = softplus((1.0 - 2.0 * Y[i]) * margin[i]);
    }

    double j_cur = omega_objective(X, indicator, softplus_vec, omega, hyper, config.threads);
    double step_start = config.initial_step;

    for (int it = 0; it < config.inner_omega_iters; ++it) {
        Vector grad = grad_omega(X, Y, indicator, state.beta, omega, hyper,
                                 ExecPolicy{config.threads});
        const double grad_sq = grad.squaredNorm();
        if (std::sqrt(grad_sq) <= 1e-10) {
            break;  // stationary: omega unchanged
        }

        double a = step_start;
        bool accepted = false;
        double j_new = 0.0;
        for (int shrink = 0; shrink <= kMaxShrinks; ++shrink) {
            Vector cand = omega - a * grad;
            j_new = omega_objective(X, indicator, softplus_vec, cand, hyper, config.threads);
            if (std::isfinite(j_new) && j_new <= j_cur - config.armijo_slope * a * grad_sq) {
                omega = std::move(cand);
                accepted = true;
                break;
            }
            a *= config.armijo_shrink;
        }
        if (!accepted) {
            if (notes) {
                notes->push_back("omega line search stalled at outer " +
                                 std::to_string(outer_iter) + ", inner " + std::to_string(it));
            }
            break;
        }
        j_cur = j_new;
        // Warm-start the next search just above the accepted step.
        step_start = std::min(config.initial_step, a / config.armijo_shrink);
        if (steps) {
            steps->push_back({outer_iter, 'w', j_cur});
        }
    }
    return omega;
}

FitResult fit(const Dataset& dataset, const Hyperparams& hyper, const SolverConfig& config) {
    dataset.validate();
    hyper.validate();
    config.validate();

    const Matrix& X = dataset.features;
    const Vector& Y = dataset.labels;
    const Index n = dataset.n();
    const IndicatorMatrix indicator = indicator_from_features(dataset);
    const ExecPolicy policy{config.threads};

    FitResult result;
    result.state.beta = Vector::Zero(dataset.p());
    result.state.omega = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));

    double j_prev = objective(X, Y, indicator, result.state.beta, result.state.omega, hyper,
                              policy).total;
    result.objective_trace.push_back({0, j_prev});

    auto* inner = config.record_inner_trace ? &result.inner_trace : nullptr;

    int t = 0;
    for (t = 1; t <= config.max_outer_iters; ++t) {
        result.state.beta = update_beta(result.state, X, Y, hyper, config, inner, t);
        if (config.update_omega) {
            result.state.omega = update_omega(result.state, X, Y, indicator, hyper, config,
                                              inner, t, &result.notes);
        }
        const double j_t = objective(X, Y, indicator, result.state.beta, result.state.omega,
                                     hyper, policy).total;
        if (!std::isfinite(j_t)) {
            std::ostringstream msg;
            msg << "objective became non-finite at outer iteration " << t << "; trace:";
            for (const auto& pt : result.objective_trace) {
                msg << " (" << pt.iteration << ", " << pt.objective << ")";
            }
            throw numerical_error(msg.str());
        }
        result.objective_trace.push_back({t, j_t});
        const double rel = std::abs(j_prev - j_t) / std::max(std::abs(j_prev), 1e-12);
        j_prev = j_t;
        if (rel < config.rel_tol) {
            result.converged = true;
            break;
        }
    }
    result.iterations_used = std::min(t, config.max_outer_iters);
    result.state.objective_trace = result.objective_trace;
    if (indicator.active_features() > 0) {
        result.balance = balancing_loss(X, indicator, result.state.weights(),
                                        hyper.denom_epsilon, policy);
    } else {
        result.balance.per_feature_loss = Vector::Zero(dataset.p());
        result.balance.skipped = indicator.degenerate;
        result.balance.total = 0.0;
    }
    return result;
}

Vector predict_proba(const Vector& beta, const Matrix& X) {
    if (beta.size() != X.cols()) {
        throw validation_error("beta size does not match feature count");
    }
    Vector margin = X * beta;
    Vector proba(margin.size());
    for (Index i = 0; i < margin.size(); ++i) {
        proba[i] = sigmoid(margin[i]);
    }
    return proba;
}

Eigen::VectorXi predict(const Vector& beta, const Matrix& X, double threshold) {
    Vector proba = predict_proba(beta, X);
    Eigen::VectorXi labels(proba.size());
    for (Index i = 0; i < proba.size(); ++i) {
        labels[i] = proba[i] >= threshold ? 1 : 0;
    }
    return labels;
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void save_model(const std::filesystem::path& path, const SavedModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot write model file: " + path.string());
    }
    const Index p = model.beta.size();
    out << "crlr-model v1\n";
    out << "p " << p << '\n';
    for (Index j = 0; j < p; ++j) {
        out << "feature " << j << ' ';
        if (static_cast<Index>(model.feature_names.size()) == p) {
            out << model.feature_names[static_cast<std::size_t>(j)];
        } else {
            out << 'x' << j;
        }
        out << '\n';
    }
    for (Index j = 0; j < p; ++j) {
        out << "beta " << j << ' ' << fmt17(model.beta[j]) << '\n';
    }
    out << "lambda1 " << fmt17(model.hyper.lambda1) << '\n';
    out << "lambda2 " << fmt17(model.hyper.lambda2) << '\n';
    out << "lambda3 " << fmt17(model.hyper.lambda3) << '\n';
    out << "lambda4 " << fmt17(model.hyper.lambda4) << '\n';
    out << "lambda5 " << fmt17(model.hyper.lambda5) << '\n';
    out << "denom_epsilon " << fmt17(model.hyper.denom_epsilon) << '\n';
    out << "max_outer_iters " << model.config.max_outer_iters << '\n';
    out << "inner_beta_iters " << model.config.inner_beta_iters << '\n';
    out << "inner_omega_iters " << model.config.inner_omega_iters << '\n';
    out << "rel_tol " << fmt17(model.config.rel_tol) << '\n';
    out << "armijo_shrink " << fmt17(model.config.armijo_shrink) << '\n';
    out << "armijo_slope " << fmt17(model.config.armijo_slope) << '\n';
    out << "initial_step " << fmt17(model.config.initial_step) << '\n';
    out << "seed " << model.config.seed << '\n';
    out << "update_omega " << (model.config.update_omega ? 1 : 0) << '\n';
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

SavedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open model file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != "crlr-model v1") {
        throw parse_error("unrecognized model format (expected 'crlr-model v1'): " +
                          path.string());
    }

    SavedModel model;
    Index p = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "p") {
            ss >> p;
            if (p < 1) throw parse_error("invalid p in model file");
            model.beta = Vector::Zero(p);
            model.feature_names.assign(static_cast<std::size_t>(p), "");
        } else if (key == "feature") {
            Index j;
            std::string name;
            ss >> j >> name;
            if (p < 0 || j < 0 || j >= p) throw parse_error("feature index out of range");
            model.feature_names[static_cast<std::size_t>(j)] = name;
        } else if (key == "beta") {
            Index j;
            double v;
            ss >> j >> v;
            if (p < 0 || j < 0 || j >= p) throw parse_error("beta index out of range");
            model.beta[j] = v;
        } else if (key == "lambda1") {
            ss >> model.hyper.lambda1;
        } else if (key == "lambda2") {
            ss >> model.hyper.lambda2;
        } else if (key == "lambda3") {
            ss >> model.hyper.lambda3;
        } else if (key == "lambda4") {
            ss >> model.hyper.lambda4;
        } else if (key == "lambda5") {
            ss >> model.hyper.lambda5;
        } else if (key == "denom_epsilon") {
            ss >> model.hyper.denom_epsilon;
        } else if (key == "max_outer_iters") {
            ss >> model.config.max_outer_iters;
        } else if (key == "inner_beta_iters") {
            ss >> model.config.inner_beta_iters;
        } else if (key == "inner_omega_iters") {
            ss >> model.config.inner_omega_iters;
        } else if (key == "rel_tol") {
            ss >> model.config.rel_tol;
        } else if (key == "armijo_shrink") {
            ss >> model.config.armijo_shrink;
        } else if (key == "armijo_slope") {
            ss >> model.config.armijo_slope;
        } else if (key == "initial_step") {
            ss >> model.config.initial_step;
        } else if (key == "seed") {
            ss >> model.config.seed;
        } else if (key == "update_omega") {
            int flag;
            ss >> flag;
            model.config.update_omega = flag != 0;
        } else {
            throw parse_error("unknown key '" + key + "' in model file " + path.string());
        }
        if (ss.fail()) {
            throw parse_error("malformed line in model file: " + line);
        }
    }
    if (p < 0) {
        throw parse_error("model file missing p: " + path.string());
    }
    return model;
}

}  // namespace crlr
