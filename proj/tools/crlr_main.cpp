// Command-line front end: generate | train | predict | sweep | balance.
// Every command writes a manifest next to its outputs recording the resolved
// flags, seed, library version, input digests, and wall time.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "crlr/baselines.hpp"
#include "crlr/dataset.hpp"
#include "crlr/errors.hpp"
#include "crlr/eval.hpp"
#include "crlr/loss.hpp"
#include "crlr/numerics.hpp"
#include "crlr/solver.hpp"
#include "crlr/synthgen.hpp"
#include "crlr/version.hpp"

namespace fs = std::filesystem;
using namespace crlr;

namespace {

constexpr const char* kExitCodeDoc =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error (unknown command or flag, malformed flag value)\n"
    "  2  file I/O error\n"
    "  3  input parse error (CSV, model, weights, config)\n"
    "  4  validation error (precondition or invariant violation)\n"
    "  5  numerical error (non-finite values in the optimizer)\n"
    "  6  generation error (biased selection produced too few samples)";

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::uint64_t fnv1a64_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read file for digest: " + path.string());
    std::uint64_t h = 14695981039346656037ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

using KvList = std::vector<std::pair<std::string, std::string>>;

struct CommonOpts {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = ".";

    fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }

    void prepare() const {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw io_error("cannot create output directory: " + out_dir);
    }
};

void write_manifest(const fs::path& path, const std::string& command, const CommonOpts& common,
                    const KvList& flags, const KvList& digests, double wall_ms,
                    const KvList& extras = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write manifest: " + path.string());
    out << "command=" << command << '\n';
    out << "version=" << kVersion << '\n';
    out << "seed=" << common.seed << '\n';
    out << "threads=" << common.threads << '\n';
    out << "out_dir=" << common.out_dir << '\n';
    for (const auto& [k, v] : flags) out << "flag." << k << '=' << v << '\n';
    for (const auto& [k, v] : digests) out << "digest." << k << '=' << v << '\n';
    for (const auto& [k, v] : extras) out << k << '=' << v << '\n';
    out << "wall_ms=" << fmt6(wall_ms) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error("cannot parse number '" + s + "' in " + ctx);
    }
}

// "a:b:step" inclusive range, or a comma-separated list of rates.
std::vector<double> parse_grid(const std::string& speck) {
    std::vector<double> out;
    if (speck.find(':') != std::string::npos) {
        const auto parts = split(speck, ':');
        if (parts.size() != 3) throw parse_error("grid range must be start:stop:step");
        const double a = parse_double(parts[0], "--grid");
        const double b = parse_double(parts[1], "--grid");
        const double step = parse_double(parts[2], "--grid");
        if (!(step > 0.0) || b < a) throw parse_error("grid range must have step > 0, stop >= start");
        const long count = std::lround((b - a) / step) + 1;
        for (long i = 0; i < count; ++i) {
            double v = a + static_cast<double>(i) * step;
            v = std::round(v * 1e10) / 1e10;  // snap accumulated float noise
            out.push_back(v);
        }
    } else {
        for (const auto& tok : split(speck, ',')) {
            if (!tok.empty()) out.push_back(parse_double(tok, "--grid"));
        }
    }
    if (out.empty()) throw parse_error("empty grid");
    return out;
}

std::vector<Method> parse_methods(const std::string& speck) {
    std::vector<Method> out;
    for (const auto& tok : split(speck, ',')) {
        if (!tok.empty()) out.push_back(parse_method(tok));
    }
    if (out.empty()) throw parse_error("empty method list");
    return out;
}

std::vector<double> parse_coeffs(const std::string& speck) {
    std::vector<double> out;
    for (const auto& tok : split(speck, ',')) {
        if (!tok.empty()) out.push_back(parse_double(tok, "--coeffs"));
    }
    return out;
}

// "lambda1=0.5,1,2;lambda3=0.01,0.1" -> cartesian candidate set around base.
std::vector<Hyperparams> parse_grid_search(const std::string& speck, const Hyperparams& base) {
    std::vector<Hyperparams> candidates{base};
    for (const auto& group : split(speck, ';')) {
        if (group.empty()) continue;
        const auto eq = group.find('=');
        if (eq == std::string::npos) {
            throw parse_error("grid-search group '" + group + "' lacks name=values");
        }
        const std::string name = group.substr(0, eq);
        std::vector<double> values;
        for (const auto& tok : split(group.substr(eq + 1), ',')) {
            if (!tok.empty()) values.push_back(parse_double(tok, "--grid-search"));
        }
        if (values.empty()) throw parse_error("grid-search group '" + name + "' has no values");
        std::vector<Hyperparams> next;
        next.reserve(candidates.size() * values.size());
        for (const Hyperparams& h : candidates) {
            for (double v : values) {
                Hyperparams c = h;
                if (name == "lambda1") c.lambda1 = v;
                else if (name == "lambda2") c.lambda2 = v;
                else if (name == "lambda3") c.lambda3 = v;
                else if (name == "lambda4") c.lambda4 = v;
                else if (name == "lambda5") c.lambda5 = v;
                else throw parse_error("unknown grid-search parameter '" + name + "'");
                next.push_back(c);
            }
        }
        candidates = std::move(next);
    }
    return candidates;
}

Vector load_weights_csv(const fs::path& path, Index n) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open weights file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw parse_error("weights file is empty: " + path.string());
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        values.push_back(parse_double(line, path.string() + ":" + std::to_string(lineno)));
    }
    if (static_cast<Index>(values.size()) != n) {
        throw validation_error("weights file has " + std::to_string(values.size()) +
                               " rows, dataset has " + std::to_string(n));
    }
    Vector w(n);
    for (Index i = 0; i < n; ++i) w[i] = values[static_cast<std::size_t>(i)];
    return w;
}

void write_weights_csv(const fs::path& path, const Vector& w) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write weights file: " + path.string());
    out << "weight\n";
    for (Index i = 0; i < w.size(); ++i) out << fmt17(w[i]) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

void write_balance_csv(const fs::path& path, const BalanceReport& report,
                       const std::vector<std::string>& names) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write balance file: " + path.string());
    out << "feature,name,loss,skipped\n";
    for (Index j = 0; j < report.per_feature_loss.size(); ++j) {
        const std::string name =
            static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)] : "";
        out << j << ',' << name << ',' << fmt17(report.per_feature_loss[j]) << ','
            << (report.skipped[static_cast<std::size_t>(j)] ? 1 : 0) << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

void write_trace_csv(const fs::path& path, const std::vector<TracePoint>& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write trace file: " + path.string());
    out << "iteration,objective\n";
    for (const TracePoint& pt : trace) out << pt.iteration << ',' << fmt17(pt.objective) << '\n';
    if (!out) throw io_error("write failed: " + path.string());
}

struct GenerateOpts {
    Index n = 2000;
    Index pool = 0;  // 0 = sized automatically from n
    int p_causal = 10;
    int p_noise = 10;
    double bias_rate = 0.85;
    double noise_scale = 1.0;
    int bias_feature = 0;
    std::string coeffs;  // comma list, empty = all ones
    std::string name = "synth";
};

int run_generate(const CommonOpts& common, const GenerateOpts& opt) {
    Stopwatch watch;
    common.prepare();

    SynthConfig cfg;
    cfg.p_causal = opt.p_causal;
    cfg.p_noise = opt.p_noise;
    cfg.bias_rate = opt.bias_rate;
    cfg.noise_scale = opt.noise_scale;
    cfg.bias_feature_index = opt.bias_feature;
    cfg.seed = common.seed;
    if (!opt.coeffs.empty()) cfg.causal_coefficients = parse_coeffs(opt.coeffs);
    if (opt.pool > 0) cfg.n_pool = opt.pool;

    const SynthDataset synth = generate_n(cfg, opt.n);
    const fs::path csv = common.out(opt.name + ".csv");
    const fs::path meta = common.out(opt.name + "_meta.txt");
    write_synth(csv, meta, synth);

    KvList flags = {{"n", std::to_string(opt.n)},
                    {"pool", std::to_string(synth.config.n_pool)},
                    {"p_causal", std::to_string(opt.p_causal)},
                    {"p_noise", std::to_string(opt.p_noise)},
                    {"bias_rate", fmt17(opt.bias_rate)},
                    {"noise_scale", fmt17(opt.noise_scale)},
                    {"bias_feature", std::to_string(opt.bias_feature)},
                    {"coeffs", opt.coeffs.empty() ? "ones" : opt.coeffs},
                    {"name", opt.name}};
    KvList digests = {{"dataset", hex64(fnv1a64_file(csv))}};
    write_manifest(common.out("generate_manifest.txt"), "generate", common, flags, digests,
                   watch.ms());
    std::cout << "wrote " << csv.string() << " (" << synth.data.n() << " x " << synth.data.p()
              << ")\n";
    return 0;
}

struct TrainOpts {
    std::string data;
    std::string label = "y";
    Hyperparams hyper;
    SolverConfig solver;
    std::string model_name = "model.txt";
};

int run_train(const CommonOpts& common, TrainOpts& opt) {
    Stopwatch watch;
    common.prepare();

    LoadReport load_report;
    const Dataset dataset = load_dataset(opt.data, opt.label, &load_report);
    for (const auto& w : load_report.warnings) std::cerr << "warning: " << w << '\n';

    opt.solver.threads = common.threads;
    const FitResult result = fit(dataset, opt.hyper, opt.solver);

    const fs::path model_path = common.out(opt.model_name);
    save_model(model_path, {result.state.beta, dataset.feature_names, opt.hyper, opt.solver});
    write_weights_csv(common.out("weights.csv"), result.state.weights());
    write_balance_csv(common.out("balance.csv"), result.balance, dataset.feature_names);
    write_trace_csv(common.out("trace.csv"), result.objective_trace);

    const Eigen::VectorXi labels = predict(result.state.beta, dataset.features);
    Index correct = 0;
    for (Index i = 0; i < dataset.n(); ++i) {
        if (labels[i] == static_cast<int>(dataset.labels[i])) ++correct;
    }
    const double train_acc = static_cast<double>(correct) / static_cast<double>(dataset.n());

    KvList flags = {{"data", opt.data},
                    {"label", opt.label},
                    {"lambda1", fmt17(opt.hyper.lambda1)},
                    {"lambda2", fmt17(opt.hyper.lambda2)},
                    {"lambda3", fmt17(opt.hyper.lambda3)},
                    {"lambda4", fmt17(opt.hyper.lambda4)},
                    {"lambda5", fmt17(opt.hyper.lambda5)},
                    {"max_outer", std::to_string(opt.solver.max_outer_iters)},
                    {"inner_beta", std::to_string(opt.solver.inner_beta_iters)},
                    {"inner_omega", std::to_string(opt.solver.inner_omega_iters)},
                    {"rel_tol", fmt17(opt.solver.rel_tol)},
                    {"model_out", opt.model_name}};
    KvList digests = {{"data", hex64(fnv1a64_file(opt.data))},
                      {"model", hex64(fnv1a64_file(model_path))}};
    KvList extras = {{"converged", result.converged ? "1" : "0"},
                     {"iterations", std::to_string(result.iterations_used)},
                     {"objective", fmt17(result.objective_trace.back().objective)},
                     {"train_accuracy", fmt17(train_acc)}};
    write_manifest(common.out("train_manifest.txt"), "train", common, flags, digests, watch.ms(),
                   extras);

    std::cout << "converged=" << (result.converged ? 1 : 0)
              << " iterations=" << result.iterations_used
              << " objective=" << fmt17(result.objective_trace.back().objective)
              << " train_accuracy=" << fmt17(train_acc) << '\n';
    for (const auto& note : result.notes) std::cerr << "note: " << note << '\n';
    return 0;
}

struct PredictOpts {
    std::string model;
    std::string data;
    std::string label = "y";
    double threshold = 0.5;
    std::string pred_name = "predictions.csv";
};

int run_predict(const CommonOpts& common, const PredictOpts& opt) {
    Stopwatch watch;
    common.prepare();

    const SavedModel model = load_model(opt.model);
    LoadReport load_report;
    const Dataset dataset = load_dataset(opt.data, opt.label, &load_report);
    for (const auto& w : load_report.warnings) std::cerr << "warning: " << w << '\n';
    if (dataset.p() != model.beta.size()) {
        throw validation_error("model has " + std::to_string(model.beta.size()) +
                               " coefficients, dataset has " + std::to_string(dataset.p()) +
                               " features");
    }

    const Vector proba = predict_proba(model.beta, dataset.features);
    const Eigen::VectorXi labels = predict(model.beta, dataset.features, opt.threshold);

    const fs::path pred_path = common.out(opt.pred_name);
    {
        std::ofstream out(pred_path, std::ios::binary);
        if (!out) throw io_error("cannot write predictions: " + pred_path.string());
        out << "row,proba,label,y_true\n";
        for (Index i = 0; i < dataset.n(); ++i) {
            out << i << ',' << fmt17(proba[i]) << ',' << labels[i] << ','
                << static_cast<int>(dataset.labels[i]) << '\n';
        }
        if (!out) throw io_error("write failed: " + pred_path.string());
    }

    const MetricReport report = metrics(dataset.labels, labels, proba);

    KvList flags = {{"model", opt.model},
                    {"data", opt.data},
                    {"label", opt.label},
                    {"threshold", fmt17(opt.threshold)},
                    {"predictions_out", opt.pred_name}};
    KvList digests = {{"model", hex64(fnv1a64_file(opt.model))},
                      {"data", hex64(fnv1a64_file(opt.data))}};
    KvList extras = {{"accuracy", fmt17(report.accuracy)},
                     {"f1", fmt17(report.f1)},
                     {"rmse", fmt17(report.rmse)}};
    write_manifest(common.out("predict_manifest.txt"), "predict", common, flags, digests,
                   watch.ms(), extras);

    std::cout << "accuracy=" << fmt17(report.accuracy) << " f1=" << fmt17(report.f1)
              << " rmse=" << fmt17(report.rmse) << '\n';
    return 0;
}

struct SweepOpts {
    double train_bias = 0.85;
    Index train_n = 2000;
    Index test_n = 2000;
    std::string grid = "0.1:0.9:0.1";
    std::string methods = "crlr,lr";
    int repeats = 10;
    int p_causal = 10;
    int p_noise = 10;
    double noise_scale = 1.0;
    int bias_feature = 0;
    Hyperparams hyper;
    SolverConfig solver;
    double lr_l1 = 0.001;
    double lr_l2 = 0.0;
    int top_k = 0;
    std::string grid_search;  // empty = off
    double val_fraction = 0.3;
};

int run_sweep(const CommonOpts& common, SweepOpts& opt) {
    Stopwatch watch;
    common.prepare();

    SweepConfig cfg;
    cfg.train_config.p_causal = opt.p_causal;
    cfg.train_config.p_noise = opt.p_noise;
    cfg.train_config.bias_rate = opt.train_bias;
    cfg.train_config.noise_scale = opt.noise_scale;
    cfg.train_config.bias_feature_index = opt.bias_feature;
    cfg.train_config.seed = common.seed;
    cfg.train_n = opt.train_n;
    cfg.test_n = opt.test_n;
    cfg.grid = parse_grid(opt.grid);
    cfg.methods = parse_methods(opt.methods);
    cfg.repeats = opt.repeats;
    cfg.params.crlr_hyper = opt.hyper;
    cfg.params.lr_l1_penalty = opt.lr_l1;
    cfg.params.lr_l2_penalty = opt.lr_l2;
    cfg.params.two_step_top_k = opt.top_k;
    cfg.solver = opt.solver;
    cfg.solver.threads = common.threads;

    KvList extras;
    if (!opt.grid_search.empty()) {
        const std::vector<Hyperparams> candidates = parse_grid_search(opt.grid_search, opt.hyper);
        SynthConfig tune_cfg = cfg.train_config;
        tune_cfg.seed = derive_seed(common.seed, 0x74756e65ULL);  // independent tuning draw
        const SynthDataset tune = generate_n(tune_cfg, cfg.train_n);
        const GridSearchResult gs =
            grid_search_crlr(tune.data, opt.val_fraction, candidates, cfg.solver);
        cfg.params.crlr_hyper = gs.best;

        const fs::path gs_path = common.out("grid_search.csv");
        std::ofstream out(gs_path, std::ios::binary);
        if (!out) throw io_error("cannot write grid search results: " + gs_path.string());
        out << "lambda1,lambda2,lambda3,lambda4,lambda5,val_rmse\n";
        for (const auto& [h, rmse] : gs.tried) {
            out << fmt6(h.lambda1) << ',' << fmt6(h.lambda2) << ',' << fmt6(h.lambda3) << ','
                << fmt6(h.lambda4) << ',' << fmt6(h.lambda5) << ',' << fmt6(rmse) << '\n';
        }
        if (!out) throw io_error("write failed: " + gs_path.string());
        extras.push_back({"grid_search.best_lambda1", fmt17(gs.best.lambda1)});
        extras.push_back({"grid_search.best_lambda2", fmt17(gs.best.lambda2)});
        extras.push_back({"grid_search.best_lambda3", fmt17(gs.best.lambda3)});
        extras.push_back({"grid_search.best_lambda4", fmt17(gs.best.lambda4)});
        extras.push_back({"grid_search.best_lambda5", fmt17(gs.best.lambda5)});
        extras.push_back({"grid_search.best_rmse", fmt17(gs.best_rmse)});
    }

    const SweepResult result = run_bias_sweep(cfg);
    for (const auto& failure : result.failures) std::cerr << "warning: " << failure << '\n';

    write_records_csv(common.out("records.csv"), result);
    write_summary_csv(common.out("summary.csv"), result);

    for (Method m : cfg.methods) {
        const RmseStats s = result.overall(m);
        std::cout << method_name(m) << ": mean_rmse=" << fmt6(s.mean)
                  << " std_rmse=" << fmt6(s.stddev) << " cells=" << s.count << '\n';
    }

    KvList flags = {{"train_bias", fmt17(opt.train_bias)},
                    {"train_n", std::to_string(opt.train_n)},
                    {"test_n", std::to_string(opt.test_n)},
                    {"grid", opt.grid},
                    {"methods", opt.methods},
                    {"repeats", std::to_string(opt.repeats)},
                    {"p_causal", std::to_string(opt.p_causal)},
                    {"p_noise", std::to_string(opt.p_noise)},
                    {"noise_scale", fmt17(opt.noise_scale)},
                    {"bias_feature", std::to_string(opt.bias_feature)},
                    {"lambda1", fmt17(cfg.params.crlr_hyper.lambda1)},
                    {"lambda2", fmt17(cfg.params.crlr_hyper.lambda2)},
                    {"lambda3", fmt17(cfg.params.crlr_hyper.lambda3)},
                    {"lambda4", fmt17(cfg.params.crlr_hyper.lambda4)},
                    {"lambda5", fmt17(cfg.params.crlr_hyper.lambda5)},
                    {"lr_l1", fmt17(opt.lr_l1)},
                    {"lr_l2", fmt17(opt.lr_l2)},
                    {"top_k", std::to_string(opt.top_k)},
                    {"grid_search", opt.grid_search.empty() ? "off" : opt.grid_search},
                    {"val_fraction", fmt17(opt.val_fraction)}};
    extras.push_back({"failed_repeats", std::to_string(result.failures.size())});
    write_manifest(common.out("sweep_manifest.txt"), "sweep", common, flags, {}, watch.ms(),
                   extras);
    return 0;
}

struct BalanceOpts {
    std::string data;
    std::string label = "y";
    std::string weights;  // empty = uniform 1/n
};

int run_balance(const CommonOpts& common, const BalanceOpts& opt) {
    Stopwatch watch;
    common.prepare();

    LoadReport load_report;
    const Dataset dataset = load_dataset(opt.data, opt.label, &load_report);
    for (const auto& w : load_report.warnings) std::cerr << "warning: " << w << '\n';

    Vector weights;
    if (opt.weights.empty()) {
        weights = Vector::Constant(dataset.n(), 1.0 / static_cast<double>(dataset.n()));
    } else {
        weights = load_weights_csv(opt.weights, dataset.n());
    }

    const IndicatorMatrix indicator = indicator_from_features(dataset);
    Hyperparams hyper;
    ExecPolicy policy{common.threads};
    const BalanceReport report =
        balancing_loss(dataset.features, indicator, weights, hyper.denom_epsilon, policy);

    write_balance_csv(common.out("balance.csv"), report, dataset.feature_names);

    KvList flags = {{"data", opt.data},
                    {"label", opt.label},
                    {"weights", opt.weights.empty() ? "uniform" : opt.weights}};
    KvList digests = {{"data", hex64(fnv1a64_file(opt.data))}};
    if (!opt.weights.empty()) digests.push_back({"weights", hex64(fnv1a64_file(opt.weights))});
    KvList extras = {{"total", fmt17(report.total)}};
    write_manifest(common.out("balance_manifest.txt"), "balance", common, flags, digests,
                   watch.ms(), extras);

    std::cout << "total=" << fmt17(report.total) << '\n';
    return 0;
}

void add_hyper_flags(CLI::App* cmd, Hyperparams& hyper) {
    cmd->add_option("--lambda1", hyper.lambda1, "Confounder balancing weight")
        ->capture_default_str();
    cmd->add_option("--lambda2", hyper.lambda2, "Sample weight L2 penalty")
        ->capture_default_str();
    cmd->add_option("--lambda3", hyper.lambda3, "Coefficient L2 penalty")->capture_default_str();
    cmd->add_option("--lambda4", hyper.lambda4, "Coefficient L1 penalty")->capture_default_str();
    cmd->add_option("--lambda5", hyper.lambda5, "Weight-sum anchor penalty")
        ->capture_default_str();
    cmd->add_option("--denom-epsilon", hyper.denom_epsilon,
                    "Floor for balancing denominators")
        ->capture_default_str();
}

void add_solver_flags(CLI::App* cmd, SolverConfig& solver) {
    cmd->add_option("--max-outer", solver.max_outer_iters, "Outer iteration cap")
        ->capture_default_str();
    cmd->add_option("--inner-beta", solver.inner_beta_iters, "Beta subproblem pass cap")
        ->capture_default_str();
    cmd->add_option("--inner-omega", solver.inner_omega_iters, "Omega subproblem pass cap")
        ->capture_default_str();
    cmd->add_option("--rel-tol", solver.rel_tol, "Relative objective change for convergence")
        ->capture_default_str();
    cmd->add_option("--armijo-shrink", solver.armijo_shrink, "Line search shrink factor")
        ->capture_default_str();
    cmd->add_option("--armijo-slope", solver.armijo_slope, "Line search slope parameter")
        ->capture_default_str();
    cmd->add_option("--initial-step", solver.initial_step, "Line search initial step")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causally regularized logistic regression toolkit"};
    app.require_subcommand(1);
    app.footer(kExitCodeDoc);
    app.set_config("--config", "",
                   "key=value config file; use [command] sections for command flags");

    CommonOpts common;
    app.add_option("--seed", common.seed, "Base seed for all randomness")->capture_default_str();
    app.add_option("--threads", common.threads, "Worker threads (1 = serial fixed-order)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out-dir", common.out_dir, "Directory for outputs and manifests")
        ->capture_default_str();

    auto* gen_cmd = app.add_subcommand("generate", "Write a biased synthetic dataset");
    gen_cmd->fallthrough();
    GenerateOpts gen_opts;
    gen_cmd->add_option("--n", gen_opts.n, "Selected sample count")->capture_default_str();
    gen_cmd->add_option("--pool", gen_opts.pool, "Pool size before selection (0 = auto)")
        ->capture_default_str();
    gen_cmd->add_option("--p-causal", gen_opts.p_causal, "Causal feature count")
        ->capture_default_str();
    gen_cmd->add_option("--p-noise", gen_opts.p_noise, "Noisy feature count")
        ->capture_default_str();
    gen_cmd->add_option("--bias-rate", gen_opts.bias_rate, "Selection bias rate in (0,1)")
        ->capture_default_str();
    gen_cmd->add_option("--noise-scale", gen_opts.noise_scale, "Outcome noise scale")
        ->capture_default_str();
    gen_cmd->add_option("--bias-feature", gen_opts.bias_feature,
                        "Index of the bias feature within the noisy block")
        ->capture_default_str();
    gen_cmd->add_option("--coeffs", gen_opts.coeffs,
                        "Comma-separated causal coefficients (default all ones)");
    gen_cmd->add_option("--name", gen_opts.name, "Output base name")->capture_default_str();

    auto* train_cmd = app.add_subcommand("train", "Fit the joint model on a CSV dataset");
    train_cmd->fallthrough();
    TrainOpts train_opts;
    train_cmd->add_option("--data", train_opts.data, "Training CSV")->required();
    train_cmd->add_option("--label", train_opts.label, "Label column name or 0-based index")
        ->capture_default_str();
    add_hyper_flags(train_cmd, train_opts.hyper);
    add_solver_flags(train_cmd, train_opts.solver);
    train_cmd->add_option("--model-out", train_opts.model_name, "Model file name")
        ->capture_default_str();

    auto* predict_cmd = app.add_subcommand("predict", "Score a CSV dataset with a saved model");
    predict_cmd->fallthrough();
    PredictOpts predict_opts;
    predict_cmd->add_option("--model", predict_opts.model, "Model file")->required();
    predict_cmd->add_option("--data", predict_opts.data, "Dataset CSV")->required();
    predict_cmd->add_option("--label", predict_opts.label, "Label column name or 0-based index")
        ->capture_default_str();
    predict_cmd->add_option("--threshold", predict_opts.threshold,
                            "Probability threshold for label 1")
        ->capture_default_str();
    predict_cmd->add_option("--pred-out", predict_opts.pred_name, "Predictions file name")
        ->capture_default_str();

    auto* sweep_cmd = app.add_subcommand("sweep", "Bias-shift robustness experiment");
    sweep_cmd->fallthrough();
    SweepOpts sweep_opts;
    sweep_cmd->add_option("--train-bias", sweep_opts.train_bias, "Training bias rate")
        ->capture_default_str();
    sweep_cmd->add_option("--train-n", sweep_opts.train_n, "Training sample count")
        ->capture_default_str();
    sweep_cmd->add_option("--test-n", sweep_opts.test_n, "Test sample count per grid point")
        ->capture_default_str();
    sweep_cmd->add_option("--grid", sweep_opts.grid, "Test bias rates: start:stop:step or list")
        ->capture_default_str();
    sweep_cmd
        ->add_option("--methods", sweep_opts.methods,
                     "Comma list from crlr,lr,lr_l1,two_step")
        ->capture_default_str();
    sweep_cmd->add_option("--repeats", sweep_opts.repeats, "Independent repeats")
        ->capture_default_str();
    sweep_cmd->add_option("--p-causal", sweep_opts.p_causal, "Causal feature count")
        ->capture_default_str();
    sweep_cmd->add_option("--p-noise", sweep_opts.p_noise, "Noisy feature count")
        ->capture_default_str();
    sweep_cmd->add_option("--noise-scale", sweep_opts.noise_scale, "Outcome noise scale")
        ->capture_default_str();
    sweep_cmd->add_option("--bias-feature", sweep_opts.bias_feature,
                          "Index of the bias feature within the noisy block")
        ->capture_default_str();
    add_hyper_flags(sweep_cmd, sweep_opts.hyper);
    add_solver_flags(sweep_cmd, sweep_opts.solver);
    sweep_cmd->add_option("--lr-l1", sweep_opts.lr_l1, "L1 penalty for the lr_l1 method")
        ->capture_default_str();
    sweep_cmd->add_option("--lr-l2", sweep_opts.lr_l2, "L2 penalty for lr and lr_l1")
        ->capture_default_str();
    sweep_cmd->add_option("--top-k", sweep_opts.top_k,
                          "two_step selected feature count (0 = ceil(p/2))")
        ->capture_default_str();
    sweep_cmd->add_option("--grid-search", sweep_opts.grid_search,
                          "Hyperparameter search, e.g. lambda1=0.5,1,2;lambda3=0.01,0.1");
    sweep_cmd->add_option("--val-fraction", sweep_opts.val_fraction,
                          "Held-out fraction for --grid-search")
        ->capture_default_str();

    auto* balance_cmd =
        app.add_subcommand("balance", "Balance diagnostics for a dataset and weight file");
    balance_cmd->fallthrough();
    BalanceOpts balance_opts;
    balance_cmd->add_option("--data", balance_opts.data, "Dataset CSV")->required();
    balance_cmd->add_option("--label", balance_opts.label, "Label column name or 0-based index")
        ->capture_default_str();
    balance_cmd->add_option("--weights", balance_opts.weights,
                            "Per-sample weight CSV (default uniform 1/n)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error kind=usage msg=\"" << e.what() << "\"\n";
        return 1;
    }

    try {
        if (gen_cmd->parsed()) return run_generate(common, gen_opts);
        if (train_cmd->parsed()) return run_train(common, train_opts);
        if (predict_cmd->parsed()) return run_predict(common, predict_opts);
        if (sweep_cmd->parsed()) return run_sweep(common, sweep_opts);
        if (balance_cmd->parsed()) return run_balance(common, balance_opts);
        std::cerr << "error kind=usage msg=\"no command\"\n";
        return 1;
    } catch (const io_error& e) {
        std::cerr << "error kind=io msg=\"" << e.what() << "\"\n";
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "error kind=parse msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "error kind=validation msg=\"" << e.what() << "\"\n";
        return 4;
    } catch (const numerical_error& e) {
        std::cerr << "error kind=numerical msg=\"" << e.what() << "\"\n";
        return 5;
    } catch (const generation_error& e) {
        std::cerr << "error kind=generation msg=\"" << e.what() << "\"\n";
        return 6;
    }
}
