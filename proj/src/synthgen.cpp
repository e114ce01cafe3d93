#include "crlr/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "crlr/errors.hpp"
#include "crlr/numerics.hpp"

namespace crlr {

void SynthConfig::validate() const {
    if (n_pool < 1) throw validation_error("n_pool must be >= 1");
    if (p_causal < 1) throw validation_error("p_causal must be >= 1");
    if (p_noise < 1) throw validation_error("p_noise must be >= 1");
    if (!(bias_rate > 0.0 && bias_rate < 1.0)) {
        throw validation_error("bias_rate must be in (0,1)");
    }
    if (!(noise_scale >= 0.0)) throw validation_error("noise_scale must be >= 0");
    if (bias_feature_index < 0 || bias_feature_index >= p_noise) {
        throw validation_error("bias_feature_index must index the noisy block");
    }
    if (!causal_coefficients.empty() &&
        static_cast<int>(causal_coefficients.size()) != p_causal) {
        throw validation_error("causal_coefficients must have length p_causal");
    }
}

std::vector<double> SynthConfig::resolved_coefficients() const {
    if (!causal_coefficients.empty()) return causal_coefficients;
    return std::vector<double>(static_cast<std::size_t>(p_causal), 1.0);
}

SynthDataset generate(const SynthConfig& config) {
    config.validate();
    const Index n_pool = config.n_pool;
    const Index p = config.p();
    const std::vector<double> coeff = config.resolved_coefficients();

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SynthDataset out;
    out.config = config;
    out.bias_feature = static_cast<Index>(config.p_causal + config.bias_feature_index);
    for (int j = 0; j < config.p_causal; ++j) {
        out.causal_indices.push_back(j);
    }
    for (int j = 0; j < config.p_noise; ++j) {
        out.noisy_indices.push_back(config.p_causal + j);
    }

    // Raw Gaussian draws; the causal block feeds the outcome before
    // binarization so the label stays balanced.
    Matrix raw(n_pool, p);
    for (Index i = 0; i < n_pool; ++i) {
        for (Index j = 0; j < p; ++j) {
            raw(i, j) = gauss(rng);
        }
    }
    out.pool.features = binarize(raw);

    Vector y_real(n_pool);
    for (Index i = 0; i < n_pool; ++i) {
        double g = 0.0;
        for (int c = 0; c < config.p_causal; ++c) {
            g += raw(i, c) * coeff[static_cast<std::size_t>(c)];
        }
        y_real[i] = g + config.noise_scale * gauss(rng);
    }
    out.pool.labels = binarize(y_real);

    out.pool.feature_names.reserve(static_cast<std::size_t>(p));
    for (int j = 0; j < config.p_causal; ++j) {
        out.pool.feature_names.push_back("c" + std::to_string(j));
    }
    for (int j = 0; j < config.p_noise; ++j) {
        out.pool.feature_names.push_back("v" + std::to_string(j));
    }

    out.selected.assign(static_cast<std::size_t>(n_pool), false);
    Index kept = 0;
    for (Index i = 0; i < n_pool; ++i) {
        const bool agree = out.pool.features(i, out.bias_feature) == out.pool.labels[i];
        const double keep_prob = agree ? config.bias_rate : 1.0 - config.bias_rate;
        if (unif(rng) < keep_prob) {
            out.selected[static_cast<std::size_t>(i)] = true;
            ++kept;
        }
    }
    if (kept == 0) {
        throw generation_error("biased selection rejected every sample; increase n_pool");
    }

    out.data.features.resize(kept, p);
    out.data.labels.resize(kept);
    out.data.feature_names = out.pool.feature_names;
    Index row = 0;
    for (Index i = 0; i < n_pool; ++i) {
        if (!out.selected[static_cast<std::size_t>(i)]) continue;
        out.data.features.row(row) = out.pool.features.row(i);
        out.data.labels[row] = out.pool.labels[i];
        ++row;
    }
    return out;
}

Index pool_size_for(Index target_n) {
    // Selected fraction concentrates at 1/2; 6-sigma margin plus slack.
    const double t = static_cast<double>(target_n);
    return static_cast<Index>(std::ceil(2.0 * t + 12.0 * std::sqrt(t) + 64.0));
}

SynthDataset generate_n(SynthConfig config, Index target_n) {
    if (target_n < 2) throw validation_error("target_n must be >= 2");
    if (config.n_pool < 2 * target_n) {
        config.n_pool = pool_size_for(target_n);
    }
    SynthDataset out = generate(config);
    const Index kept = out.data.n();
    if (kept < target_n) {
        throw generation_error("selection produced " + std::to_string(kept) +
                               " samples, need " + std::to_string(target_n) +
                               "; increase n_pool");
    }
    out.data.features.conservativeResize(target_n, Eigen::NoChange);
    out.data.labels.conservativeResize(target_n);
    // Keep the selection flags consistent with the truncated dataset.
    Index seen = 0;
    for (std::size_t i = 0; i < out.selected.size(); ++i) {
        if (!out.selected[i]) continue;
        ++seen;
        if (seen > target_n) out.selected[i] = false;
    }
    return out;
}

std::vector<SynthDataset> resample_test_grid(const SynthConfig& config,
                                             const std::vector<double>& r_values) {
    std::vector<SynthDataset> out;
    out.reserve(r_values.size());
    for (std::size_t k = 0; k < r_values.size(); ++k) {
        SynthConfig c = config;
        c.bias_rate = r_values[k];
        c.seed = derive_seed(config.seed, 0x67726964ULL + k);  // per-grid-position stream
        out.push_back(generate(c));
    }
    return out;
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_synth(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                 const SynthDataset& synth) {
    save_dataset_csv(csv_path, synth.data, "y");

    std::ofstream meta(meta_path, std::ios::binary);
    if (!meta) {
        throw io_error("cannot write metadata file: " + meta_path.string());
    }
    meta << "n_pool=" << synth.config.n_pool << '\n';
    meta << "p_causal=" << synth.config.p_causal << '\n';
    meta << "p_noise=" << synth.config.p_noise << '\n';
    meta << "bias_rate=" << fmt17(synth.config.bias_rate) << '\n';
    meta << "noise_scale=" << fmt17(synth.config.noise_scale) << '\n';
    meta << "bias_feature_index=" << synth.config.bias_feature_index << '\n';
    meta << "seed=" << synth.config.seed << '\n';
    meta << "causal_coefficients=";
    const auto coeff = synth.config.resolved_coefficients();
    for (std::size_t k = 0; k < coeff.size(); ++k) {
        if (k) meta << ',';
        meta << fmt17(coeff[k]);
    }
    meta << '\n';
    meta << "selected_n=" << synth.data.n() << '\n';
    meta << "bias_feature_column=" << synth.bias_feature << '\n';
    meta << "causal_indices=";
    for (std::size_t k = 0; k < synth.causal_indices.size(); ++k) {
        if (k) meta << ',';
        meta << synth.causal_indices[k];
    }
    meta << '\n';
    meta << "noisy_indices=";
    for (std::size_t k = 0; k < synth.noisy_indices.size(); ++k) {
        if (k) meta << ',';
        meta << synth.noisy_indices[k];
    }
    meta << '\n';
    if (!meta) {
        throw io_error("write failed: " + meta_path.string());
    }
}

}  // namespace crlr
