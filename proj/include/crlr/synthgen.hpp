#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "crlr/dataset.hpp"

namespace crlr {

/// Generation law for the biased synthetic data: i.i.d. Gaussian draws split
/// into a causal block and a noisy block, both binarized with the >=0 rule.
/// The real-valued outcome is the causal draws dotted with
/// causal_coefficients plus N(0, noise_scale) noise, binarized with the same
/// rule. Each pool sample is then kept with probability bias_rate when the
/// designated noisy feature agrees with the label, and 1 - bias_rate
/// otherwise.
struct SynthConfig {
    Index n_pool = 5000;
    int p_causal = 10;
    int p_noise = 10;
    double bias_rate = 0.85;                  // in (0,1); 0.5 is unbiased
    double noise_scale = 1.0;                 // >= 0
    std::vector<double> causal_coefficients;  // empty means all ones
    int bias_feature_index = 0;               // index into the noisy block
    std::uint64_t seed = 0;

    Index p() const { return static_cast<Index>(p_causal + p_noise); }
    void validate() const;
    std::vector<double> resolved_coefficients() const;
};

struct SynthDataset {
    Dataset data;  // selected samples only
    std::vector<Index> causal_indices;
    std::vector<Index> noisy_indices;
    Index bias_feature = 0;  // global column index of the designated noisy feature
    Dataset pool;            // the full pre-selection pool
    std::vector<bool> selected;  // per pool sample
    SynthConfig config;
};

SynthDataset generate(const SynthConfig& config);

// generate() followed by truncation to exactly target_n selected samples
// (pool order); raises generation_error when selection comes up short.
SynthDataset generate_n(SynthConfig config, Index target_n);

// Pool size that reaches target_n selected samples with comfortable margin
// (expected selected fraction is 1/2 for any bias rate).
Index pool_size_for(Index target_n);

// One dataset per bias rate, same law, independent draws; seeds derived
// deterministically from (config.seed, grid position).
std::vector<SynthDataset> resample_test_grid(const SynthConfig& config,
                                             const std::vector<double>& r_values);

// CSV dataset plus a key=value sidecar recording the config and ground truth.
void write_synth(const std::filesystem::path& csv_path,
                 const std::filesystem::path& meta_path, const SynthDataset& synth);

}  // namespace crlr
