#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

namespace crlr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Binary design matrix plus binary labels. Entries are stored as doubles
/// but must be exactly 0.0 or 1.0; validate() enforces that along with
/// n >= 2, p >= 2.
struct Dataset {
    Matrix features;                         // n x p, entries in {0,1}
    Vector labels;                           // n, entries in {0,1}
    std::vector<std::string> feature_names;  // empty or size p

    Index n() const { return features.rows(); }
    Index p() const { return features.cols(); }

    void validate() const;
};

/// Treatment-status matrix: column j is the treated/control indicator when
/// feature j is taken as treatment. For binary data this equals the feature
/// matrix; the per-feature group counts and degeneracy flags are what the
/// rest of the pipeline consumes.
struct IndicatorMatrix {
    Matrix entries;  // n x p, equals the binary feature matrix
    std::vector<Index> treated_count;  // size p
    std::vector<Index> control_count;  // size p
    std::vector<bool> degenerate;      // true when either group is empty

    Index n() const { return entries.rows(); }
    Index p() const { return entries.cols(); }
    Index active_features() const;
};

// Threshold rule from the synthetic protocol: 1 where value >= 0, else 0.
// Rejects non-finite input.
Matrix binarize(const Matrix& real_values);
Vector binarize(const Vector& real_values);

IndicatorMatrix indicator_from_features(const Dataset& dataset);

struct LoadReport {
    bool features_binarized = false;
    bool labels_binarized = false;
    std::vector<std::string> warnings;
};

// CSV ingestion: UTF-8, comma separated, mandatory header row, one sample
// per row. label_column is a header name, or a 0-based column index when the
// name does not appear in the header and parses as an integer. Real-valued
// cells trigger binarization with a warning in the report.
Dataset load_dataset(const std::filesystem::path& path, const std::string& label_column,
                     LoadReport* report = nullptr);

void save_dataset_csv(const std::filesystem::path& path, const Dataset& dataset,
                      const std::string& label_name = "y");

}  // namespace crlr
