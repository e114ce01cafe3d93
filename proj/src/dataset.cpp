#include "crlr/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "crlr/errors.hpp"

namespace crlr {

namespace {

bool is_binary_value(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

void Dataset::validate() const {
    if (features.rows() < 2 || features.cols() < 2) {
        throw validation_error("dataset requires n >= 2 and p >= 2, got n=" +
                               std::to_string(features.rows()) +
                               " p=" + std::to_string(features.cols()));
    }
    if (labels.size() != features.rows()) {
        throw validation_error("label count " + std::to_string(labels.size()) +
                               " does not match sample count " + std::to_string(features.rows()));
    }
    if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != features.cols()) {
        throw validation_error("feature_names size does not match feature count");
    }
    for (Index i = 0; i < features.rows(); ++i) {
        for (Index j = 0; j < features.cols(); ++j) {
            if (!is_binary_value(features(i, j))) {
                throw validation_error("feature entry at row " + std::to_string(i) + ", column " +
                                       std::to_string(j) + " is not 0/1");
            }
        }
    }
    for (Index i = 0; i < labels.size(); ++i) {
        if (!is_binary_value(labels[i])) {
            throw validation_error("label at row " + std::to_string(i) + " is not 0/1");
        }
    }
}

Index IndicatorMatrix::active_features() const {
    Index active = 0;
    for (bool d : degenerate) {
        if (!d) ++active;
    }
    return active;
}

Matrix binarize(const Matrix& real_values) {
    Matrix out(real_values.rows(), real_values.cols());
    for (Index i = 0; i < real_values.rows(); ++i) {
        for (Index j = 0; j < real_values.cols(); ++j) {
            const double v = real_values(i, j);
            if (!std::isfinite(v)) {
                throw validation_error("non-finite entry at row " + std::to_string(i) +
                                       ", column " + std::to_string(j));
            }
            out(i, j) = v >= 0.0 ? 1.0 : 0.0;
        }
    }
    return out;
}

Vector binarize(const Vector& real_values) {
    Vector out(real_values.size());
    for (Index i = 0; i < real_values.size(); ++i) {
        const double v = real_values[i];
        if (!std::isfinite(v)) {
            throw validation_error("non-finite entry at row " + std::to_string(i));
        }
        out[i] = v >= 0.0 ? 1.0 : 0.0;
    }
    return out;
}

IndicatorMatrix indicator_from_features(const Dataset& dataset) {
    dataset.validate();
    IndicatorMatrix ind;
    ind.entries = dataset.features;  // treatment status is feature presence
    const Index n = dataset.n();
    const Index p = dataset.p();
    ind.treated_count.assign(p, 0);
    ind.control_count.assign(p, 0);
    ind.degenerate.assign(p, false);
    for (Index j = 0; j < p; ++j) {
        Index treated = 0;
        for (Index i = 0; i < n; ++i) {
            if (ind.entries(i, j) == 1.0) ++treated;
        }
        ind.treated_count[j] = treated;
        ind.control_count[j] = n - treated;
        ind.degenerate[j] = (treated == 0 || treated == n);
    }
    return ind;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& raw, Index row, Index col) {
    const std::string s = strip(raw);
    if (s.empty()) {
        throw parse_error("empty cell at data row " + std::to_string(row) + ", column " +
                          std::to_string(col));
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw parse_error("non-numeric cell '" + s + "' at data row " + std::to_string(row) +
                          ", column " + std::to_string(col));
    }
    return v;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, const std::string& label_column,
                     LoadReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open dataset file: " + path.string());
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw parse_error("dataset file has no header row: " + path.string());
    }
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = strip(h);

    Index label_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == label_column) {
            label_idx = static_cast<Index>(j);
            break;
        }
    }
    if (label_idx < 0) {
        // Fall back to a 0-based column index.
        char* end = nullptr;
        const std::string stripped = strip(label_column);
        const long idx = std::strtol(stripped.c_str(), &end, 10);
        if (!stripped.empty() && end == stripped.c_str() + stripped.size() && idx >= 0 &&
            idx < static_cast<long>(header.size())) {
            label_idx = static_cast<Index>(idx);
        } else {
            throw parse_error("label column '" + label_column + "' not found in header of " +
                              path.string());
        }
    }

    const Index ncols = static_cast<Index>(header.size());
    std::vector<std::vector<double>> rows;
    Index row_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<Index>(cells.size()) != ncols) {
            throw parse_error("ragged row " + std::to_string(row_no) + ": expected " +
                              std::to_string(ncols) + " cells, got " +
                              std::to_string(cells.size()));
        }
        std::vector<double> values(ncols);
        for (Index j = 0; j < ncols; ++j) {
            values[j] = parse_cell(cells[static_cast<std::size_t>(j)], row_no, j);
        }
        rows.push_back(std::move(values));
        ++row_no;
    }

    const Index n = static_cast<Index>(rows.size());
    const Index p = ncols - 1;
    Dataset ds;
    ds.features.resize(n, p);
    ds.labels.resize(n);
    ds.feature_names.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < ncols; ++j) {
        if (j != label_idx) ds.feature_names.push_back(header[static_cast<std::size_t>(j)]);
    }
    for (Index i = 0; i < n; ++i) {
        Index col = 0;
        for (Index j = 0; j < ncols; ++j) {
            if (j == label_idx) {
                ds.labels[i] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            } else {
                ds.features(i, col++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
    }

    LoadReport local;
    LoadReport* rep = report ? report : &local;
    bool features_binary = true;
    for (Index i = 0; i < n && features_binary; ++i) {
        for (Index j = 0; j < p; ++j) {
            if (!is_binary_value(ds.features(i, j))) {
                features_binary = false;
                break;
            }
        }
    }
    if (!features_binary) {
        ds.features = binarize(ds.features);
        rep->features_binarized = true;
        rep->warnings.push_back("real-valued feature cells binarized with the >=0 rule");
    }
    bool labels_binary = true;
    for (Index i = 0; i < n; ++i) {
        if (!is_binary_value(ds.labels[i])) {
            labels_binary = false;
            break;
        }
    }
    if (!labels_binary) {
        ds.labels = binarize(ds.labels);
        rep->labels_binarized = true;
        rep->warnings.push_back("real-valued labels binarized with the >=0 rule");
    }

    ds.validate();
    return ds;
}

void save_dataset_csv(const std::filesystem::path& path, const Dataset& dataset,
                      const std::string& label_name) {
    dataset.validate();
    std::ofstream out(path, std::ios::binary);  // LF line endings
    if (!out) {
        throw io_error("cannot write dataset file: " + path.string());
    }
    const Index p = dataset.p();
    for (Index j = 0; j < p; ++j) {
        if (dataset.feature_names.empty()) {
            out << "x" << j;
        } else {
            out << dataset.feature_names[static_cast<std::size_t>(j)];
        }
        out << ',';
    }
    out << label_name << '\n';
    for (Index i = 0; i < dataset.n(); ++i) {
        for (Index j = 0; j < p; ++j) {
            out << static_cast<int>(dataset.features(i, j)) << ',';
        }
        out << static_cast<int>(dataset.labels[i]) << '\n';
    }
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

}  // namespace crlr
