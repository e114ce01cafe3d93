#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "crlr/dataset.hpp"
#include "crlr/errors.hpp"

using namespace crlr;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("binarize applies the >=0 rule, zero maps to 1") {
    Matrix m(2, 2);
    m << 0.7, -0.2, 0.0, 3.1;
    Matrix b = binarize(m);
    CHECK(b(0, 0) == 1.0);
    CHECK(b(0, 1) == 0.0);
    CHECK(b(1, 0) == 1.0);  // 0 >= 0
    CHECK(b(1, 1) == 1.0);
}

TEST_CASE("binarize maps all-negative to all-zero") {
    Matrix m = Matrix::Constant(3, 2, -1.5);
    Matrix b = binarize(m);
    CHECK(b.isZero(0.0));

    // Not idempotent: zeros in the output hit the >=0 rule on reapplication,
    // which is why the loader skips columns that are already 0/1.
    Matrix already(2, 2);
    already << 1, 0, 0, 1;
    CHECK(binarize(already) == Matrix::Ones(2, 2));
}

TEST_CASE("binarize rejects non-finite entries") {
    Matrix m(2, 2);
    m << 1.0, 0.0, std::numeric_limits<double>::quiet_NaN(), 1.0;
    CHECK_THROWS_AS(binarize(m), validation_error);

    Vector v(2);
    v << 0.5, std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(binarize(v), validation_error);
}

TEST_CASE("dataset validate enforces shape and binary entries") {
    Dataset d;
    d.features = Matrix::Zero(1, 3);
    d.labels = Vector::Zero(1);
    CHECK_THROWS_AS(d.validate(), validation_error);  // n < 2

    d.features = Matrix::Zero(3, 1);
    d.labels = Vector::Zero(3);
    CHECK_THROWS_AS(d.validate(), validation_error);  // p < 2

    d.features = Matrix::Zero(3, 2);
    d.features(1, 1) = 0.5;
    CHECK_THROWS_AS(d.validate(), validation_error);  // non-binary feature

    d.features(1, 1) = 1.0;
    d.labels[0] = 2.0;
    CHECK_THROWS_AS(d.validate(), validation_error);  // non-binary label

    d.labels[0] = 1.0;
    d.labels.conservativeResize(2);
    CHECK_THROWS_AS(d.validate(), validation_error);  // label count mismatch
}

TEST_CASE("indicator equals the feature matrix with group counts") {
    Dataset d;
    d.features.resize(2, 2);
    d.features << 1, 0, 0, 1;
    d.labels.resize(2);
    d.labels << 1, 0;
    IndicatorMatrix ind = indicator_from_features(d);
    CHECK(ind.entries == d.features);
    CHECK(ind.treated_count[0] == 1);
    CHECK(ind.control_count[0] == 1);
    CHECK_FALSE(ind.degenerate[0]);
    CHECK(ind.active_features() == 2);
}

TEST_CASE("constant columns are flagged degenerate") {
    Dataset d;
    d.features.resize(3, 3);
    d.features << 1, 1, 0,
                  0, 1, 0,
                  1, 1, 0;
    d.labels = Vector::Zero(3);
    IndicatorMatrix ind = indicator_from_features(d);
    CHECK_FALSE(ind.degenerate[0]);
    CHECK(ind.degenerate[1]);  // all treated
    CHECK(ind.treated_count[1] == 3);
    CHECK(ind.control_count[1] == 0);
    CHECK(ind.degenerate[2]);  // all control
    CHECK(ind.treated_count[2] == 0);
    CHECK(ind.active_features() == 1);
}

TEST_CASE("load_dataset parses a plain binary file") {
    const fs::path path = temp_file("crlr_test_plain.csv", "a,b,y\n1,0,1\n0,1,0\n1,1,1\n");
    Dataset d = load_dataset(path, "y");
    CHECK(d.n() == 3);
    CHECK(d.p() == 2);
    CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(d.features(0, 0) == 1.0);
    CHECK(d.features(1, 1) == 1.0);
    CHECK(d.labels[2] == 1.0);
}

TEST_CASE("load_dataset accepts a 0-based index when the name is absent") {
    const fs::path path = temp_file("crlr_test_idx.csv", "a,b,c\n1,0,1\n0,1,0\n");
    Dataset d = load_dataset(path, "1");  // column "b" by index
    CHECK(d.p() == 2);
    CHECK(d.feature_names == std::vector<std::string>{"a", "c"});
    CHECK(d.labels[0] == 0.0);
    CHECK(d.labels[1] == 1.0);
}

TEST_CASE("load_dataset error taxonomy") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/file.csv", "y"), io_error);

    const fs::path ragged = temp_file("crlr_test_ragged.csv", "a,b,y\n1,0,1\n0,1\n");
    CHECK_THROWS_AS(load_dataset(ragged, "y"), parse_error);

    const fs::path na = temp_file("crlr_test_na.csv", "a,b,y\n1,NA,1\n0,1,0\n");
    try {
        load_dataset(na, "y");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("NA") != std::string::npos);
        CHECK(msg.find("row 0") != std::string::npos);
        CHECK(msg.find("column 1") != std::string::npos);
    }

    const fs::path nolabel = temp_file("crlr_test_nolabel.csv", "a,b,c\n1,0,1\n0,1,0\n");
    CHECK_THROWS_AS(load_dataset(nolabel, "y"), parse_error);

    const fs::path empty = temp_file("crlr_test_empty.csv", "");
    CHECK_THROWS_AS(load_dataset(empty, "y"), parse_error);
}

TEST_CASE("load_dataset binarizes real-valued cells with a warning") {
    const fs::path path =
        temp_file("crlr_test_real.csv", "a,b,y\n0.7,-0.2,1\n0.0,3.1,-0.4\n");
    LoadReport report;
    Dataset d = load_dataset(path, "y", &report);
    CHECK(report.features_binarized);
    CHECK(report.labels_binarized);
    CHECK(report.warnings.size() == 2);
    CHECK(d.features(0, 0) == 1.0);
    CHECK(d.features(0, 1) == 0.0);
    CHECK(d.features(1, 0) == 1.0);
    CHECK(d.labels[1] == 0.0);
}

TEST_CASE("load_dataset is deterministic and round-trips through save") {
    const std::string content = "f0,f1,y\n1,0,1\n0,1,0\n1,1,1\n0,0,0\n";
    const fs::path path = temp_file("crlr_test_rt.csv", content);
    Dataset a = load_dataset(path, "y");
    Dataset b = load_dataset(path, "y");
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);

    const fs::path saved = fs::temp_directory_path() / "crlr_test_rt_out.csv";
    save_dataset_csv(saved, a, "y");
    CHECK(slurp(saved) == content);

    Dataset c = load_dataset(saved, "y");
    CHECK(c.features == a.features);
    CHECK(c.labels == a.labels);
    CHECK(c.feature_names == a.feature_names);
}

TEST_CASE("indicator_from_features is idempotent on its own dataset") {
    Dataset d;
    d.features.resize(4, 2);
    d.features << 1, 0, 0, 1, 1, 1, 0, 0;
    d.labels = Vector::Zero(4);
    IndicatorMatrix first = indicator_from_features(d);
    Dataset again;
    again.features = first.entries;
    again.labels = d.labels;
    IndicatorMatrix second = indicator_from_features(again);
    CHECK(first.entries == second.entries);
    CHECK(first.treated_count == second.treated_count);
}
