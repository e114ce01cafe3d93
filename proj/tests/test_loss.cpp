#include <doctest.h>

#include <cmath>
#include <random>

#include "crlr/dataset.hpp"
#include "crlr/errors.hpp"
#include "crlr/loss.hpp"
#include "oracles.hpp"

using namespace crlr;

namespace {

IndicatorMatrix make_indicator(const Matrix& X) {
    Dataset d;
    d.features = X;
    d.labels = Vector::Zero(X.rows());
    return indicator_from_features(d);
}

}  // namespace

TEST_CASE("weighted logistic loss at beta=0 is weight-sum times log 2") {
    Matrix X(3, 2);
    X << 1, 0, 0, 1, 1, 1;
    Vector Y(3);
    Y << 1, 0, 1;
    Vector W = Vector::Ones(3);
    const double got = weighted_logistic_loss(X, Y, Vector::Zero(2), W);
    CHECK(got == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("correctly classified sample with huge margin has vanishing loss") {
    Matrix X(1, 2);
    X << 1, 0;
    Vector Y(1);
    Y << 1;
    Vector beta(2);
    beta << 50, 0;
    Vector W = Vector::Ones(1);
    CHECK(weighted_logistic_loss(X, Y, beta, W) < 1e-20);
}

TEST_CASE("weighted logistic loss matches the explicit-loop oracle value") {
    Matrix X(2, 2);
    X << 1, 0, 0, 1;
    Vector Y(2);
    Y << 1, 0;
    Vector beta(2);
    beta << 1, -1;
    Vector W = Vector::Constant(2, 0.5);
    // Both samples contribute 0.5 * softplus(-1); frozen from the oracle.
    const double expected = 0.31326168751822286;
    CHECK(weighted_logistic_loss(X, Y, beta, W) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(oracle::logistic_loss(X, Y, beta, W) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("weighted logistic loss survives extreme margins without overflow") {
    Matrix X(1, 2);
    X << 1, 1;
    Vector Y(1);
    Y << 0;
    Vector beta(2);
    beta << 5000, 5000;  // z = 1e4
    Vector W = Vector::Ones(1);
    const double v = weighted_logistic_loss(X, Y, beta, W);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(10000.0).epsilon(1e-12));
}

TEST_CASE("balanced design has exactly zero balancing loss") {
    Matrix X(4, 2);
    X << 1, 0, 1, 1, 0, 0, 0, 1;
    IndicatorMatrix ind = make_indicator(X);
    Vector W = Vector::Constant(4, 0.25);
    BalanceReport report = balancing_loss(X, ind, W, 1e-12);
    CHECK(report.total == 0.0);
    CHECK(report.per_feature_loss[0] == 0.0);
    CHECK(report.per_feature_loss[1] == 0.0);
}

TEST_CASE("balancing loss matches the frozen per-feature oracle values") {
    Matrix X(3, 2);
    X << 1, 1, 1, 0, 0, 0;
    IndicatorMatrix ind = make_indicator(X);
    Vector W = Vector::Ones(3);
    BalanceReport report = balancing_loss(X, ind, W, 1e-12);
    // Feature 0: treated mean of col 1 is 0.5, control 0 -> 0.25.
    // Feature 1: treated mean of col 0 is 1, control 0.5 -> 0.25.
    CHECK(report.per_feature_loss[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(report.per_feature_loss[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(report.total == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(report.total ==
          doctest::Approx(oracle::balance_total(X, ind.degenerate, W, 1e-12)).epsilon(1e-13));
}

TEST_CASE("balancing loss is invariant under positive weight scaling") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        Matrix X = oracle::random_binary(rng, 12, 5);
        IndicatorMatrix ind = make_indicator(X);
        Vector W(12);
        for (Index i = 0; i < 12; ++i) W[i] = unif(rng);
        BalanceReport a = balancing_loss(X, ind, W, 1e-12);
        BalanceReport b = balancing_loss(X, ind, Vector(3.0 * W), 1e-12);
        CHECK(std::abs(a.total - b.total) <= 1e-12 * std::max(1.0, std::abs(a.total)));
    }
}

TEST_CASE("degenerate features are skipped and flagged") {
    Matrix X(3, 3);
    X << 1, 1, 0,
         0, 1, 0,
         1, 1, 0;
    IndicatorMatrix ind = make_indicator(X);
    Vector W = Vector::Ones(3);
    BalanceReport report = balancing_loss(X, ind, W, 1e-12);
    CHECK_FALSE(report.skipped[0]);
    CHECK(report.skipped[1]);
    CHECK(report.skipped[2]);
    CHECK(report.per_feature_loss[1] == 0.0);
    CHECK(report.total == doctest::Approx(report.per_feature_loss[0]));
}

TEST_CASE("all-degenerate design raises a validation error") {
    Matrix X(3, 2);
    X << 1, 0, 1, 0, 1, 0;
    IndicatorMatrix ind = make_indicator(X);
    Vector W = Vector::Ones(3);
    CHECK_THROWS_AS(balancing_loss(X, ind, W, 1e-12), validation_error);
}

TEST_CASE("objective with all lambdas zero equals the logistic loss") {
    std::mt19937_64 rng(5);
    Matrix X = oracle::random_binary(rng, 10, 4);
    Vector Y = oracle::random_labels(rng, 10);
    IndicatorMatrix ind = make_indicator(X);
    Vector beta = Vector::Random(4);
    Vector omega = Vector::Random(10).cwiseAbs();
    Hyperparams h;
    h.lambda1 = h.lambda2 = h.lambda3 = h.lambda4 = h.lambda5 = 0.0;
    ObjectiveBreakdown br = objective(X, Y, ind, beta, omega, h);
    const Vector W = omega.cwiseProduct(omega);
    CHECK(br.total == doctest::Approx(weighted_logistic_loss(X, Y, beta, W)).epsilon(1e-14));
    CHECK(br.balance == 0.0);
    CHECK(br.w_norm == 0.0);
}

TEST_CASE("objective breakdown sums to the total and matches the oracle") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix X = oracle::random_binary(rng, 15, 6);
        Vector Y = oracle::random_labels(rng, 15);
        IndicatorMatrix ind = make_indicator(X);
        Vector beta = Vector::Random(6);
        Vector omega = Vector::Random(15);
        Hyperparams h;
        h.lambda1 = 0.7;
        h.lambda2 = 0.3;
        h.lambda3 = 0.05;
        h.lambda4 = 0.02;
        h.lambda5 = 1.3;
        ObjectiveBreakdown br = objective(X, Y, ind, beta, omega, h);
        const double parts =
            br.logistic + br.balance + br.w_norm + br.beta_ridge + br.beta_lasso + br.w_sum;
        CHECK(br.total == doctest::Approx(parts).epsilon(1e-12));

        oracle::Hyper oh{h.lambda1, h.lambda2, h.lambda3, h.lambda4, h.lambda5, h.denom_epsilon};
        CHECK(br.total ==
              doctest::Approx(oracle::objective(X, Y, ind.degenerate, beta, omega, oh))
                  .epsilon(1e-12));
    }
}

TEST_CASE("grad_smooth_beta closed forms") {
    std::mt19937_64 rng(23);
    Matrix X = oracle::random_binary(rng, 8, 3);
    Vector Y = oracle::random_labels(rng, 8);
    Vector W = Vector::Random(8).cwiseAbs();

    // sigma(0) = 1/2 collapses the gradient at beta = 0.
    Vector g0 = grad_smooth_beta(X, Y, Vector::Zero(3), W, 0.0);
    Vector expected = Vector::Zero(3);
    for (Index i = 0; i < 8; ++i) {
        expected += 0.5 * W[i] * (1.0 - 2.0 * Y[i]) * X.row(i).transpose();
    }
    CHECK((g0 - expected).cwiseAbs().maxCoeff() < 1e-14);

    // Zero weights leave only the ridge term.
    Vector beta = Vector::Random(3);
    Vector gz = grad_smooth_beta(X, Y, beta, Vector::Zero(8), 0.4);
    CHECK((gz - 0.8 * beta).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("grad_smooth_beta matches central finite differences") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 25; ++rep) {
        const Index n = 12, p = 5;
        Matrix X = oracle::random_binary(rng, n, p);
        Vector Y = oracle::random_labels(rng, n);
        Vector W = Vector::Random(n).cwiseAbs();
        Vector beta = Vector::Random(p);
        const double l3 = 0.13;
        Vector g = grad_smooth_beta(X, Y, beta, W, l3);
        Vector fd = oracle::fd_grad(
            [&](const Vector& b) {
                return oracle::logistic_loss(X, Y, b, W) + l3 * b.squaredNorm();
            },
            beta);
        const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
        CHECK((g - fd).cwiseAbs().maxCoeff() / scale < 1e-6);
    }
}

TEST_CASE("grad_omega reduces to the logistic term when lambdas vanish") {
    std::mt19937_64 rng(37);
    Matrix X = oracle::random_binary(rng, 9, 4);
    Vector Y = oracle::random_labels(rng, 9);
    IndicatorMatrix ind = make_indicator(X);
    Vector omega = Vector::Random(9);
    Hyperparams h;
    h.lambda1 = h.lambda2 = h.lambda5 = 0.0;
    Vector g = grad_omega(X, Y, ind, Vector::Zero(4), omega, h);
    Vector expected = 2.0 * std::log(2.0) * omega;
    CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("weight-sum penalty contributes nothing at its root") {
    std::mt19937_64 rng(41);
    Matrix X = oracle::random_binary(rng, 8, 3);
    Vector Y = oracle::random_labels(rng, 8);
    IndicatorMatrix ind = make_indicator(X);
    Vector omega = Vector::Random(8).cwiseAbs() + Vector::Constant(8, 0.1);
    omega /= omega.norm();  // sum of squared omegas = 1, the penalty root
    REQUIRE(std::abs(omega.squaredNorm() - 1.0) < 1e-12);
    Vector beta = Vector::Random(3);

    Hyperparams base;
    base.lambda5 = 0.0;
    Hyperparams bumped = base;
    bumped.lambda5 = 7.0;
    Vector g0 = grad_omega(X, Y, ind, beta, omega, base);
    Vector g7 = grad_omega(X, Y, ind, beta, omega, bumped);
    CHECK((g0 - g7).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("grad_omega matches central finite differences of the objective") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> lam(0.0, 1.0);
    std::uniform_real_distribution<double> om(0.1, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        const Index n = 14, p = 5;
        Matrix X = oracle::random_binary(rng, n, p);
        Vector Y = oracle::random_labels(rng, n);
        IndicatorMatrix ind = make_indicator(X);
        Vector beta = Vector::Random(p);
        Vector omega(n);
        for (Index i = 0; i < n; ++i) omega[i] = om(rng);
        Hyperparams h;
        h.lambda1 = lam(rng);
        h.lambda2 = lam(rng);
        h.lambda3 = lam(rng);
        h.lambda4 = lam(rng);
        h.lambda5 = lam(rng);

        Vector g = grad_omega(X, Y, ind, beta, omega, h);
        oracle::Hyper oh{h.lambda1, h.lambda2, h.lambda3, h.lambda4, h.lambda5, h.denom_epsilon};
        Vector fd = oracle::fd_grad(
            [&](const Vector& w) {
                return oracle::objective(X, Y, ind.degenerate, beta, w, oh);
            },
            omega);
        const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
        CHECK((g - fd).cwiseAbs().maxCoeff() / scale < 1e-5);
    }
}

TEST_CASE("weighted logistic loss is midpoint-convex in beta") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 30; ++rep) {
        Matrix X = oracle::random_binary(rng, 10, 4);
        Vector Y = oracle::random_labels(rng, 10);
        Vector W = Vector::Random(10).cwiseAbs();
        Vector a = 2.0 * Vector::Random(4);
        Vector b = 2.0 * Vector::Random(4);
        const double mid = weighted_logistic_loss(X, Y, Vector(0.5 * (a + b)), W);
        const double avg = 0.5 * (weighted_logistic_loss(X, Y, a, W) +
                                  weighted_logistic_loss(X, Y, b, W));
        CHECK(mid <= avg + 1e-12);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    Matrix X(3, 2);
    X << 1, 0, 0, 1, 1, 1;
    Vector Y(3);
    Y << 1, 0, 1;
    CHECK_THROWS_AS(weighted_logistic_loss(X, Y, Vector::Zero(3), Vector::Ones(3)),
                    validation_error);
    CHECK_THROWS_AS(weighted_logistic_loss(X, Y, Vector::Zero(2), Vector::Ones(2)),
                    validation_error);
    CHECK_THROWS_AS(grad_smooth_beta(X, Y, Vector::Zero(5), Vector::Ones(3), 0.0),
                    validation_error);
}
