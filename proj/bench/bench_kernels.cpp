// Timing comparison of the serial fixed-order balancing kernel against the
// OpenMP feature-parallel kernel, over a small grid of problem sizes.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <utility>
#include <vector>

#include "crlr/dataset.hpp"
#include "crlr/kernels.hpp"

using namespace crlr;

namespace {

struct Instance {
    Matrix X;
    IndicatorMatrix I;
    Vector W;
};

Instance make_instance(Index n, Index p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unif(0.1, 1.0);

    Instance inst;
    inst.X.resize(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            inst.X(i, j) = coin(rng) ? 1.0 : 0.0;
        }
    }
    // Guarantee both groups exist for every feature.
    for (Index j = 0; j < p; ++j) {
        inst.X(0, j) = 1.0;
        inst.X(1, j) = 0.0;
    }
    Dataset d;
    d.features = inst.X;
    d.labels = Vector::Zero(n);
    inst.I = indicator_from_features(d);
    inst.W.resize(n);
    for (Index i = 0; i < n; ++i) inst.W[i] = unif(rng);
    return inst;
}

double time_ms(const Instance& inst, int threads, int reps) {
    Vector losses(inst.X.cols());
    Vector grad(inst.X.rows());
    // Warm-up pass so page faults and thread spin-up stay out of the timing.
    balance_kernel(inst.X, inst.I.entries, inst.I.degenerate, inst.W, 1e-12, losses, &grad,
                   threads);

    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) {
        balance_kernel(inst.X, inst.I.entries, inst.I.degenerate, inst.W, 1e-12, losses, &grad,
                       threads);
    }
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() /
           static_cast<double>(reps);
}

}  // namespace

int main(int argc, char** argv) {
    int max_threads = 4;
    if (argc > 1) max_threads = std::atoi(argv[1]);
    if (max_threads < 1) max_threads = 1;

    const std::vector<std::pair<Index, Index>> sizes = {
        {500, 16}, {2000, 32}, {2000, 64}, {8000, 64}};

    std::printf("%8s %6s %10s", "n", "p", "serial_ms");
    for (int t = 2; t <= max_threads; t *= 2) std::printf("   omp_t%d_ms", t);
    std::printf("\n");

    for (const auto& [n, p] : sizes) {
        const Instance inst = make_instance(n, p, 42);
        const int reps = n * p > 100000 ? 5 : 20;
        const double serial = time_ms(inst, 1, reps);
        std::printf("%8lld %6lld %10.3f", static_cast<long long>(n), static_cast<long long>(p),
                    serial);
        for (int t = 2; t <= max_threads; t *= 2) {
            std::printf("  %10.3f", time_ms(inst, t, reps));
        }
        std::printf("\n");
    }

    // Agreement check: the parallel kernel must reproduce the serial result.
    const Instance inst = make_instance(2000, 32, 7);
    Vector loss1(inst.X.cols()), loss2(inst.X.cols());
    Vector g1(inst.X.rows()), g2(inst.X.rows());
    balance_kernel(inst.X, inst.I.entries, inst.I.degenerate, inst.W, 1e-12, loss1, &g1, 1);
    balance_kernel(inst.X, inst.I.entries, inst.I.degenerate, inst.W, 1e-12, loss2, &g2,
                   max_threads);
    const double diff =
        (loss1 - loss2).cwiseAbs().maxCoeff() + (g1 - g2).cwiseAbs().maxCoeff();
    std::printf("serial/parallel max abs diff: %.3e\n", diff);
    return diff < 1e-9 ? 0 : 1;
}
