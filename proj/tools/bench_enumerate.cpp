#include <chrono>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rashomon/io.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/rps.hpp"

using namespace rashomon;

namespace {

double run_once(const FeatureSpace& space, const Dataset& data, const LossConfig& cfg, double q0,
                double epsilon, bool cross, int threads, RashomonSet& out) {
    EnumerateOptions opts;
    opts.cross_profile = cross;
    opts.threads = threads;
    auto start = std::chrono::steady_clock::now();
    out = enumerate_rps(space, data, cfg, q0, epsilon, opts);
    auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compare threaded and serial enumeration on synthetic data"};
    std::vector<int> levels{3, 3};
    bool single = false;
    bool no_cross = false;
    double lambda = 0.02;
    double epsilon = 0.1;
    int nk = 5;
    std::uint64_t seed = 11;
    std::vector<int> thread_counts{1, 2, 4, 8};
    int repeats = 3;
    app.add_option("--levels", levels, "levels per feature");
    app.add_flag("--single-profile", single, "single-profile mode");
    app.add_flag("--no-cross-profile", no_cross, "disable cross-profile pooling");
    app.add_option("--lambda", lambda);
    app.add_option("--epsilon", epsilon);
    app.add_option("--nk", nk, "observations per cell");
    app.add_option("--seed", seed);
    app.add_option("--threads", thread_counts, "thread counts to time");
    app.add_option("--repeats", repeats, "timed repeats per count (best kept)");
    CLI11_PARSE(app, argc, argv);

    FeatureSpace space(levels, single);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    DatasetBuilder builder(space);
    for (CellIndex k = 0; k < space.universe_size(); ++k)
        for (int t = 0; t < nk; ++t)
            builder.add(k, noise(rng) + 0.5 * static_cast<double>(k % 4));
    Dataset data = builder.build();

    LossConfig cfg;
    cfg.lambda = lambda;
    double q0 = q_value(space, partition_from_sigmas(space, fullsplit_reference(space)), data, cfg);

    RashomonSet baseline;
    double serial_ms = run_once(space, data, cfg, q0, epsilon, !no_cross, 1, baseline);
    std::cout << "universe=" << space.universe_size() << " entries=" << baseline.entries.size()
              << " q0=" << format_double(q0) << "\n";
    std::cout << "threads,best_ms,speedup,identical\n";
    for (int threads : thread_counts) {
        RashomonSet result;
        double best = -1.0;
        for (int r = 0; r < repeats; ++r) {
            double ms = run_once(space, data, cfg, q0, epsilon, !no_cross, threads, result);
            if (best < 0.0 || ms < best) best = ms;
        }
        bool same = result.entries.size() == baseline.entries.size();
        if (same)
            for (std::size_t i = 0; i < result.entries.size(); ++i)
                if (partition_key(result.entries[i].partition) !=
                        partition_key(baseline.entries[i].partition) ||
                    result.entries[i].q != baseline.entries[i].q) {
                    same = false;
                    break;
                }
        std::cout << threads << "," << best << "," << (threads == 1 ? 1.0 : serial_ms / best) << ","
                  << (same ? "yes" : "NO") << "\n";
        if (!same) return 1;
    }
    return 0;
}
