#include "rashomon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rashomon {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master + (index + 1) * 0x9E3779B97F4A7C15ull;
    splitmix64(state);
    return splitmix64(state);
}

double NormalSampler::next() {
    // u1 in (0, 1] so the log is finite; u2 in [0, 1).
    const double scale = 0x1.0p-53;
    double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * scale;
    double u2 = static_cast<double>(engine_() >> 11) * scale;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

Partition ground_truth_partition(const SimulationSpec& spec) {
    if (spec.truth_sigmas.empty()) {
        throw std::invalid_argument("simulation spec has no ground-truth matrices");
    }
    return partition_from_sigmas_and_merges(spec.space, spec.truth_sigmas, spec.truth_merges);
}

std::vector<double> assign_pool_values(const FeatureSpace& space, const Partition& p,
                                       const std::vector<double>& pool_values) {
    if (pool_values.size() != p.pools.size()) {
        throw std::invalid_argument("one value per pool required");
    }
    std::vector<int> assignment = pool_assignment(space, p);
    std::vector<double> out(space.universe_size(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (assignment[k] < 0) throw std::invalid_argument("partition does not cover the universe");
        out[k] = pool_values[static_cast<std::size_t>(assignment[k])];
    }
    return out;
}

Dataset generate(const SimulationSpec& spec, std::uint64_t replication) {
    const std::size_t universe = spec.space.universe_size();
    if (spec.beta.size() != universe || spec.noise_sd.size() != universe ||
        spec.n_k.size() != universe) {
        throw std::invalid_argument("beta, noise_sd and n_k must cover every cell");
    }
    NormalSampler normals(derive_seed(spec.seed, replication));
    DatasetBuilder builder(spec.space);
    for (std::size_t k = 0; k < universe; ++k) {
        if (spec.n_k[k] < 0) throw std::invalid_argument("negative cell count");
        if (spec.noise_sd[k] < 0.0) throw std::invalid_argument("negative noise sd");
        for (std::int64_t t = 0; t < spec.n_k[k]; ++t) {
            builder.add(static_cast<CellIndex>(k), spec.beta[k] + spec.noise_sd[k] * normals.next());
        }
    }
    return builder.build();
}

namespace {

std::vector<PartitionMatrix> reference_sigmas(const FeatureSpace& space, const Dataset& d,
                                              const LossConfig& cfg, ReferenceKind kind) {
    switch (kind) {
        case ReferenceKind::fullsplit:
            return fullsplit_reference(space);
        case ReferenceKind::greedy:
            return greedy_reference(space, d, cfg);
        default:
            throw std::invalid_argument("file references are not available in simulations");
    }
}

// Highest fitted pool, skipping pools with no observations. Ties keep the
// first pool in canonical order.
int argmax_pool(const RpsEntry& entry) {
    int best = -1;
    double best_value = 0.0;
    for (std::size_t i = 0; i < entry.partition.pools.size(); ++i) {
        double v = entry.effects[entry.partition.pools[i].members.front()];
        if (std::isnan(v)) continue;
        if (best < 0 || v > best_value) {
            best = static_cast<int>(i);
            best_value = v;
        }
    }
    return best;
}

}  // namespace

RecoveryTable run_recovery_experiment(const SimulationSpec& spec, double lambda,
                                      const std::vector<double>& epsilon_grid, int replications,
                                      const RecoveryOptions& options) {
    if (replications <= 0) throw std::invalid_argument("replications must be positive");
    if (epsilon_grid.empty()) throw std::invalid_argument("empty epsilon grid");
    const FeatureSpace& space = spec.space;

    Partition truth = ground_truth_partition(spec);
    const std::string truth_key = partition_key(truth);

    // Best-outcome target: the profile holding the highest true mean (the
    // max-beta cell itself in single-profile mode).
    CellIndex best_cell = 0;
    for (CellIndex k = 1; k < space.universe_size(); ++k) {
        if (spec.beta[k] > spec.beta[best_cell]) best_cell = k;
    }
    const bool single = space.single_profile_mode();
    const ProfileMask best_profile = single ? 0 : profile_of_cell(space, best_cell);

    LossConfig cfg;
    cfg.lambda = lambda;
    cfg.outcome_model = OutcomeModel::constant;
    cfg.penalty = PenaltyKind::pool_count;
    cfg.empty_cells = options.empty_cells;

    const std::size_t g = epsilon_grid.size();
    std::vector<std::uint8_t> best_hit(static_cast<std::size_t>(replications) * g, 0);
    std::vector<std::uint8_t> exact_hit(static_cast<std::size_t>(replications) * g, 0);
    std::vector<double> used_epsilon(static_cast<std::size_t>(replications) * g, 0.0);
    std::exception_ptr failure = nullptr;

    int threads = options.threads > 0 ? options.threads : 1;
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) schedule(dynamic)
#endif
    for (int rep = 0; rep < replications; ++rep) {
        bool skip = false;
#ifdef _OPENMP
#pragma omp critical(rashomon_recovery_failure)
#endif
        skip = failure != nullptr;
        if (skip) continue;
        try {
            Dataset data = generate(spec, static_cast<std::uint64_t>(rep));
            std::vector<PartitionMatrix> ref = reference_sigmas(space, data, cfg, options.reference);
            Partition ref_partition = partition_from_sigmas(space, ref);
            double q0 = q_value(space, ref_partition, data, cfg);
            double mse_ref = q0 - lambda * static_cast<double>(ref_partition.pools.size());

            EnumerateOptions eopts;
            eopts.cross_profile = options.cross_profile;
            eopts.max_entries = options.max_entries;
            eopts.threads = 1;
            for (std::size_t gi = 0; gi < g; ++gi) {
                double epsilon = epsilon_grid[gi];
                if (options.grid_is_multiplier) {
                    epsilon = std::max(0.0, epsilon_grid[gi] * mse_ref / q0 - 1.0);
                }
                RashomonSet rps = enumerate_rps(space, data, cfg, q0, epsilon, eopts);
                std::size_t slot = static_cast<std::size_t>(rep) * g + gi;
                used_epsilon[slot] = epsilon;
                for (const RpsEntry& entry : rps.entries) {
                    if (!exact_hit[slot] && partition_key(entry.partition) == truth_key) {
                        exact_hit[slot] = 1;
                    }
                    if (!best_hit[slot]) {
                        int pool = argmax_pool(entry);
                        if (pool >= 0) {
                            const Pool& p = entry.partition.pools[static_cast<std::size_t>(pool)];
                            for (CellIndex member : p.members) {
                                bool hit = single ? member == best_cell
                                                  : profile_of_cell(space, member) == best_profile;
                                if (hit) {
                                    best_hit[slot] = 1;
                                    break;
                                }
                            }
                        }
                    }
                    if (best_hit[slot] && exact_hit[slot]) break;
                }
            }
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(rashomon_recovery_failure)
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    RecoveryTable table;
    table.replications = replications;
    table.rows.resize(g);
    for (std::size_t gi = 0; gi < g; ++gi) {
        RecoveryRow& row = table.rows[gi];
        row.grid_value = epsilon_grid[gi];
        double eps_sum = 0.0;
        int best = 0;
        int exact = 0;
        for (int rep = 0; rep < replications; ++rep) {
            std::size_t slot = static_cast<std::size_t>(rep) * g + gi;
            eps_sum += used_epsilon[slot];
            best += best_hit[slot];
            exact += exact_hit[slot];
        }
        row.mean_epsilon = eps_sum / static_cast<double>(replications);
        row.best_set_coverage = static_cast<double>(best) / static_cast<double>(replications);
        row.exact_truth_coverage = static_cast<double>(exact) / static_cast<double>(replications);
    }
    return table;
}

LinearTable run_linear_experiment(const SimulationSpec& spec, double lambda, double epsilon,
                                  const RecoveryOptions& options) {
    const FeatureSpace& space = spec.space;
    Dataset data = generate(spec, 0);

    LossConfig cfg;
    cfg.lambda = lambda;
    cfg.outcome_model = OutcomeModel::linear;
    cfg.penalty = PenaltyKind::pool_count;
    cfg.empty_cells = options.empty_cells;

    std::vector<PartitionMatrix> ref = reference_sigmas(space, data, cfg, options.reference);
    Partition ref_partition = partition_from_sigmas(space, ref);
    double q0 = q_value(space, ref_partition, data, cfg);

    EnumerateOptions eopts;
    eopts.cross_profile = options.cross_profile;
    eopts.max_entries = options.max_entries;
    eopts.threads = options.threads;
    RashomonSet rps = enumerate_rps(space, data, cfg, q0, epsilon, eopts);

    LinearTable table;
    table.q0 = rps.q0;
    table.theta = rps.theta;
    table.curves.reserve(rps.entries.size());
    for (const RpsEntry& entry : rps.entries) {
        LinearCurve curve;
        curve.q = entry.q;
        for (const Pool& pool : entry.partition.pools) {
            LinearFit fit = linear_pool_fit(space, pool, data, cfg.weights);
            curve.pool_coefs.push_back(fit.coef);
            curve.rank_deficient.push_back(fit.rank_deficient ? 1 : 0);
        }
        table.curves.push_back(std::move(curve));
    }
    return table;
}

}  // namespace rashomon
