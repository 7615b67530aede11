#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rashomon/dataset.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/partition.hpp"
#include "rashomon/rps.hpp"

namespace rashomon {

std::uint64_t splitmix64(std::uint64_t& state);

// Stream seed for one replication; replications draw from disjoint streams
// derived from (master, index) so parallel order cannot matter.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Box-Muller on mt19937_64 uniforms. std::normal_distribution is not
// portable across standard libraries; reproducibility is contractual here.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}
    double next();

private:
    std::mt19937_64 engine_;
};

struct SimulationSpec {
    FeatureSpace space;
    // Ground truth, as matrices per profile plus cross-profile merge groups
    // of (profile position, local pool position). May be left empty when
    // only beta/noise maps matter.
    std::vector<PartitionMatrix> truth_sigmas;
    std::vector<std::vector<std::pair<int, int>>> truth_merges;
    std::vector<double> beta;           // per cell
    std::vector<double> noise_sd;       // per cell
    std::vector<std::int64_t> n_k;      // per cell
    std::uint64_t seed = 0;
    int replications = 1;
};

// The simulation spec's ground-truth matrices and merges as one partition.
Partition ground_truth_partition(const SimulationSpec& spec);

// Per-cell vector from one value per pool (pools in canonical order).
std::vector<double> assign_pool_values(const FeatureSpace& space, const Partition& p,
                                       const std::vector<double>& pool_values);

// Synthetic outcomes y ~ N(beta_cell, sd_cell^2), n_k per cell, drawn in
// cell order from the replication's stream.
Dataset generate(const SimulationSpec& spec, std::uint64_t replication = 0);

struct RecoveryOptions {
    ReferenceKind reference = ReferenceKind::fullsplit;
    bool cross_profile = true;
    EmptyCellPolicy empty_cells = EmptyCellPolicy::strict;
    // When positive, epsilon_grid entries are loss multipliers: the working
    // threshold becomes multiplier * reference loss (epsilon derived per
    // replication). When zero, grid entries are epsilons directly.
    bool grid_is_multiplier = false;
    std::size_t max_entries = 0;
    int threads = 1;
};

struct RecoveryRow {
    double grid_value = 0.0;        // epsilon, or loss multiplier
    double mean_epsilon = 0.0;      // epsilon actually used, averaged
    double best_set_coverage = 0.0;
    double exact_truth_coverage = 0.0;
};

struct RecoveryTable {
    int replications = 0;
    std::vector<RecoveryRow> rows;
};

// Repeatedly regenerates data and enumerates the set: per grid value, the
// fraction of replications whose set covers the best-outcome feature set
// (some entry's highest-mean pool touches the best profile) and the
// fraction containing the exact ground truth.
RecoveryTable run_recovery_experiment(const SimulationSpec& spec, double lambda,
                                      const std::vector<double>& epsilon_grid, int replications,
                                      const RecoveryOptions& options = {});

struct LinearCurve {
    double q = 0.0;
    std::vector<std::vector<double>> pool_coefs;  // per pool, intercept first
    std::vector<std::uint8_t> rank_deficient;
};

struct LinearTable {
    double q0 = 0.0;
    double theta = 0.0;
    std::vector<LinearCurve> curves;  // ascending q
};

// Enumerates the set under the per-pool linear model and reports every
// entry's fitted pool coefficients.
LinearTable run_linear_experiment(const SimulationSpec& spec, double lambda, double epsilon,
                                  const RecoveryOptions& options = {});

}  // namespace rashomon
