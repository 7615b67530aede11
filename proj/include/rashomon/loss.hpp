#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rashomon/dataset.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/numeric.hpp"
#include "rashomon/partition.hpp"

namespace rashomon {

enum class OutcomeModel { constant, linear };
enum class PenaltyKind { pool_count, covariance_zeros };
enum class EmptyCellPolicy { strict, lenient };

struct LossConfig {
    double lambda = 0.0;
    OutcomeModel outcome_model = OutcomeModel::constant;
    PenaltyKind penalty = PenaltyKind::pool_count;
    EmptyCellPolicy empty_cells = EmptyCellPolicy::strict;
    // Optional per-cell weights (one per universe cell). Empty = unweighted.
    std::vector<double> weights;
};

class EmptyPoolError : public std::runtime_error {
public:
    explicit EmptyPoolError(const std::string& what) : std::runtime_error(what) {}
};

// Per-pool observation means; empty pools throw in strict mode and report
// NaN in lenient mode. Aligned with p.pools.
std::vector<double> pool_means(const Partition& p, const Dataset& d,
                               EmptyCellPolicy policy = EmptyCellPolicy::strict);

// (1/n) sum of squared deviations from pool means.
double mse_loss(const Partition& p, const Dataset& d);

// Same with per-cell weights; pools with zero total weight contribute zero.
double weighted_mse_loss(const Partition& p, const Dataset& d, const std::vector<double>& weights);

struct LinearFit {
    std::vector<double> coef;  // intercept first, then one slope per feature
    bool rank_deficient = false;
    double sse = 0.0;
};

// Least squares of y on (1, k) over a pool's observations; minimum-norm
// coefficients when the design is rank deficient.
LinearFit linear_pool_fit(const FeatureSpace& space, const Pool& pool, const Dataset& d,
                          const std::vector<double>& weights = {});

// Residual mass of one pool under cfg's outcome model and weights, before
// the 1/n scaling. `empty` marks pools without observations (lenient mode).
struct PoolLoss {
    double sse = 0.0;
    bool empty = false;
};

PoolLoss pool_loss(const FeatureSpace& space, const Pool& pool, const Dataset& d,
                   const LossConfig& cfg);

// Complexity penalty of a partition: lambda * |pools|, or for the covariance
// form lambda * (K^2 - sum of squared pool sizes) with K the covered cells.
double penalty_value(const Partition& p, const LossConfig& cfg);

// Penalized loss Q = loss + penalty.
double q_value(const FeatureSpace& space, const Partition& p, const Dataset& d,
               const LossConfig& cfg);

double rashomon_threshold(double q0, double epsilon);

// Relative regret of p against the reference loss q0.
double xi(const FeatureSpace& space, const Partition& p, const Dataset& d, const LossConfig& cfg,
          double q0);

// Largest pool count any set member can have: floor(q0 (1 + eps) / lambda).
std::int64_t max_pools(double q0, double epsilon, double lambda);

// Fitted value per universe cell (NaN for uncovered cells and empty pools).
std::vector<double> fitted_cell_values(const FeatureSpace& space, const Partition& p,
                                       const Dataset& d, const LossConfig& cfg);

}  // namespace rashomon
