#include "rashomon/bounds.hpp"

#include <stdexcept>

namespace rashomon {

namespace {

struct BoundParts {
    double fixed = 0.0;
    double equivalent = 0.0;
};

void check_shapes(const PartitionMatrix& sigma, const FixedIndexSet& fixed) {
    if (sigma.profile != fixed.profile || sigma.rows.size() != fixed.fixed.size())
        throw std::invalid_argument("fixed-index set does not match sigma");
    for (std::size_t i = 0; i < sigma.rows.size(); ++i)
        if (sigma.rows[i].size() != fixed.fixed[i].size())
            throw std::invalid_argument("fixed-index set does not match sigma");
}

BoundParts bound_parts(const FeatureSpace& space, const PartitionMatrix& sigma,
                       const FixedIndexSet& fixed, const Dataset& d, const LossConfig& cfg) {
    check_shapes(sigma, fixed);
    const auto active = space.active_features(sigma.profile);

    // Mask sigma to its decided entries; undecided gaps read as splits.
    PartitionMatrix masked = sigma;
    for (std::size_t i = 0; i < masked.rows.size(); ++i)
        for (std::size_t j = 0; j < masked.rows[i].size(); ++j)
            if (!fixed.fixed[i][j]) masked.rows[i][j] = 0;

    // A group is stable when both boundary gaps are decided or at the lattice
    // edge: no completion of the undecided entries can change it.
    std::vector<std::vector<int>> group_of(active.size());
    std::vector<std::vector<bool>> group_stable(active.size());
    std::vector<int> group_counts(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
        const int entries = space.levels_in_profile(active[i]) - 1;
        const auto groups = level_groups(masked.rows[i], entries);
        group_counts[i] = static_cast<int>(groups.size());
        group_of[i].assign(static_cast<std::size_t>(entries) + 2, -1);
        group_stable[i].resize(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto [a, b] = groups[g];
            for (int lv = a; lv <= b; ++lv) group_of[i][lv] = static_cast<int>(g);
            const bool left = a == 1 || fixed.fixed[i][a - 2];
            const bool right = b == entries + 1 || fixed.fixed[i][b - 1];
            group_stable[i][g] = left && right;
        }
    }

    std::size_t total = 1;
    for (int c : group_counts) total *= static_cast<std::size_t>(c);
    std::vector<Pool> pools(total);
    for (CellIndex c : space.profile_cells(sigma.profile)) {
        const auto k = space.cell_at(c);
        std::size_t bucket = 0, stride = 1;
        for (std::size_t i = 0; i < active.size(); ++i) {
            bucket += stride * static_cast<std::size_t>(group_of[i][k[active[i]]]);
            stride *= static_cast<std::size_t>(group_counts[i]);
        }
        pools[bucket].members.push_back(c);
    }
    // A pool is stable iff every factor group is.
    std::vector<bool> pool_stable(total);
    for (std::size_t bucket = 0; bucket < total; ++bucket) {
        std::size_t rest = bucket;
        bool stable = true;
        for (std::size_t i = 0; i < active.size(); ++i) {
            stable = stable && group_stable[i][rest % group_counts[i]];
            rest /= group_counts[i];
        }
        pool_stable[bucket] = stable;
    }

    BoundParts parts;
    NeumaierSum stable_loss, unstable_loss;
    std::int64_t stable_count = 0;
    for (std::size_t bucket = 0; bucket < total; ++bucket) {
        const double sse = pool_loss(space, pools[bucket], d, cfg).sse;
        if (pool_stable[bucket]) {
            stable_loss.add(sse);
            ++stable_count;
        } else {
            unstable_loss.add(sse);
        }
    }

    const double n = static_cast<double>(d.total_n());
    if (d.total_n() <= 0) throw std::invalid_argument("dataset has no observations");

    double penalty_floor;
    if (cfg.penalty == PenaltyKind::pool_count) {
        penalty_floor = cfg.lambda * static_cast<double>(stable_count);
    } else {
        // The covariance penalty grows under refinement, so the coarsest
        // completion (all undecided gaps pooled) carries the minimum.
        PartitionMatrix coarsest = sigma;
        for (std::size_t i = 0; i < coarsest.rows.size(); ++i)
            for (std::size_t j = 0; j < coarsest.rows[i].size(); ++j)
                if (!fixed.fixed[i][j]) coarsest.rows[i][j] = 1;
        penalty_floor = penalty_value(pools_from_sigma(space, coarsest), cfg);
    }

    parts.fixed = stable_loss.value() / n + penalty_floor;
    parts.equivalent = unstable_loss.value() / n;
    return parts;
}

}  // namespace

FixedIndexSet make_fixed(const FeatureSpace& space, ProfileMask rho, std::uint8_t fill) {
    FixedIndexSet f;
    f.profile = rho;
    for (int m : space.active_features(rho))
        f.fixed.emplace_back(static_cast<std::size_t>(space.levels_in_profile(m) - 1), fill);
    return f;
}

double fixed_bound(const FeatureSpace& space, const PartitionMatrix& sigma,
                   const FixedIndexSet& fixed, const Dataset& d, const LossConfig& cfg) {
    return bound_parts(space, sigma, fixed, d, cfg).fixed;
}

double equivalent_bound(const FeatureSpace& space, const PartitionMatrix& sigma,
                        const FixedIndexSet& fixed, const Dataset& d, const LossConfig& cfg) {
    return bound_parts(space, sigma, fixed, d, cfg).equivalent;
}

double search_bound(const FeatureSpace& space, const PartitionMatrix& sigma,
                    const FixedIndexSet& fixed, const Dataset& d, const LossConfig& cfg) {
    const auto parts = bound_parts(space, sigma, fixed, d, cfg);
    return parts.fixed + parts.equivalent;
}

}  // namespace rashomon
