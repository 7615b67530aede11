#pragma once

#include <cstdint>
#include <vector>

#include "rashomon/dataset.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/partition.hpp"

namespace rashomon {

// Marks which sigma entries are already decided at a search node; same shape
// as the PartitionMatrix rows it annotates.
struct FixedIndexSet {
    ProfileMask profile = 0;
    std::vector<std::vector<std::uint8_t>> fixed;
};

FixedIndexSet make_fixed(const FeatureSpace& space, ProfileMask rho, std::uint8_t fill);

// Both bounds mask sigma to its decided entries, split the profile into
// pools whose level-group boundaries can no longer change (stable) and the
// rest, and bound every completion of the undecided entries from below.

// Residual mass of the stable pools plus the penalty floor.
double fixed_bound(const FeatureSpace& space, const PartitionMatrix& sigma,
                   const FixedIndexSet& fixed, const Dataset& d, const LossConfig& cfg);

// Minimum unavoidable residual mass of the unstable region: each undecided
// pool already costs at least its own best fit.
double equivalent_bound(const FeatureSpace& space, const PartitionMatrix& sigma,
                        const FixedIndexSet& fixed, const Dataset& d,
                        const LossConfig& cfg = LossConfig{});

// fixed_bound + equivalent_bound, the pruning bound used by the search.
double search_bound(const FeatureSpace& space, const PartitionMatrix& sigma,
                    const FixedIndexSet& fixed, const Dataset& d, const LossConfig& cfg);

}  // namespace rashomon
