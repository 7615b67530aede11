#pragma once

#include <optional>
#include <string>

#include "rashomon/feature_space.hpp"
#include "rashomon/partition.hpp"

namespace rashomon {

enum class PermissibilityRule {
    none,                        // passed
    coverage,                    // pools do not tile the target cells
    pool_convexity,              // a pool is not a level box with unique extrema
    parallel_splits,             // min/max closure under incomparable pairs fails
    cross_profile_variant_link,  // adjacent profiles in a pool lack a variant pair
    profile_connectivity,        // a pool's profile set is disconnected
};

struct PermissibilityResult {
    bool ok = true;
    PermissibilityRule rule = PermissibilityRule::none;
    std::string detail;

    static PermissibilityResult pass() { return {}; }
    static PermissibilityResult fail(PermissibilityRule r, std::string d) {
        return {false, r, std::move(d)};
    }
};

// Checks one profile's partition: coverage of the profile's cells, pools as
// convex level boxes with unique extrema, and closure of pool minima/maxima
// under incomparable pairs (parallel splits).
PermissibilityResult check_profile_partition(const FeatureSpace& space, const Partition& p,
                                             ProfileMask rho);

// Split/pool matrix whose induced pools reproduce p exactly, if any.
std::optional<PartitionMatrix> sigma_from_partition(const FeatureSpace& space, const Partition& p,
                                                    ProfileMask rho);

// Runs the rule-based check and the sigma-reconstruction route; the two must
// agree (a disagreement is an internal error).
bool is_permissible_profile_partition(const FeatureSpace& space, const Partition& p,
                                      ProfileMask rho);

// Checks a partition of the whole universe: every induced profile partition
// permissible, every hypercube-adjacent profile pair inside a pool linked by
// a variant pair, and every pool's profile set connected in the hypercube
// subgraph it induces.
PermissibilityResult check_global_partition(const FeatureSpace& space, const Partition& p);

bool is_permissible_global(const FeatureSpace& space, const Partition& p);

}  // namespace rashomon
