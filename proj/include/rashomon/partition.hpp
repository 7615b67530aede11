#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rashomon/feature_space.hpp"

namespace rashomon {

// Split/pool decisions for one profile. rows[i] belongs to the i-th active
// feature (ascending feature index) and has one entry per gap between
// consecutive in-profile levels: 1 pools the two levels, 0 splits them.
struct PartitionMatrix {
    ProfileMask profile = 0;
    std::vector<std::vector<std::uint8_t>> rows;

    bool operator==(const PartitionMatrix&) const = default;
    bool operator<(const PartitionMatrix& other) const;
};

// PartitionMatrix sized for `rho` with every entry set to `fill`.
PartitionMatrix make_sigma(const FeatureSpace& space, ProfileMask rho, std::uint8_t fill);

// Rows rendered as 0/1 strings joined by '.', e.g. "01.10"; empty rows give "".
std::string sigma_row_string(const PartitionMatrix& sigma);

struct Pool {
    std::vector<CellIndex> members;  // ascending

    bool operator==(const Pool&) const = default;
};

struct Partition {
    std::vector<Pool> pools;  // ascending by first member

    std::size_t size() const { return pools.size(); }
    bool operator==(const Partition&) const = default;
};

// Sorts members within pools and pools by first member.
void canonicalize(Partition& p);

// Stable text key for dedup and ordering: pools as dash-joined member lists.
std::string partition_key(const Partition& p);

// Consecutive in-profile levels [a, b] (1-based, inclusive) linked by 1s in a
// sigma row of `entries` gap entries.
std::vector<std::pair<int, int>> level_groups(const std::vector<std::uint8_t>& row, int entries);

// Pools induced by a partition matrix: products of per-feature level groups.
// Pool members are full-universe cell indices of the matrix's profile.
Partition pools_from_sigma(const FeatureSpace& space, const PartitionMatrix& sigma);

// Pool count by the alternating inclusion-exclusion sum over row totals,
// without materializing pools.
std::uint64_t count_pools_inclusion_exclusion(const FeatureSpace& space, const PartitionMatrix& sigma);

// Map cell index -> pool position in `p`; cells not covered map to -1.
std::vector<int> pool_assignment(const FeatureSpace& space, const Partition& p);

}  // namespace rashomon
