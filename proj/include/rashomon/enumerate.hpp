#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "rashomon/bounds.hpp"
#include "rashomon/dataset.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/partition.hpp"

namespace rashomon {

// Dedup cache for search nodes. A node is keyed by its decided entries: the
// scanned row's gap suffix (position and beyond) is masked out, so any two
// nodes that agree elsewhere collapse to one key.
class SearchCache {
public:
    bool seen(const PartitionMatrix& sigma, int row, int pos) const;
    void insert(const PartitionMatrix& sigma, int row, int pos);
    std::size_t size() const { return keys_.size(); }

private:
    static std::string key(const PartitionMatrix& sigma, int row, int pos);
    std::unordered_set<std::string> keys_;
};

// All split/pool matrices of one profile with Q <= theta and pool count
// <= h_max, found by a queue-driven scan seeded at the all-ones matrix,
// pruned with the fixed/equivalent bounds and the pool-count cap.
// Output sorted by matrix contents. The scan origin is arbitrary (the result
// is origin-independent); negative start_row picks the first scannable row.
std::vector<PartitionMatrix> enumerate_profile(const FeatureSpace& space, ProfileMask rho,
                                               const Dataset& d, const LossConfig& cfg,
                                               double theta, std::int64_t h_max,
                                               int start_row = -1, int start_pos = 0);

// Reference implementation: tries every matrix and filters. Kept independent
// of the search (no cache, no bounds) so the two can arbitrate each other.
std::vector<PartitionMatrix> brute_force_profile(const FeatureSpace& space, ProfileMask rho,
                                                 const Dataset& d, const LossConfig& cfg,
                                                 double theta, std::int64_t h_max);

}  // namespace rashomon
