#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rashomon/dataset.hpp"
#include "rashomon/enumerate.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/partition.hpp"

namespace rashomon {

enum class PoolableState : std::uint8_t { poolable, pooled, forbidden };

// Cross-profile pooling candidates between the pools touching two adjacent
// profiles. Rows and cols hold pool positions within the partition that the
// matrix was built from; a pair is poolable when the pools share no profile
// and some variant pair links them.
struct IntersectionMatrix {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    std::vector<std::vector<PoolableState>> state;
};

IntersectionMatrix intersection_matrix(const FeatureSpace& space, const Partition& p,
                                       ProfileMask rho_i, ProfileMask rho_j);

// Explores every subset of compatible merges from the matrix, adding each
// merged partition with Q <= theta to acc. A merge consumes its row and
// column for the rest of that branch.
void pool_adjacent_profiles(std::vector<Partition>& acc, const FeatureSpace& space,
                            const Partition& p, const IntersectionMatrix& inter, const Dataset& d,
                            double theta, const LossConfig& cfg);

// Grows candidates by cross-profile pooling along hypercube edges walked
// breadth-first from the control profile, repeated to a fixpoint, and keeps
// every permissible result with Q <= theta.
std::vector<Partition> pool_profiles(const FeatureSpace& space,
                                     const std::vector<Partition>& candidates,
                                     ProfileMask control, const Dataset& d, double theta,
                                     const LossConfig& cfg, int threads = 1);

// Index tuples (one index per list) whose values sum to at most theta.
// Lists must be ascending; returned tuples are in lexicographic order.
std::vector<std::vector<std::size_t>> select_feasible_combinations(
    const std::vector<std::vector<double>>& lists, double theta);

enum class ReferenceKind { fullsplit, greedy, file };

struct ReferenceSpec {
    ReferenceKind kind = ReferenceKind::fullsplit;
    std::string path;  // file kind only
};

// Per-profile reference matrices in all_profiles order.
std::vector<PartitionMatrix> fullsplit_reference(const FeatureSpace& space);
// Bottom-up single-flip descent of Q per profile; deterministic tie-breaks.
std::vector<PartitionMatrix> greedy_reference(const FeatureSpace& space, const Dataset& d,
                                              const LossConfig& cfg);

// Whole-universe partition assembled from one matrix per profile.
Partition partition_from_sigmas(const FeatureSpace& space,
                                const std::vector<PartitionMatrix>& sigmas);

// Same, with cross-profile merge groups of (profile position, local pool
// position) applied on top of the induced per-profile pools.
Partition partition_from_sigmas_and_merges(
    const FeatureSpace& space, const std::vector<PartitionMatrix>& sigmas,
    const std::vector<std::vector<std::pair<int, int>>>& merges);

struct RpsEntry {
    std::vector<PartitionMatrix> sigmas;  // one per profile, all_profiles order
    // Pools spanning profiles, as groups of (profile position, local pool
    // position within that profile's induced partition).
    std::vector<std::vector<std::pair<int, int>>> merges;
    Partition partition;
    double q = 0.0;
    std::uint64_t pool_count = 0;
    double weight = 0.0;                  // posterior mass relative to the set
    std::vector<double> effects;          // fitted value per universe cell
};

struct RashomonSet {
    std::vector<ProfileMask> profiles;
    double q0 = 0.0;
    double epsilon = 0.0;
    double theta = 0.0;
    double lambda = 0.0;
    bool cross_profile = true;
    bool truncated = false;
    std::vector<RpsEntry> entries;  // ascending q, ties by partition key
};

struct EnumerateOptions {
    bool cross_profile = true;
    std::int64_t h_max_override = -1;  // < 0 derives floor(theta / lambda)
    std::size_t max_entries = 0;       // 0 = unlimited
    int threads = 1;
};

// All permissible partitions of the universe with Q <= q0 (1 + epsilon),
// subject to the pool-count cap, with posterior weights and fitted effects.
RashomonSet enumerate_rps(const FeatureSpace& space, const Dataset& d, const LossConfig& cfg,
                          double q0, double epsilon, const EnumerateOptions& options = {});

// Recomputes entry weights and effects (used after artifact parsing).
void finalize_entries(RashomonSet& rps, const FeatureSpace& space, const Dataset& d,
                      const LossConfig& cfg);

}  // namespace rashomon
