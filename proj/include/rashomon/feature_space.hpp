#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace rashomon {

// A cell of the factorial design: one level per feature.
using FeatureCombination = std::vector<int>;

// Dense index of a cell within the full universe (mixed-radix encoding).
using CellIndex = std::uint32_t;

// Bitmask over features; bit m set means feature m is active (nonzero level).
using ProfileMask = std::uint32_t;

enum class PartialOrder { Less, Greater, Equal, Incomparable };

// Discrete factorial feature space. In profile mode each feature has levels
// 0..R_m-1 with 0 the control level; in single-profile mode levels are
// 1..R_m and there is no control arm.
class FeatureSpace {
public:
    FeatureSpace(std::vector<int> levels, bool single_profile_mode);

    int num_features() const { return static_cast<int>(levels_.size()); }
    const std::vector<int>& levels() const { return levels_; }
    int levels_of(int feature) const { return levels_[feature]; }
    bool single_profile_mode() const { return single_profile_; }

    // Lowest level a feature takes: 1 in single-profile mode, else 0.
    int min_level() const { return single_profile_ ? 1 : 0; }

    // Number of levels an active feature contributes inside a profile.
    int levels_in_profile(int feature) const {
        return single_profile_ ? levels_[feature] : levels_[feature] - 1;
    }

    std::uint64_t universe_size() const { return universe_; }

    CellIndex cell_index(const FeatureCombination& k) const;
    FeatureCombination cell_at(CellIndex idx) const;

    ProfileMask full_profile() const;
    // All profiles ordered by (popcount, mask value); single-profile mode has
    // exactly one profile, the full one.
    std::vector<ProfileMask> all_profiles() const;
    bool feature_active(ProfileMask rho, int feature) const;
    std::vector<int> active_features(ProfileMask rho) const;
    // Cells belonging to a profile, ascending by cell index.
    std::vector<CellIndex> profile_cells(ProfileMask rho) const;

private:
    std::vector<int> levels_;
    bool single_profile_ = false;
    std::uint64_t universe_ = 1;
    std::vector<std::uint64_t> stride_;
};

// Componentwise partial order over feature combinations.
PartialOrder compare(const FeatureCombination& a, const FeatureCombination& b);

// Variants agree on all features but one and differ by exactly one level
// there (unit L1 distance).
bool is_variant(const FeatureCombination& a, const FeatureCombination& b);

// Profile of a cell: which features sit above the control level. Errors in
// single-profile mode, where no control level exists.
ProfileMask profile_of(const FeatureSpace& space, const FeatureCombination& k);

ProfileMask profile_of_cell(const FeatureSpace& space, CellIndex idx);

// Hypercube adjacency of profiles: masks differing in exactly one bit.
bool profiles_adjacent(ProfileMask a, ProfileMask b);

// Edges between variant cells that differ on feature `feature` across
// in-profile levels (level, level + 1); one class per (feature, level).
struct EdgeClass {
    int feature = 0;
    int level = 0;  // in-profile level on the low side of the edge
    std::vector<std::pair<CellIndex, CellIndex>> edges;
};

std::vector<EdgeClass> edge_classes(const FeatureSpace& space, ProfileMask rho);

}  // namespace rashomon
