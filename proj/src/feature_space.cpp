#include "rashomon/feature_space.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace rashomon {

FeatureSpace::FeatureSpace(std::vector<int> levels, bool single_profile_mode)
    : levels_(std::move(levels)), single_profile_(single_profile_mode) {
    if (levels_.empty()) throw std::invalid_argument("feature space needs at least one feature");
    if (levels_.size() > 31) throw std::invalid_argument("too many features for profile masks");
    const int min_levels = single_profile_ ? 1 : 2;
    stride_.resize(levels_.size());
    for (std::size_t m = 0; m < levels_.size(); ++m) {
        if (levels_[m] < min_levels)
            throw std::invalid_argument("feature " + std::to_string(m) + " has too few levels");
        stride_[m] = universe_;
        const auto radix = static_cast<std::uint64_t>(levels_[m]);
        if (universe_ > std::numeric_limits<std::uint32_t>::max() / radix)
            throw std::invalid_argument("feature space too large to index");
        universe_ *= radix;
    }
}

CellIndex FeatureSpace::cell_index(const FeatureCombination& k) const {
    if (static_cast<int>(k.size()) != num_features())
        throw std::invalid_argument("feature combination has wrong dimension");
    std::uint64_t idx = 0;
    const int lo = min_level();
    for (std::size_t m = 0; m < levels_.size(); ++m) {
        const int digit = k[m] - lo;
        if (digit < 0 || digit >= levels_[m])
            throw std::invalid_argument("level out of range for feature " + std::to_string(m));
        idx += static_cast<std::uint64_t>(digit) * stride_[m];
    }
    return static_cast<CellIndex>(idx);
}

FeatureCombination FeatureSpace::cell_at(CellIndex idx) const {
    if (idx >= universe_) throw std::invalid_argument("cell index out of range");
    FeatureCombination k(levels_.size());
    std::uint64_t rest = idx;
    const int lo = min_level();
    for (std::size_t m = 0; m < levels_.size(); ++m) {
        k[m] = static_cast<int>(rest % levels_[m]) + lo;
        rest /= levels_[m];
    }
    return k;
}

ProfileMask FeatureSpace::full_profile() const {
    return static_cast<ProfileMask>((1u << num_features()) - 1u);
}

std::vector<ProfileMask> FeatureSpace::all_profiles() const {
    if (single_profile_) return {full_profile()};
    std::vector<ProfileMask> out;
    out.reserve(1u << num_features());
    for (ProfileMask m = 0; m < (1u << num_features()); ++m) out.push_back(m);
    std::sort(out.begin(), out.end(), [](ProfileMask a, ProfileMask b) {
        const int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    return out;
}

bool FeatureSpace::feature_active(ProfileMask rho, int feature) const {
    return (rho >> feature) & 1u;
}

std::vector<int> FeatureSpace::active_features(ProfileMask rho) const {
    std::vector<int> out;
    for (int m = 0; m < num_features(); ++m)
        if (feature_active(rho, m)) out.push_back(m);
    return out;
}

std::vector<CellIndex> FeatureSpace::profile_cells(ProfileMask rho) const {
    if (single_profile_ && rho != full_profile())
        throw std::invalid_argument("single-profile space has only the full profile");
    const auto active = active_features(rho);
    std::vector<CellIndex> out;
    FeatureCombination k(levels_.size(), single_profile_ ? 1 : 0);
    for (int m : active) k[m] = 1;
    // Odometer over the active features; inactive features stay at control.
    while (true) {
        out.push_back(cell_index(k));
        std::size_t i = 0;
        for (; i < active.size(); ++i) {
            const int m = active[i];
            const int hi = single_profile_ ? levels_[m] : levels_[m] - 1;
            if (k[m] < hi) {
                ++k[m];
                break;
            }
            k[m] = 1;
        }
        if (i == active.size()) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

PartialOrder compare(const FeatureCombination& a, const FeatureCombination& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    bool le = true, ge = true;
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (a[m] < b[m]) ge = false;
        if (a[m] > b[m]) le = false;
    }
    if (le && ge) return PartialOrder::Equal;
    if (le) return PartialOrder::Less;
    if (ge) return PartialOrder::Greater;
    return PartialOrder::Incomparable;
}

bool is_variant(const FeatureCombination& a, const FeatureCombination& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    int distance = 0;
    for (std::size_t m = 0; m < a.size(); ++m) {
        distance += std::abs(a[m] - b[m]);
        if (distance > 1) return false;
    }
    return distance == 1;
}

ProfileMask profile_of(const FeatureSpace& space, const FeatureCombination& k) {
    if (space.single_profile_mode())
        throw std::logic_error("profile_of has no meaning without a control level");
    if (static_cast<int>(k.size()) != space.num_features())
        throw std::invalid_argument("feature combination has wrong dimension");
    ProfileMask rho = 0;
    for (int m = 0; m < space.num_features(); ++m) {
        if (k[m] < 0 || k[m] >= space.levels_of(m))
            throw std::invalid_argument("level out of range for feature " + std::to_string(m));
        if (k[m] > 0) rho |= (1u << m);
    }
    return rho;
}

ProfileMask profile_of_cell(const FeatureSpace& space, CellIndex idx) {
    if (space.single_profile_mode()) return space.full_profile();
    return profile_of(space, space.cell_at(idx));
}

bool profiles_adjacent(ProfileMask a, ProfileMask b) {
    return std::popcount(a ^ b) == 1;
}

std::vector<EdgeClass> edge_classes(const FeatureSpace& space, ProfileMask rho) {
    const auto cells = space.profile_cells(rho);
    std::vector<EdgeClass> out;
    for (int m : space.active_features(rho)) {
        const int groups = space.levels_in_profile(m);
        for (int r = 1; r < groups; ++r) {
            EdgeClass ec;
            ec.feature = m;
            ec.level = r;
            for (CellIndex c : cells) {
                auto k = space.cell_at(c);
                if (k[m] != r) continue;
                auto k2 = k;
                ++k2[m];
                ec.edges.emplace_back(c, space.cell_index(k2));
            }
            out.push_back(std::move(ec));
        }
    }
    return out;
}

}  // namespace rashomon
