#include "rashomon/permissibility.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

namespace rashomon {

namespace {

std::string cell_string(const FeatureCombination& k) {
    std::string s = "(";
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (i) s.push_back(',');
        s += std::to_string(k[i]);
    }
    s.push_back(')');
    return s;
}

std::string mask_string(ProfileMask rho, int m) {
    std::string s;
    for (int i = 0; i < m; ++i) s.push_back(((rho >> i) & 1u) ? '1' : '0');
    return s;
}

int l1_distance(const FeatureCombination& a, const FeatureCombination& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

FeatureCombination componentwise_max(const FeatureCombination& a, const FeatureCombination& b) {
    FeatureCombination out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
    return out;
}

FeatureCombination componentwise_min(const FeatureCombination& a, const FeatureCombination& b) {
    FeatureCombination out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::min(a[i], b[i]);
    return out;
}

PermissibilityResult check_coverage(const Partition& p, std::vector<CellIndex> expected,
                                    const char* target) {
    std::vector<CellIndex> seen;
    for (const auto& pool : p.pools)
        seen.insert(seen.end(), pool.members.begin(), pool.members.end());
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        return PermissibilityResult::fail(PermissibilityRule::coverage,
                                          std::string("pools overlap within ") + target);
    std::sort(expected.begin(), expected.end());
    if (seen != expected)
        return PermissibilityResult::fail(PermissibilityRule::coverage,
                                          std::string("pools do not tile ") + target);
    return PermissibilityResult::pass();
}

}  // namespace

PermissibilityResult check_profile_partition(const FeatureSpace& space, const Partition& p,
                                             ProfileMask rho) {
    if (auto cov = check_coverage(p, space.profile_cells(rho), "the profile"); !cov.ok) return cov;
    if (p.pools.empty())
        return PermissibilityResult::fail(PermissibilityRule::coverage, "no pools");

    const auto active = space.active_features(rho);
    std::vector<FeatureCombination> los, his;
    los.reserve(p.pools.size());
    his.reserve(p.pools.size());

    for (const auto& pool : p.pools) {
        FeatureCombination lo = space.cell_at(pool.members.front());
        FeatureCombination hi = lo;
        for (CellIndex c : pool.members) {
            const auto k = space.cell_at(c);
            lo = componentwise_min(lo, k);
            hi = componentwise_max(hi, k);
        }
        // Convex pool with unique extrema <=> the pool is exactly the level
        // box [lo, hi].
        std::size_t box = 1;
        for (int m : active) box *= static_cast<std::size_t>(hi[m] - lo[m] + 1);
        bool is_box = pool.members.size() == box;
        if (is_box) {
            std::set<CellIndex> members(pool.members.begin(), pool.members.end());
            FeatureCombination k = lo;
            while (is_box) {
                if (!members.count(space.cell_index(k))) {
                    is_box = false;
                    break;
                }
                std::size_t i = 0;
                for (; i < active.size(); ++i) {
                    if (k[active[i]] < hi[active[i]]) {
                        ++k[active[i]];
                        break;
                    }
                    k[active[i]] = lo[active[i]];
                }
                if (i == active.size()) break;
            }
        }
        if (!is_box)
            return PermissibilityResult::fail(
                PermissibilityRule::pool_convexity,
                "pool anchored at " + cell_string(space.cell_at(pool.members.front())) +
                    " is not a convex level box with unique extrema");
        los.push_back(std::move(lo));
        his.push_back(std::move(hi));
    }

    std::set<FeatureCombination> lo_set(los.begin(), los.end());
    std::set<FeatureCombination> hi_set(his.begin(), his.end());
    for (std::size_t i = 0; i < p.pools.size(); ++i) {
        for (std::size_t j = i + 1; j < p.pools.size(); ++j) {
            if (compare(los[i], los[j]) == PartialOrder::Incomparable &&
                !lo_set.count(componentwise_max(los[i], los[j])))
                return PermissibilityResult::fail(
                    PermissibilityRule::parallel_splits,
                    "parallel splits violated: incomparable pool minima " + cell_string(los[i]) +
                        " and " + cell_string(los[j]) + " lack a pool with minimum " +
                        cell_string(componentwise_max(los[i], los[j])));
            if (compare(his[i], his[j]) == PartialOrder::Incomparable &&
                !hi_set.count(componentwise_min(his[i], his[j])))
                return PermissibilityResult::fail(
                    PermissibilityRule::parallel_splits,
                    "parallel splits violated: incomparable pool maxima " + cell_string(his[i]) +
                        " and " + cell_string(his[j]) + " lack a pool with maximum " +
                        cell_string(componentwise_min(his[i], his[j])));
        }
    }
    return PermissibilityResult::pass();
}

std::optional<PartitionMatrix> sigma_from_partition(const FeatureSpace& space, const Partition& p,
                                                    ProfileMask rho) {
    if (!check_coverage(p, space.profile_cells(rho), "the profile").ok) return std::nullopt;
    const auto active = space.active_features(rho);
    PartitionMatrix sigma = make_sigma(space, rho, 0);
    for (std::size_t i = 0; i < active.size(); ++i) {
        const int m = active[i];
        for (std::size_t j = 0; j < sigma.rows[i].size(); ++j) {
            const int low = static_cast<int>(j) + 1;
            for (const auto& pool : p.pools) {
                bool has_low = false, has_high = false;
                for (CellIndex c : pool.members) {
                    const int lv = space.cell_at(c)[m];
                    has_low |= lv == low;
                    has_high |= lv == low + 1;
                }
                if (has_low && has_high) {
                    sigma.rows[i][j] = 1;
                    break;
                }
            }
        }
    }
    Partition rebuilt = pools_from_sigma(space, sigma);
    Partition canon = p;
    canonicalize(canon);
    if (rebuilt == canon) return sigma;
    return std::nullopt;
}

bool is_permissible_profile_partition(const FeatureSpace& space, const Partition& p,
                                      ProfileMask rho) {
    const bool by_rules = check_profile_partition(space, p, rho).ok;
    const bool by_sigma = sigma_from_partition(space, p, rho).has_value();
    if (by_rules != by_sigma)
        throw std::logic_error("permissibility routes disagree on a profile partition");
    return by_rules;
}

PermissibilityResult check_global_partition(const FeatureSpace& space, const Partition& p) {
    std::vector<CellIndex> universe(space.universe_size());
    for (std::size_t c = 0; c < universe.size(); ++c) universe[c] = static_cast<CellIndex>(c);
    if (auto cov = check_coverage(p, universe, "the feature space"); !cov.ok) return cov;

    if (space.single_profile_mode())
        return check_profile_partition(space, p, space.full_profile());

    for (ProfileMask rho : space.all_profiles()) {
        Partition induced;
        for (const auto& pool : p.pools) {
            Pool part;
            for (CellIndex c : pool.members)
                if (profile_of_cell(space, c) == rho) part.members.push_back(c);
            if (!part.members.empty()) induced.pools.push_back(std::move(part));
        }
        canonicalize(induced);
        if (auto res = check_profile_partition(space, induced, rho); !res.ok) {
            res.detail = "profile " + mask_string(rho, space.num_features()) + ": " + res.detail;
            return res;
        }
    }

    for (const auto& pool : p.pools) {
        std::map<ProfileMask, std::vector<FeatureCombination>> by_profile;
        for (CellIndex c : pool.members)
            by_profile[profile_of_cell(space, c)].push_back(space.cell_at(c));
        if (by_profile.size() <= 1) continue;

        std::vector<ProfileMask> touched;
        for (const auto& [rho, cells] : by_profile) touched.push_back(rho);

        for (std::size_t i = 0; i < touched.size(); ++i) {
            for (std::size_t j = i + 1; j < touched.size(); ++j) {
                if (!profiles_adjacent(touched[i], touched[j])) continue;
                bool linked = false;
                for (const auto& a : by_profile[touched[i]]) {
                    for (const auto& b : by_profile[touched[j]]) {
                        if (l1_distance(a, b) == 1) {
                            linked = true;
                            break;
                        }
                    }
                    if (linked) break;
                }
                if (!linked)
                    return PermissibilityResult::fail(
                        PermissibilityRule::cross_profile_variant_link,
                        "pool spans adjacent profiles " +
                            mask_string(touched[i], space.num_features()) + " and " +
                            mask_string(touched[j], space.num_features()) +
                            " without a variant pair");
            }
        }

        // The touched profiles must form a connected hypercube subgraph.
        std::set<ProfileMask> remaining(touched.begin(), touched.end());
        std::vector<ProfileMask> frontier{*remaining.begin()};
        remaining.erase(remaining.begin());
        while (!frontier.empty()) {
            const ProfileMask cur = frontier.back();
            frontier.pop_back();
            for (auto it = remaining.begin(); it != remaining.end();) {
                if (profiles_adjacent(cur, *it)) {
                    frontier.push_back(*it);
                    it = remaining.erase(it);
                } else {
                    ++it;
                }
            }
        }
        if (!remaining.empty())
            return PermissibilityResult::fail(
                PermissibilityRule::profile_connectivity,
                "pool touches profiles that do not form a connected hypercube region");
    }
    return PermissibilityResult::pass();
}

bool is_permissible_global(const FeatureSpace& space, const Partition& p) {
    return check_global_partition(space, p).ok;
}

}  // namespace rashomon
