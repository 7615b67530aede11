#include "rashomon/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace rashomon {

bool PartitionMatrix::operator<(const PartitionMatrix& other) const {
    if (profile != other.profile) return profile < other.profile;
    return rows < other.rows;
}

PartitionMatrix make_sigma(const FeatureSpace& space, ProfileMask rho, std::uint8_t fill) {
    PartitionMatrix sigma;
    sigma.profile = rho;
    for (int m : space.active_features(rho))
        sigma.rows.emplace_back(static_cast<std::size_t>(space.levels_in_profile(m) - 1), fill);
    return sigma;
}

std::string sigma_row_string(const PartitionMatrix& sigma) {
    std::string out;
    for (std::size_t i = 0; i < sigma.rows.size(); ++i) {
        if (i) out.push_back('.');
        for (auto v : sigma.rows[i]) out.push_back(v ? '1' : '0');
    }
    return out;
}

void canonicalize(Partition& p) {
    for (auto& pool : p.pools) std::sort(pool.members.begin(), pool.members.end());
    std::sort(p.pools.begin(), p.pools.end(), [](const Pool& a, const Pool& b) {
        return a.members.front() < b.members.front();
    });
}

std::string partition_key(const Partition& p) {
    std::string key;
    for (const auto& pool : p.pools) {
        for (CellIndex c : pool.members) {
            key += std::to_string(c);
            key.push_back('-');
        }
        key.push_back('|');
    }
    return key;
}

std::vector<std::pair<int, int>> level_groups(const std::vector<std::uint8_t>& row, int entries) {
    if (static_cast<int>(row.size()) != entries)
        throw std::invalid_argument("sigma row has wrong length");
    std::vector<std::pair<int, int>> groups;
    int a = 1;
    const int top = entries + 1;
    for (int b = a; b <= top; ++b) {
        if (b == top || !row[b - 1]) {
            groups.emplace_back(a, b);
            a = b + 1;
        }
    }
    return groups;
}

Partition pools_from_sigma(const FeatureSpace& space, const PartitionMatrix& sigma) {
    const auto active = space.active_features(sigma.profile);
    if (active.size() != sigma.rows.size())
        throw std::invalid_argument("sigma row count does not match profile");

    // group id of each in-profile level, per active feature
    std::vector<std::vector<int>> group_of(active.size());
    std::vector<int> group_counts(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
        const int entries = space.levels_in_profile(active[i]) - 1;
        const auto groups = level_groups(sigma.rows[i], entries);
        group_counts[i] = static_cast<int>(groups.size());
        group_of[i].assign(static_cast<std::size_t>(entries) + 2, -1);
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (int lv = groups[g].first; lv <= groups[g].second; ++lv)
                group_of[i][lv] = static_cast<int>(g);
    }

    std::size_t total = 1;
    for (int c : group_counts) total *= static_cast<std::size_t>(c);

    Partition p;
    p.pools.resize(total);
    for (CellIndex c : space.profile_cells(sigma.profile)) {
        const auto k = space.cell_at(c);
        std::size_t bucket = 0, stride = 1;
        for (std::size_t i = 0; i < active.size(); ++i) {
            bucket += stride * static_cast<std::size_t>(group_of[i][k[active[i]]]);
            stride *= static_cast<std::size_t>(group_counts[i]);
        }
        p.pools[bucket].members.push_back(c);
    }
    canonicalize(p);
    return p;
}

std::uint64_t count_pools_inclusion_exclusion(const FeatureSpace& space, const PartitionMatrix& sigma) {
    const auto active = space.active_features(sigma.profile);
    if (active.size() != sigma.rows.size())
        throw std::invalid_argument("sigma row count does not match profile");
    const std::size_t m = active.size();
    std::vector<std::int64_t> z(m), L(m);
    for (std::size_t i = 0; i < m; ++i) {
        z[i] = static_cast<std::int64_t>(std::count(sigma.rows[i].begin(), sigma.rows[i].end(), 1));
        L[i] = space.levels_in_profile(active[i]);
    }
    std::int64_t total = 0;
    for (std::uint32_t s = 0; s < (1u << m); ++s) {
        std::int64_t term = 1;
        int bits = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if ((s >> i) & 1u) {
                term *= z[i];
                ++bits;
            } else {
                term *= L[i];
            }
        }
        total += (bits % 2 == 0) ? term : -term;
    }
    return static_cast<std::uint64_t>(total);
}

std::vector<int> pool_assignment(const FeatureSpace& space, const Partition& p) {
    std::vector<int> assign(space.universe_size(), -1);
    for (std::size_t i = 0; i < p.pools.size(); ++i)
        for (CellIndex c : p.pools[i].members) {
            if (assign[c] != -1) throw std::invalid_argument("pools overlap");
            assign[c] = static_cast<int>(i);
        }
    return assign;
}

}  // namespace rashomon
