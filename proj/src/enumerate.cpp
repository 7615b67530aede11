#include "rashomon/enumerate.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace rashomon {

namespace {

struct Node {
    PartitionMatrix sigma;
    int row = 0;
    int pos = 0;
};

// Pool count if every still-undecided entry were pooled: the minimum over
// all completions of this node, and a function of the node's cache key.
std::uint64_t min_completion_pools(const FeatureSpace& space, const PartitionMatrix& sigma,
                                   int row, int pos) {
    PartitionMatrix filled = sigma;
    for (std::size_t j = pos; j < filled.rows[row].size(); ++j) filled.rows[row][j] = 1;
    return count_pools_inclusion_exclusion(space, filled);
}

struct Evaluated {
    double q = 0.0;
    std::uint64_t pools = 0;
};

Evaluated evaluate(const FeatureSpace& space, const PartitionMatrix& sigma, const Dataset& d,
                   const LossConfig& cfg) {
    const Partition p = pools_from_sigma(space, sigma);
    return {q_value(space, p, d, cfg), p.size()};
}

}  // namespace

std::string SearchCache::key(const PartitionMatrix& sigma, int row, int pos) {
    std::string k = std::to_string(sigma.profile);
    k.push_back('#');
    for (std::size_t i = 0; i < sigma.rows.size(); ++i) {
        if (i) k.push_back('.');
        for (std::size_t j = 0; j < sigma.rows[i].size(); ++j) {
            const bool masked = static_cast<int>(i) == row && static_cast<int>(j) >= pos;
            k.push_back(masked ? '*' : (sigma.rows[i][j] ? '1' : '0'));
        }
    }
    return k;
}

bool SearchCache::seen(const PartitionMatrix& sigma, int row, int pos) const {
    return keys_.count(key(sigma, row, pos)) > 0;
}

void SearchCache::insert(const PartitionMatrix& sigma, int row, int pos) {
    keys_.insert(key(sigma, row, pos));
}

std::vector<PartitionMatrix> enumerate_profile(const FeatureSpace& space, ProfileMask rho,
                                               const Dataset& d, const LossConfig& cfg,
                                               double theta, std::int64_t h_max,
                                               int start_row, int start_pos) {
    std::vector<PartitionMatrix> out;
    PartitionMatrix seed = make_sigma(space, rho, 1);

    std::vector<int> scannable;  // rows with at least one gap
    for (std::size_t i = 0; i < seed.rows.size(); ++i)
        if (!seed.rows[i].empty()) scannable.push_back(static_cast<int>(i));

    if (scannable.empty()) {
        const auto ev = evaluate(space, seed, d, cfg);
        if (threshold_leq(ev.q, theta) && ev.pools <= static_cast<std::uint64_t>(h_max))
            out.push_back(seed);
        return out;
    }

    if (start_row < 0) {
        start_row = scannable.front();
        start_pos = 0;
    } else {
        if (std::find(scannable.begin(), scannable.end(), start_row) == scannable.end())
            throw std::invalid_argument("enumerate_profile: start_row has no gaps");
        if (start_pos < 0 || start_pos >= static_cast<int>(seed.rows[start_row].size()))
            throw std::invalid_argument("enumerate_profile: start_pos out of range");
    }

    std::set<PartitionMatrix> found;
    SearchCache cache;
    std::deque<Node> queue;
    queue.push_back({seed, start_row, start_pos});

    while (!queue.empty()) {
        Node node = std::move(queue.front());
        queue.pop_front();
        if (cache.seen(node.sigma, node.row, node.pos)) continue;
        cache.insert(node.sigma, node.row, node.pos);

        if (min_completion_pools(space, node.sigma, node.row, node.pos) >
            static_cast<std::uint64_t>(h_max))
            continue;

        PartitionMatrix pooled = node.sigma;
        pooled.rows[node.row][node.pos] = 1;
        PartitionMatrix split = node.sigma;
        split.rows[node.row][node.pos] = 0;

        // Branch every row at its first unseen position for both children.
        for (int m : scannable) {
            const int len = static_cast<int>(seed.rows[m].size());
            for (const PartitionMatrix* child : {&pooled, &split}) {
                for (int j = 0; j < len; ++j) {
                    if (!cache.seen(*child, m, j)) {
                        queue.push_back({*child, m, j});
                        break;
                    }
                }
            }
        }

        // Every completion of this node costs at least the bound; prune.
        FixedIndexSet fixed = make_fixed(space, rho, 1);
        for (std::size_t j = node.pos; j < fixed.fixed[node.row].size(); ++j)
            fixed.fixed[node.row][j] = 0;
        if (!threshold_leq(search_bound(space, node.sigma, fixed, d, cfg), theta)) continue;

        for (const PartitionMatrix* child : {&pooled, &split}) {
            const auto ev = evaluate(space, *child, d, cfg);
            if (threshold_leq(ev.q, theta) && ev.pools <= static_cast<std::uint64_t>(h_max))
                found.insert(*child);
        }

        if (node.pos + 1 < static_cast<int>(seed.rows[node.row].size())) {
            if (!cache.seen(pooled, node.row, node.pos + 1))
                queue.push_back({pooled, node.row, node.pos + 1});
            if (!cache.seen(split, node.row, node.pos + 1))
                queue.push_back({split, node.row, node.pos + 1});
        }
    }

    out.assign(found.begin(), found.end());
    return out;
}

std::vector<PartitionMatrix> brute_force_profile(const FeatureSpace& space, ProfileMask rho,
                                                 const Dataset& d, const LossConfig& cfg,
                                                 double theta, std::int64_t h_max) {
    std::vector<PartitionMatrix> out;
    PartitionMatrix sigma = make_sigma(space, rho, 0);
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t i = 0; i < sigma.rows.size(); ++i)
        for (std::size_t j = 0; j < sigma.rows[i].size(); ++j) slots.emplace_back(i, j);

    const std::uint64_t combos = 1ull << slots.size();
    for (std::uint64_t bits = 0; bits < combos; ++bits) {
        for (std::size_t s = 0; s < slots.size(); ++s)
            sigma.rows[slots[s].first][slots[s].second] =
                static_cast<std::uint8_t>((bits >> s) & 1ull);
        const Partition p = pools_from_sigma(space, sigma);
        if (p.size() > static_cast<std::uint64_t>(h_max)) continue;
        if (threshold_leq(q_value(space, p, d, cfg), theta)) out.push_back(sigma);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace rashomon
