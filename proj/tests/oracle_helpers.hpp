#pragma once

// Independent oracles the tests confront the library with. Everything here
// recomputes results from first principles (raw observations, set-partition
// enumeration, textbook least squares) without touching the library's loss,
// counting, or search code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rashomon/dataset.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/partition.hpp"
#include "rashomon/permissibility.hpp"
#include "rashomon/sim.hpp"

namespace oracle {

using rashomon::CellIndex;
using rashomon::FeatureCombination;
using rashomon::FeatureSpace;
using rashomon::Partition;
using rashomon::Pool;

// Raw observations kept alongside the Dataset they build, so oracles can
// recompute losses from individual outcomes.
struct RawData {
    std::vector<std::pair<CellIndex, double>> obs;

    void add(const FeatureSpace& space, const FeatureCombination& k, double y) {
        obs.emplace_back(space.cell_index(k), y);
    }
    void add(CellIndex cell, double y) { obs.emplace_back(cell, y); }

    rashomon::Dataset build(const FeatureSpace& space) const {
        rashomon::DatasetBuilder b(space);
        for (const auto& [cell, y] : obs) b.add(cell, y);
        return b.build();
    }
};

// Deterministic unit doubles from splitmix64; no stdlib distribution in the
// loop so oracle data is bit-stable.
inline double unit_double(std::uint64_t& state) {
    return static_cast<double>(rashomon::splitmix64(state) >> 11) * 0x1.0p-53;
}

// Outcome draws roughly normal via a 4-term Irwin-Hall sum; the shape is
// irrelevant to exact-match tests, determinism is not.
inline double rough_normal(std::uint64_t& state) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += unit_double(state);
    return (s - 2.0) * std::sqrt(3.0);
}

// Fills n_per_cell observations for every universe cell.
inline RawData random_raw_data(const FeatureSpace& space, int n_per_cell, std::uint64_t seed) {
    RawData raw;
    std::uint64_t state = seed;
    for (CellIndex c = 0; c < space.universe_size(); ++c)
        for (int i = 0; i < n_per_cell; ++i) raw.add(c, rough_normal(state));
    return raw;
}

// All set partitions of {0..n-1} as restricted-growth assignment vectors:
// assign[i] is the block of element i, blocks numbered by first appearance.
inline std::vector<std::vector<int>> all_set_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> assign(n, 0);
    std::vector<int> maxima(n, 0);  // maxima[i] = max(assign[0..i])
    while (true) {
        out.push_back(assign);
        int i = n - 1;
        while (i > 0 && assign[i] == maxima[i - 1] + 1) --i;
        if (i == 0) break;
        ++assign[i];
        maxima[i] = std::max(maxima[i - 1], assign[i]);
        for (int j = i + 1; j < n; ++j) {
            assign[j] = 0;
            maxima[j] = maxima[i];
        }
    }
    return out;
}

// Partition of the given cells from a block-assignment vector.
inline Partition partition_from_assignment(const std::vector<CellIndex>& cells,
                                           const std::vector<int>& assign) {
    std::map<int, Pool> blocks;
    for (std::size_t i = 0; i < cells.size(); ++i) blocks[assign[i]].members.push_back(cells[i]);
    Partition p;
    for (auto& [id, pool] : blocks) p.pools.push_back(std::move(pool));
    rashomon::canonicalize(p);
    return p;
}

// Partition from pools written as feature combinations.
inline Partition make_partition(const FeatureSpace& space,
                                const std::vector<std::vector<FeatureCombination>>& pools) {
    Partition p;
    for (const auto& pool : pools) {
        Pool q;
        for (const auto& k : pool) q.members.push_back(space.cell_index(k));
        p.pools.push_back(std::move(q));
    }
    rashomon::canonicalize(p);
    return p;
}

// Mean squared error recomputed from raw outcomes: pooled means from the
// observation lists, residuals summed observation by observation.
inline double raw_mse(const Partition& p, const RawData& raw, std::int64_t* n_out = nullptr) {
    std::map<CellIndex, int> pool_of;
    for (std::size_t i = 0; i < p.pools.size(); ++i)
        for (CellIndex c : p.pools[i].members) pool_of[c] = static_cast<int>(i);

    std::vector<double> sum(p.pools.size(), 0.0);
    std::vector<std::int64_t> count(p.pools.size(), 0);
    std::int64_t n = 0;
    for (const auto& [cell, y] : raw.obs) {
        auto it = pool_of.find(cell);
        if (it == pool_of.end()) continue;
        sum[it->second] += y;
        ++count[it->second];
        ++n;
    }
    std::vector<double> mean(p.pools.size(), 0.0);
    for (std::size_t i = 0; i < p.pools.size(); ++i)
        if (count[i] > 0) mean[i] = sum[i] / static_cast<double>(count[i]);

    double sse = 0.0;
    for (const auto& [cell, y] : raw.obs) {
        auto it = pool_of.find(cell);
        if (it == pool_of.end()) continue;
        const double r = y - mean[it->second];
        sse += r * r;
    }
    if (n_out) *n_out = n;
    return n > 0 ? sse / static_cast<double>(n) : 0.0;
}

// Penalized loss with the pool-count penalty, from raw outcomes.
inline double raw_q(const Partition& p, const RawData& raw, double lambda) {
    return raw_mse(p, raw) + lambda * static_cast<double>(p.pools.size());
}

// Least-squares residual sum of squares by modified Gram-Schmidt on the
// design columns; well defined under rank deficiency (dependent columns add
// nothing to the span). Rows are observations, cols[j][i] is X[i][j].
inline double least_squares_sse(const std::vector<std::vector<double>>& cols,
                                std::vector<double> y) {
    const double kTol = 1e-10;
    std::vector<std::vector<double>> basis;
    for (std::vector<double> v : cols) {
        double norm0 = 0.0;
        for (double x : v) norm0 += x * x;
        for (const auto& q : basis) {
            double dot = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) dot += q[i] * v[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * q[i];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm <= kTol * std::max(1.0, norm0)) continue;  // dependent column
        const double inv = 1.0 / std::sqrt(norm);
        for (double& x : v) x *= inv;
        basis.push_back(std::move(v));
    }
    for (const auto& q : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) dot += q[i] * y[i];
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= dot * q[i];
    }
    double sse = 0.0;
    for (double r : y) sse += r * r;
    return sse;
}

// Residual mass of one pool under the per-pool linear outcome model,
// recomputed from raw observations with the Gram-Schmidt route.
inline double linear_pool_sse(const FeatureSpace& space, const Pool& pool, const RawData& raw) {
    std::set<CellIndex> members(pool.members.begin(), pool.members.end());
    std::vector<FeatureCombination> rows;
    std::vector<double> y;
    for (const auto& [cell, yv] : raw.obs) {
        if (!members.count(cell)) continue;
        rows.push_back(space.cell_at(cell));
        y.push_back(yv);
    }
    if (y.empty()) return 0.0;
    const int m = space.num_features();
    std::vector<std::vector<double>> cols(1 + m, std::vector<double>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) {
        cols[0][i] = 1.0;
        for (int f = 0; f < m; ++f) cols[1 + f][i] = static_cast<double>(rows[i][f]);
    }
    return least_squares_sse(cols, y);
}

// Penalized loss under the per-pool linear model, from raw outcomes.
inline double raw_linear_q(const FeatureSpace& space, const Partition& p, const RawData& raw,
                           double lambda) {
    double sse = 0.0;
    for (const auto& pool : p.pools) sse += linear_pool_sse(space, pool, raw);
    const double n = static_cast<double>(raw.obs.size());
    return sse / n + lambda * static_cast<double>(p.pools.size());
}

// Pool count of a split/pool matrix by the direct product formula: each row
// with z zero entries contributes z + 1 level groups.
inline std::uint64_t product_pool_count(const rashomon::PartitionMatrix& sigma) {
    std::uint64_t total = 1;
    for (const auto& row : sigma.rows) {
        std::uint64_t zeros = 0;
        for (auto v : row) zeros += v == 0 ? 1 : 0;
        total *= zeros + 1;
    }
    return total;
}

// Every permissible whole-universe partition with Q <= theta and pool count
// <= h_cap, by filtering all set partitions of the universe. Returns sorted
// partition keys.
inline std::vector<std::string> global_brute_force_keys(const FeatureSpace& space,
                                                        const rashomon::Dataset& d,
                                                        const rashomon::LossConfig& cfg,
                                                        double theta, std::uint64_t h_cap) {
    std::vector<CellIndex> cells(space.universe_size());
    for (CellIndex c = 0; c < cells.size(); ++c) cells[c] = c;
    std::vector<std::string> keys;
    for (const auto& assign : all_set_partitions(static_cast<int>(cells.size()))) {
        Partition p = partition_from_assignment(cells, assign);
        if (p.size() > h_cap) continue;
        if (!rashomon::is_permissible_global(space, p)) continue;
        const double q = rashomon::q_value(space, p, d, cfg);
        if (!rashomon::threshold_leq(q, theta)) continue;
        keys.push_back(rashomon::partition_key(p));
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

}  // namespace oracle
