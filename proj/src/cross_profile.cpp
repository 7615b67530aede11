#include "rashomon/rps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "rashomon/bounds.hpp"
#include "rashomon/permissibility.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rashomon {

namespace {

int l1_distance(const FeatureCombination& a, const FeatureCombination& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

std::set<ProfileMask> pool_profile_set(const FeatureSpace& space, const Pool& pool) {
    std::set<ProfileMask> out;
    for (CellIndex c : pool.members) out.insert(profile_of_cell(space, c));
    return out;
}

// Hypercube edges (lower profile, upper profile) in breadth-first order from
// the control profile.
std::vector<std::pair<ProfileMask, ProfileMask>> hypercube_edges(const FeatureSpace& space,
                                                                 ProfileMask control) {
    const auto profiles = space.all_profiles();
    if (profiles.size() <= 1) return {};
    const std::set<ProfileMask> known(profiles.begin(), profiles.end());
    std::vector<std::pair<ProfileMask, ProfileMask>> edges;
    std::vector<ProfileMask> order;
    std::set<ProfileMask> visited{control};
    order.push_back(control);
    for (std::size_t head = 0; head < order.size(); ++head) {
        const ProfileMask rho = order[head];
        for (int m = 0; m < space.num_features(); ++m) {
            const ProfileMask up = rho | (1u << m);
            if (up == rho || !known.count(up)) continue;
            edges.emplace_back(rho, up);
            if (visited.insert(up).second) order.push_back(up);
        }
    }
    return edges;
}

struct MergeContext {
    const FeatureSpace& space;
    const Dataset& d;
    const LossConfig& cfg;
    double theta;
    double slack_lambda;  // 0 keeps the literal per-merge guard
    std::function<void(Partition&&, double)> sink;
};

int uf_find(std::vector<int>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

Partition materialize(const std::vector<Pool>& base_pools, std::vector<int> parent) {
    std::map<int, Pool> merged;
    for (std::size_t i = 0; i < base_pools.size(); ++i) {
        const int root = uf_find(parent, static_cast<int>(i));
        auto& pool = merged[root];
        pool.members.insert(pool.members.end(), base_pools[i].members.begin(),
                            base_pools[i].members.end());
    }
    Partition p;
    for (auto& [root, pool] : merged) p.pools.push_back(std::move(pool));
    canonicalize(p);
    return p;
}

void merge_rec(const MergeContext& ctx, const std::vector<Pool>& base_pools,
               const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
               const IntersectionMatrix& inter,
               const std::vector<std::vector<PoolableState>>& state,
               const std::vector<int>& parent, std::size_t pos) {
    for (; pos < pairs.size(); ++pos) {
        const auto [r, c] = pairs[pos];
        if (state[r][c] != PoolableState::poolable) continue;
        std::vector<int> next_parent = parent;
        const int a = uf_find(next_parent, static_cast<int>(inter.rows[r]));
        const int b = uf_find(next_parent, static_cast<int>(inter.cols[c]));
        if (a == b) continue;
        next_parent[a] = b;

        Partition merged = materialize(base_pools, next_parent);
        const double q = q_value(ctx.space, merged, ctx.d, ctx.cfg);
        const double bar =
            ctx.theta + ctx.slack_lambda * static_cast<double>(merged.size() > 0 ? merged.size() - 1 : 0);
        if (!threshold_leq(q, bar)) continue;

        auto next_state = state;
        next_state[r][c] = PoolableState::pooled;
        for (std::size_t cc = 0; cc < inter.cols.size(); ++cc)
            if (next_state[r][cc] == PoolableState::poolable)
                next_state[r][cc] = PoolableState::forbidden;
        for (std::size_t rr = 0; rr < inter.rows.size(); ++rr)
            if (next_state[rr][c] == PoolableState::poolable)
                next_state[rr][c] = PoolableState::forbidden;

        ctx.sink(std::move(merged), q);
        merge_rec(ctx, base_pools, pairs, inter, next_state, next_parent, pos + 1);
        // falling through continues the skip branch for this pair
    }
}

void run_merges(const MergeContext& ctx, const Partition& p, const IntersectionMatrix& inter) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t r = 0; r < inter.rows.size(); ++r)
        for (std::size_t c = 0; c < inter.cols.size(); ++c)
            if (inter.state[r][c] == PoolableState::poolable) pairs.emplace_back(r, c);
    if (pairs.empty()) return;
    std::vector<int> parent(p.pools.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    merge_rec(ctx, p.pools, pairs, inter, inter.state, parent, 0);
}

struct Work {
    Partition p;
    double q = 0.0;
};

// Grows the working set from one base partition by cross-profile pooling
// along the given edges until nothing new appears. Admission uses the slack
// bound; callers filter the final theta.
std::vector<Work> explore_base(const FeatureSpace& space, const Partition& base,
                               const std::vector<std::pair<ProfileMask, ProfileMask>>& edges,
                               const Dataset& d, double theta, const LossConfig& cfg) {
    std::vector<Work> items;
    std::unordered_set<std::string> keys;
    const double base_q = q_value(space, base, d, cfg);
    const double base_bar =
        theta + cfg.lambda * static_cast<double>(base.size() > 0 ? base.size() - 1 : 0);
    if (!threshold_leq(base_q, base_bar)) return items;
    keys.insert(partition_key(base));
    items.push_back({base, base_q});

    MergeContext ctx{space, d, cfg, theta, cfg.lambda, nullptr};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& edge : edges) {
            const std::size_t upto = items.size();
            for (std::size_t t = 0; t < upto; ++t) {
                // the sink may grow `items`, so the base must not alias it
                const Partition snapshot = items[t].p;
                const IntersectionMatrix inter =
                    intersection_matrix(space, snapshot, edge.first, edge.second);
                ctx.sink = [&](Partition&& merged, double q) {
                    auto key = partition_key(merged);
                    if (keys.insert(std::move(key)).second) {
                        items.push_back({std::move(merged), q});
                        grew = true;
                    }
                };
                run_merges(ctx, snapshot, inter);
            }
        }
    }
    return items;
}

}  // namespace

IntersectionMatrix intersection_matrix(const FeatureSpace& space, const Partition& p,
                                       ProfileMask rho_i, ProfileMask rho_j) {
    if (!profiles_adjacent(rho_i, rho_j))
        throw std::invalid_argument("profiles are not hypercube-adjacent");
    IntersectionMatrix out;
    std::vector<std::set<ProfileMask>> touched(p.pools.size());
    for (std::size_t i = 0; i < p.pools.size(); ++i) {
        touched[i] = pool_profile_set(space, p.pools[i]);
        if (touched[i].count(rho_i)) out.rows.push_back(i);
        if (touched[i].count(rho_j)) out.cols.push_back(i);
    }
    out.state.assign(out.rows.size(),
                     std::vector<PoolableState>(out.cols.size(), PoolableState::forbidden));
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
        for (std::size_t c = 0; c < out.cols.size(); ++c) {
            const std::size_t a = out.rows[r], b = out.cols[c];
            if (a == b) continue;
            // Pools sharing a profile would break that profile's induced
            // partition if merged.
            bool share = false;
            for (ProfileMask m : touched[a])
                if (touched[b].count(m)) {
                    share = true;
                    break;
                }
            if (share) continue;
            bool variant_pair = false;
            for (CellIndex ca : p.pools[a].members) {
                const auto ka = space.cell_at(ca);
                for (CellIndex cb : p.pools[b].members) {
                    if (l1_distance(ka, space.cell_at(cb)) == 1) {
                        variant_pair = true;
                        break;
                    }
                }
                if (variant_pair) break;
            }
            if (variant_pair) out.state[r][c] = PoolableState::poolable;
        }
    }
    return out;
}

void pool_adjacent_profiles(std::vector<Partition>& acc, const FeatureSpace& space,
                            const Partition& p, const IntersectionMatrix& inter, const Dataset& d,
                            double theta, const LossConfig& cfg) {
    MergeContext ctx{space, d, cfg, theta, 0.0,
                     [&acc](Partition&& merged, double) { acc.push_back(std::move(merged)); }};
    run_merges(ctx, p, inter);
}

std::vector<Partition> pool_profiles(const FeatureSpace& space,
                                     const std::vector<Partition>& candidates, ProfileMask control,
                                     const Dataset& d, double theta, const LossConfig& cfg,
                                     int threads) {
    const auto edges = hypercube_edges(space, control);
    std::vector<std::vector<Work>> per_candidate(candidates.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : 1)
#endif
    for (std::size_t i = 0; i < candidates.size(); ++i)
        per_candidate[i] = explore_base(space, candidates[i], edges, d, theta, cfg);

    std::vector<Partition> out;
    std::unordered_set<std::string> keys;
    for (auto& results : per_candidate) {
        for (auto& work : results) {
            if (!threshold_leq(work.q, theta)) continue;
            if (!is_permissible_global(space, work.p)) continue;
            auto key = partition_key(work.p);
            if (keys.insert(std::move(key)).second) out.push_back(std::move(work.p));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Partition& a, const Partition& b) { return partition_key(a) < partition_key(b); });
    return out;
}

std::vector<std::vector<std::size_t>> select_feasible_combinations(
    const std::vector<std::vector<double>>& lists, double theta) {
    std::vector<std::vector<std::size_t>> out;
    const std::size_t n = lists.size();
    if (n == 0) return out;
    for (const auto& list : lists)
        if (!std::is_sorted(list.begin(), list.end()))
            throw std::invalid_argument("feasibility lists must be ascending");

    // Cheapest completion of every suffix; the early break tests against it.
    std::vector<double> suffix_min(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        if (lists[i].empty()) return out;  // some list has no entries: nothing to combine
        suffix_min[i] = suffix_min[i + 1] + lists[i].front();
    }

    std::vector<std::size_t> path(n);
    std::function<void(std::size_t, double)> rec = [&](std::size_t idx, double budget) {
        if (idx == n) {
            out.push_back(path);
            return;
        }
        for (std::size_t i = 0; i < lists[idx].size(); ++i) {
            if (!threshold_leq(lists[idx][i], budget)) break;
            const double rest = budget - lists[idx][i];
            if (!threshold_leq(suffix_min[idx + 1], rest)) break;
            path[idx] = i;
            rec(idx + 1, rest);
        }
    };
    rec(0, theta);
    return out;
}

std::vector<PartitionMatrix> fullsplit_reference(const FeatureSpace& space) {
    std::vector<PartitionMatrix> out;
    for (ProfileMask rho : space.all_profiles()) out.push_back(make_sigma(space, rho, 0));
    return out;
}

std::vector<PartitionMatrix> greedy_reference(const FeatureSpace& space, const Dataset& d,
                                              const LossConfig& cfg) {
    std::vector<PartitionMatrix> out;
    for (ProfileMask rho : space.all_profiles()) {
        PartitionMatrix sigma = make_sigma(space, rho, 0);
        double best = q_value(space, pools_from_sigma(space, sigma), d, cfg);
        while (true) {
            double round_best = best;
            std::pair<int, int> pick{-1, -1};
            for (std::size_t i = 0; i < sigma.rows.size(); ++i) {
                for (std::size_t j = 0; j < sigma.rows[i].size(); ++j) {
                    if (sigma.rows[i][j]) continue;
                    sigma.rows[i][j] = 1;
                    const double q = q_value(space, pools_from_sigma(space, sigma), d, cfg);
                    sigma.rows[i][j] = 0;
                    if (q < round_best) {  // strict: first index wins ties
                        round_best = q;
                        pick = {static_cast<int>(i), static_cast<int>(j)};
                    }
                }
            }
            if (pick.first < 0) break;
            sigma.rows[pick.first][pick.second] = 1;
            best = round_best;
        }
        out.push_back(std::move(sigma));
    }
    return out;
}

Partition partition_from_sigmas(const FeatureSpace& space,
                                const std::vector<PartitionMatrix>& sigmas) {
    const auto profiles = space.all_profiles();
    if (sigmas.size() != profiles.size())
        throw std::invalid_argument("need one matrix per profile");
    Partition p;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        if (sigmas[i].profile != profiles[i])
            throw std::invalid_argument("matrices out of profile order");
        Partition q = pools_from_sigma(space, sigmas[i]);
        for (auto& pool : q.pools) p.pools.push_back(std::move(pool));
    }
    canonicalize(p);
    return p;
}

Partition partition_from_sigmas_and_merges(
    const FeatureSpace& space, const std::vector<PartitionMatrix>& sigmas,
    const std::vector<std::vector<std::pair<int, int>>>& merges) {
    const auto profiles = space.all_profiles();
    if (sigmas.size() != profiles.size())
        throw std::invalid_argument("need one matrix per profile");
    std::vector<Partition> locals(sigmas.size());
    std::vector<std::size_t> offset(sigmas.size(), 0);
    std::vector<Pool> flat;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (sigmas[i].profile != profiles[i])
            throw std::invalid_argument("matrices out of profile order");
        locals[i] = pools_from_sigma(space, sigmas[i]);
        offset[i] = flat.size();
        for (const Pool& pool : locals[i].pools) flat.push_back(pool);
    }
    std::vector<bool> consumed(flat.size(), false);
    Partition out;
    for (const auto& group : merges) {
        Pool merged;
        for (const auto& [pos, local] : group) {
            if (pos < 0 || static_cast<std::size_t>(pos) >= locals.size() || local < 0 ||
                static_cast<std::size_t>(local) >= locals[pos].pools.size())
                throw std::invalid_argument("merge group references a missing pool");
            std::size_t idx = offset[pos] + static_cast<std::size_t>(local);
            if (consumed[idx]) throw std::invalid_argument("merge groups overlap");
            consumed[idx] = true;
            merged.members.insert(merged.members.end(), flat[idx].members.begin(),
                                  flat[idx].members.end());
        }
        if (!merged.members.empty()) out.pools.push_back(std::move(merged));
    }
    for (std::size_t i = 0; i < flat.size(); ++i)
        if (!consumed[i]) out.pools.push_back(flat[i]);
    canonicalize(out);
    return out;
}

namespace {

struct CandidateSet {
    std::vector<PartitionMatrix> sigmas;
    std::vector<Partition> partitions;
    std::vector<double> values;  // sort key: loss or Q
    std::vector<double> qs;
};

double partition_loss(const FeatureSpace& space, const Partition& p, const Dataset& d,
                      const LossConfig& cfg) {
    NeumaierSum total;
    for (const auto& pool : p.pools) total.add(pool_loss(space, pool, d, cfg).sse);
    return total.value() / static_cast<double>(d.total_n());
}

}  // namespace

RashomonSet enumerate_rps(const FeatureSpace& space, const Dataset& d, const LossConfig& cfg,
                          double q0, double epsilon, const EnumerateOptions& options) {
    if (cfg.penalty != PenaltyKind::pool_count)
        throw std::invalid_argument("set enumeration needs the pool-count penalty");

    RashomonSet rps;
    rps.profiles = space.all_profiles();
    rps.q0 = q0;
    rps.epsilon = epsilon;
    rps.theta = rashomon_threshold(q0, epsilon);
    rps.lambda = cfg.lambda;
    rps.cross_profile = options.cross_profile && rps.profiles.size() > 1;

    const std::int64_t h_cap =
        options.h_max_override >= 0 ? options.h_max_override : max_pools(q0, epsilon, cfg.lambda);
    const auto p_count = static_cast<std::int64_t>(rps.profiles.size());
    if (h_cap < p_count) return rps;  // every profile needs at least one pool

    // Cross-profile pools can leave one profile holding up to h_cap
    // fragments; without pooling the other profiles each claim one pool.
    const std::int64_t profile_cap = rps.cross_profile ? h_cap : h_cap - p_count + 1;

    // Per-profile loss floors: no partition can undercut its cells' own
    // residual mass.
    std::vector<double> floors(rps.profiles.size());
    for (std::size_t i = 0; i < rps.profiles.size(); ++i) {
        const auto sigma = make_sigma(space, rps.profiles[i], 0);
        floors[i] = equivalent_bound(space, sigma, make_fixed(space, rps.profiles[i], 0), d, cfg);
    }
    NeumaierSum floor_sum;
    for (double f : floors) floor_sum.add(f);

    std::vector<CandidateSet> cands(rps.profiles.size());
    const int threads = options.threads > 0 ? options.threads : 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (std::size_t i = 0; i < rps.profiles.size(); ++i) {
        const double budget = rps.theta - floor_sum.value() + floors[i];
        auto sigmas = enumerate_profile(space, rps.profiles[i], d, cfg, budget, profile_cap);
        CandidateSet cs;
        for (auto& sigma : sigmas) {
            Partition p = pools_from_sigma(space, sigma);
            const double loss = partition_loss(space, p, d, cfg);
            const double q = loss + penalty_value(p, cfg);
            cs.values.push_back(rps.cross_profile ? loss : q);
            cs.qs.push_back(q);
            cs.partitions.push_back(std::move(p));
            cs.sigmas.push_back(std::move(sigma));
        }
        // ascending by sort value, ties by matrix contents
        std::vector<std::size_t> order(cs.sigmas.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&cs](std::size_t a, std::size_t b) {
            if (cs.values[a] != cs.values[b]) return cs.values[a] < cs.values[b];
            return cs.sigmas[a] < cs.sigmas[b];
        });
        CandidateSet sorted;
        for (std::size_t k : order) {
            sorted.sigmas.push_back(std::move(cs.sigmas[k]));
            sorted.partitions.push_back(std::move(cs.partitions[k]));
            sorted.values.push_back(cs.values[k]);
            sorted.qs.push_back(cs.qs[k]);
        }
        cands[i] = std::move(sorted);
    }

    for (const auto& cs : cands)
        if (cs.sigmas.empty()) return rps;

    std::vector<std::vector<double>> lists;
    lists.reserve(cands.size());
    for (const auto& cs : cands) lists.push_back(cs.values);
    const double tuple_budget = rps.cross_profile ? rps.theta - cfg.lambda : rps.theta;
    const auto tuples = select_feasible_combinations(lists, tuple_budget);
    if (tuples.empty()) return rps;

    std::vector<Partition> bases;
    bases.reserve(tuples.size());
    for (const auto& tuple : tuples) {
        Partition base;
        for (std::size_t i = 0; i < tuple.size(); ++i)
            for (const auto& pool : cands[i].partitions[tuple[i]].pools) base.pools.push_back(pool);
        canonicalize(base);
        bases.push_back(std::move(base));
    }

    std::vector<Partition> finals;
    if (rps.cross_profile) {
        finals = pool_profiles(space, bases, rps.profiles.front(), d, rps.theta, cfg, threads);
    } else {
        for (auto& base : bases) {
            if (!threshold_leq(q_value(space, base, d, cfg), rps.theta)) continue;
            if (!is_permissible_global(space, base)) continue;
            finals.push_back(std::move(base));
        }
    }

    for (auto& p : finals) {
        if (static_cast<std::int64_t>(p.size()) > h_cap) continue;
        RpsEntry entry;
        entry.q = q_value(space, p, d, cfg);
        entry.pool_count = p.size();

        // Recover the per-profile matrices and the cross-profile merge map.
        for (std::size_t i = 0; i < rps.profiles.size(); ++i) {
            Partition induced;
            for (const auto& pool : p.pools) {
                Pool part;
                for (CellIndex c : pool.members)
                    if (profile_of_cell(space, c) == rps.profiles[i]) part.members.push_back(c);
                if (!part.members.empty()) induced.pools.push_back(std::move(part));
            }
            canonicalize(induced);
            auto sigma = sigma_from_partition(space, induced, rps.profiles[i]);
            if (!sigma) throw std::logic_error("enumerated partition lost profile permissibility");
            entry.sigmas.push_back(std::move(*sigma));
        }
        std::map<ProfileMask, std::size_t> profile_pos;
        for (std::size_t i = 0; i < rps.profiles.size(); ++i) profile_pos[rps.profiles[i]] = i;
        std::map<ProfileMask, std::map<CellIndex, int>> local_index;
        for (std::size_t i = 0; i < rps.profiles.size(); ++i) {
            const Partition local = pools_from_sigma(space, entry.sigmas[i]);
            for (std::size_t k = 0; k < local.pools.size(); ++k)
                for (CellIndex c : local.pools[k].members)
                    local_index[rps.profiles[i]][c] = static_cast<int>(k);
        }
        for (const auto& pool : p.pools) {
            std::set<std::pair<int, int>> frags;
            for (CellIndex c : pool.members) {
                const ProfileMask rho = profile_of_cell(space, c);
                frags.emplace(static_cast<int>(profile_pos[rho]), local_index[rho][c]);
            }
            if (frags.size() > 1)
                entry.merges.emplace_back(frags.begin(), frags.end());
        }
        entry.partition = std::move(p);
        rps.entries.push_back(std::move(entry));
    }

    std::sort(rps.entries.begin(), rps.entries.end(), [](const RpsEntry& a, const RpsEntry& b) {
        if (a.q != b.q) return a.q < b.q;
        return partition_key(a.partition) < partition_key(b.partition);
    });
    if (options.max_entries > 0 && rps.entries.size() > options.max_entries) {
        rps.entries.resize(options.max_entries);
        rps.truncated = true;
    }
    finalize_entries(rps, space, d, cfg);
    return rps;
}

void finalize_entries(RashomonSet& rps, const FeatureSpace& space, const Dataset& d,
                      const LossConfig& cfg) {
    if (rps.entries.empty()) return;
    double q_min = rps.entries.front().q;
    for (const auto& entry : rps.entries) q_min = std::min(q_min, entry.q);
    NeumaierSum mass;
    for (auto& entry : rps.entries) {
        entry.weight = std::exp(-(entry.q - q_min));
        mass.add(entry.weight);
    }
    for (auto& entry : rps.entries) {
        entry.weight /= mass.value();
        entry.effects = fitted_cell_values(space, entry.partition, d, cfg);
    }
}

}  // namespace rashomon
