#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/partition.hpp"

using namespace rashomon;

namespace {

PartitionMatrix sigma_for(const FeatureSpace& space, ProfileMask rho,
                          const std::vector<std::vector<std::uint8_t>>& rows) {
    PartitionMatrix s = make_sigma(space, rho, 0);
    REQUIRE(s.rows.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(s.rows[i].size() == rows[i].size());
        s.rows[i] = rows[i];
    }
    return s;
}

}  // namespace

TEST_SUITE_BEGIN("partition");

TEST_CASE("make_sigma shapes rows after the profile's active features") {
    SUBCASE("single-profile full shape") {
        FeatureSpace s({3, 4}, true);
        const auto sigma = make_sigma(s, s.full_profile(), 1);
        REQUIRE(sigma.rows.size() == 2);
        CHECK(sigma.rows[0] == std::vector<std::uint8_t>{1, 1});
        CHECK(sigma.rows[1] == std::vector<std::uint8_t>{1, 1, 1});
    }
    SUBCASE("profile mode drops the control level") {
        FeatureSpace s({3, 4}, false);
        const auto sigma = make_sigma(s, 3, 0);
        REQUIRE(sigma.rows.size() == 2);
        CHECK(sigma.rows[0].size() == 1);
        CHECK(sigma.rows[1].size() == 2);
    }
    SUBCASE("partial profile keeps only active rows") {
        FeatureSpace s({3, 4}, false);
        const auto sigma = make_sigma(s, 2, 0);
        REQUIRE(sigma.rows.size() == 1);
        CHECK(sigma.rows[0].size() == 2);
    }
    SUBCASE("control profile has no rows") {
        FeatureSpace s({3, 4}, false);
        CHECK(make_sigma(s, 0, 1).rows.empty());
    }
}

TEST_CASE("sigma rows render as dot-joined binary strings") {
    FeatureSpace s({3, 3}, true);
    auto sigma = sigma_for(s, s.full_profile(), {{0, 1}, {1, 0}});
    CHECK(sigma_row_string(sigma) == "01.10");
    FeatureSpace p({2, 2}, false);
    CHECK(sigma_row_string(make_sigma(p, 0, 1)) == "");
}

TEST_CASE("level groups follow runs of pooled gaps") {
    using Groups = std::vector<std::pair<int, int>>;
    CHECK(level_groups({0, 1}, 2) == Groups{{1, 1}, {2, 3}});
    CHECK(level_groups({1, 0}, 2) == Groups{{1, 2}, {3, 3}});
    CHECK(level_groups({1, 1}, 2) == Groups{{1, 3}});
    CHECK(level_groups({0, 0}, 2) == Groups{{1, 1}, {2, 2}, {3, 3}});
    CHECK(level_groups({}, 0) == Groups{{1, 1}});
}

TEST_CASE("pools_from_sigma builds level-box products") {
    FeatureSpace s({3, 3}, true);

    SUBCASE("mixed splits give four boxes") {
        const auto p = pools_from_sigma(s, sigma_for(s, 3, {{0, 1}, {1, 0}}));
        const auto want = oracle::make_partition(
            s, {{{1, 1}, {1, 2}},
                {{1, 3}},
                {{2, 1}, {2, 2}, {3, 1}, {3, 2}},
                {{2, 3}, {3, 3}}});
        CHECK(p == want);
    }
    SUBCASE("pooling one feature fully gives two boxes") {
        const auto p = pools_from_sigma(s, sigma_for(s, 3, {{1, 0}, {1, 1}}));
        const auto want = oracle::make_partition(
            s, {{{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}},
                {{3, 1}, {3, 2}, {3, 3}}});
        CHECK(p == want);
    }
    SUBCASE("five-by-three alternating rows give six boxes") {
        FeatureSpace wide({5, 3}, true);
        const auto p = pools_from_sigma(wide, sigma_for(wide, 3, {{1, 0, 1, 0}, {1, 0}}));
        REQUIRE(p.size() == 6);
        const auto want = oracle::make_partition(
            wide, {{{1, 1}, {1, 2}, {2, 1}, {2, 2}},
                   {{1, 3}, {2, 3}},
                   {{3, 1}, {3, 2}, {4, 1}, {4, 2}},
                   {{3, 3}, {4, 3}},
                   {{5, 1}, {5, 2}},
                   {{5, 3}}});
        CHECK(p == want);
    }
    SUBCASE("all ones pools the whole profile") {
        const auto p = pools_from_sigma(s, make_sigma(s, 3, 1));
        REQUIRE(p.size() == 1);
        CHECK(p.pools[0].members.size() == 9);
    }
    SUBCASE("all zeros splits every cell") {
        const auto p = pools_from_sigma(s, make_sigma(s, 3, 0));
        CHECK(p.size() == 9);
    }
    SUBCASE("profile-mode pools carry universe cell indices") {
        FeatureSpace pm({3, 3}, false);
        const auto p = pools_from_sigma(pm, make_sigma(pm, 1, 1));
        REQUIRE(p.size() == 1);
        const std::vector<CellIndex> want{pm.cell_index({1, 0}), pm.cell_index({2, 0})};
        CHECK(p.pools[0].members == want);
    }
    SUBCASE("control profile yields its single cell") {
        FeatureSpace pm({3, 3}, false);
        const auto p = pools_from_sigma(pm, make_sigma(pm, 0, 1));
        REQUIRE(p.size() == 1);
        CHECK(p.pools[0].members == std::vector<CellIndex>{pm.cell_index({0, 0})});
    }
}

TEST_CASE("inclusion-exclusion pool count matches materialized pools") {
    SUBCASE("closed forms") {
        FeatureSpace s({3, 3}, true);
        CHECK(count_pools_inclusion_exclusion(s, make_sigma(s, 3, 1)) == 1);
        CHECK(count_pools_inclusion_exclusion(s, make_sigma(s, 3, 0)) == 9);
        CHECK(count_pools_inclusion_exclusion(s, sigma_for(s, 3, {{0, 1}, {1, 0}})) == 4);
    }
    SUBCASE("exhaustive over small shapes") {
        for (const auto& levels : std::vector<std::vector<int>>{{4}, {3, 3}, {2, 4}, {2, 2, 3}}) {
            FeatureSpace s(levels, true);
            const ProfileMask rho = s.full_profile();
            const auto seed = make_sigma(s, rho, 0);
            std::size_t slots = 0;
            for (const auto& row : seed.rows) slots += row.size();
            for (std::uint64_t bits = 0; bits < (1ull << slots); ++bits) {
                auto sigma = seed;
                std::size_t at = 0;
                for (auto& row : sigma.rows)
                    for (auto& v : row) v = static_cast<std::uint8_t>((bits >> at++) & 1u);
                const auto direct = pools_from_sigma(s, sigma).size();
                CHECK(count_pools_inclusion_exclusion(s, sigma) == direct);
                CHECK(oracle::product_pool_count(sigma) == direct);
            }
        }
    }
}

TEST_CASE("canonicalize sorts members and pools") {
    Partition p;
    p.pools.push_back({{7, 3}});
    p.pools.push_back({{2, 0}});
    canonicalize(p);
    REQUIRE(p.size() == 2);
    CHECK(p.pools[0].members == std::vector<CellIndex>{0, 2});
    CHECK(p.pools[1].members == std::vector<CellIndex>{3, 7});
}

TEST_CASE("partition keys separate distinct partitions") {
    FeatureSpace s({3, 3}, true);
    std::set<std::string> keys;
    const auto seed = make_sigma(s, 3, 0);
    for (std::uint64_t bits = 0; bits < 16; ++bits) {
        auto sigma = seed;
        std::size_t at = 0;
        for (auto& row : sigma.rows)
            for (auto& v : row) v = static_cast<std::uint8_t>((bits >> at++) & 1u);
        keys.insert(partition_key(pools_from_sigma(s, sigma)));
    }
    CHECK(keys.size() == 16);

    Partition shuffled;
    shuffled.pools.push_back({{4, 1}});
    shuffled.pools.push_back({{0}});
    Partition sorted = shuffled;
    canonicalize(sorted);
    canonicalize(shuffled);
    CHECK(partition_key(shuffled) == partition_key(sorted));
}

TEST_CASE("pool assignment reports positions and gaps") {
    FeatureSpace s({3, 3}, false);
    const auto p = pools_from_sigma(s, make_sigma(s, 3, 1));
    const auto assign = pool_assignment(s, p);
    REQUIRE(assign.size() == s.universe_size());
    for (CellIndex c = 0; c < s.universe_size(); ++c) {
        if (profile_of_cell(s, c) == 3u)
            CHECK(assign[c] == 0);
        else
            CHECK(assign[c] == -1);
    }
}

TEST_CASE("matrix ordering is strict and total") {
    FeatureSpace s({3, 3}, true);
    std::vector<PartitionMatrix> all;
    const auto seed = make_sigma(s, 3, 0);
    for (std::uint64_t bits = 0; bits < 16; ++bits) {
        auto sigma = seed;
        std::size_t at = 0;
        for (auto& row : sigma.rows)
            for (auto& v : row) v = static_cast<std::uint8_t>((bits >> at++) & 1u);
        all.push_back(sigma);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        CHECK(all[i] < all[i + 1]);
        CHECK_FALSE(all[i + 1] < all[i]);
        CHECK_FALSE(all[i] == all[i + 1]);
    }
}

TEST_SUITE_END();
