#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rashomon/feature_space.hpp"

using namespace rashomon;

TEST_SUITE_BEGIN("feature_space");

TEST_CASE("construction fixes sizes and level ranges") {
    SUBCASE("profile mode") {
        FeatureSpace s({3, 3}, false);
        CHECK(s.num_features() == 2);
        CHECK(s.universe_size() == 9);
        CHECK(s.min_level() == 0);
        CHECK(s.levels_in_profile(0) == 2);
        CHECK_FALSE(s.single_profile_mode());
    }
    SUBCASE("single-profile mode") {
        FeatureSpace s({3, 4}, true);
        CHECK(s.universe_size() == 12);
        CHECK(s.min_level() == 1);
        CHECK(s.levels_in_profile(0) == 3);
        CHECK(s.levels_in_profile(1) == 4);
        CHECK(s.single_profile_mode());
    }
    SUBCASE("level minimum depends on the mode") {
        CHECK_THROWS_AS(FeatureSpace({1, 3}, false), std::invalid_argument);
        CHECK_THROWS_AS(FeatureSpace({0}, true), std::invalid_argument);
        CHECK_NOTHROW(FeatureSpace({1}, true));
        CHECK_NOTHROW(FeatureSpace({2}, false));
    }
    SUBCASE("degenerate shapes are rejected") {
        CHECK_THROWS_AS(FeatureSpace({}, false), std::invalid_argument);
        CHECK_THROWS_AS(FeatureSpace(std::vector<int>(32, 2), false), std::invalid_argument);
    }
    SUBCASE("universe overflow is detected, not wrapped") {
        CHECK_THROWS_AS(FeatureSpace(std::vector<int>(31, 3), false), std::invalid_argument);
    }
}

TEST_CASE("cell indexing is a mixed-radix bijection") {
    SUBCASE("profile mode round trip") {
        FeatureSpace s({3, 4}, false);
        std::set<CellIndex> seen;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 4; ++b) {
                const FeatureCombination k{a, b};
                const CellIndex idx = s.cell_index(k);
                CHECK(idx < s.universe_size());
                CHECK(s.cell_at(idx) == k);
                seen.insert(idx);
            }
        CHECK(seen.size() == s.universe_size());
    }
    SUBCASE("single-profile levels start at one") {
        FeatureSpace s({2, 3}, true);
        CHECK(s.cell_index({1, 1}) == 0);
        CHECK(s.cell_at(s.universe_size() - 1) == FeatureCombination{2, 3});
        CHECK_THROWS_AS(s.cell_index({0, 1}), std::invalid_argument);
    }
    SUBCASE("range errors") {
        FeatureSpace s({3, 3}, false);
        CHECK_THROWS_AS(s.cell_index({3, 0}), std::invalid_argument);
        CHECK_THROWS_AS(s.cell_index({0}), std::invalid_argument);
        CHECK_THROWS_AS(s.cell_at(9), std::invalid_argument);
    }
}

TEST_CASE("compare gives the componentwise partial order") {
    CHECK(compare({1, 2}, {1, 2}) == PartialOrder::Equal);
    CHECK(compare({1, 1}, {2, 2}) == PartialOrder::Less);
    CHECK(compare({2, 2}, {1, 1}) == PartialOrder::Greater);
    CHECK(compare({1, 2}, {2, 1}) == PartialOrder::Incomparable);
    CHECK(compare({1, 1}, {1, 2}) == PartialOrder::Less);
    CHECK_THROWS_AS(compare({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("variants differ by exactly one level of one feature") {
    CHECK(is_variant({1, 1}, {1, 2}));
    CHECK(is_variant({1, 2}, {1, 1}));
    CHECK_FALSE(is_variant({1, 1}, {2, 2}));
    CHECK_FALSE(is_variant({1, 1}, {1, 3}));
    CHECK_FALSE(is_variant({1, 1}, {1, 1}));
    CHECK_THROWS_AS(is_variant({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("profile_of marks features above control") {
    FeatureSpace s({3, 4}, false);
    CHECK(profile_of(s, {0, 0}) == 0u);
    CHECK(profile_of(s, {2, 0}) == 1u);
    CHECK(profile_of(s, {1, 3}) == 3u);
    CHECK(profile_of_cell(s, s.cell_index({0, 2})) == 2u);

    FeatureSpace single({3, 4}, true);
    CHECK_THROWS_AS(profile_of(single, {1, 1}), std::logic_error);
}

TEST_CASE("profiles enumerate and partition the universe") {
    FeatureSpace s({3, 3}, false);
    const auto profiles = s.all_profiles();
    REQUIRE(profiles.size() == 4);
    CHECK(profiles == std::vector<ProfileMask>{0, 1, 2, 3});

    SUBCASE("profile cells cover the universe disjointly") {
        std::set<CellIndex> seen;
        for (ProfileMask rho : profiles) {
            for (CellIndex c : s.profile_cells(rho)) {
                CHECK(profile_of_cell(s, c) == rho);
                CHECK(seen.insert(c).second);
            }
        }
        CHECK(seen.size() == s.universe_size());
    }
    SUBCASE("cell counts per profile") {
        CHECK(s.profile_cells(0).size() == 1);
        CHECK(s.profile_cells(1).size() == 2);
        CHECK(s.profile_cells(2).size() == 2);
        CHECK(s.profile_cells(3).size() == 4);
    }
    SUBCASE("active feature queries") {
        CHECK(s.feature_active(3, 0));
        CHECK(s.feature_active(3, 1));
        CHECK_FALSE(s.feature_active(1, 1));
        CHECK(s.active_features(3) == std::vector<int>{0, 1});
        CHECK(s.active_features(0).empty());
    }
    SUBCASE("single-profile mode has one profile") {
        FeatureSpace single({3, 3}, true);
        CHECK(single.all_profiles() == std::vector<ProfileMask>{single.full_profile()});
        CHECK(single.profile_cells(single.full_profile()).size() == 9);
    }
}

TEST_CASE("profiles ordered by popcount then mask") {
    FeatureSpace s({2, 2, 2}, false);
    const auto profiles = s.all_profiles();
    REQUIRE(profiles.size() == 8);
    CHECK(profiles == std::vector<ProfileMask>{0, 1, 2, 4, 3, 5, 6, 7});
}

TEST_CASE("profile adjacency is single-bit difference") {
    CHECK(profiles_adjacent(0, 1));
    CHECK(profiles_adjacent(3, 1));
    CHECK_FALSE(profiles_adjacent(1, 2));
    CHECK_FALSE(profiles_adjacent(5, 5));
}

TEST_CASE("edge classes decompose the within-profile Hasse edges") {
    SUBCASE("one feature, three levels") {
        FeatureSpace s({3}, true);
        const auto classes = edge_classes(s, s.full_profile());
        REQUIRE(classes.size() == 2);
        for (const auto& ec : classes) CHECK(ec.edges.size() == 1);
    }
    SUBCASE("two features, three levels each") {
        FeatureSpace s({3, 3}, true);
        const auto classes = edge_classes(s, s.full_profile());
        REQUIRE(classes.size() == 4);
        for (const auto& ec : classes) CHECK(ec.edges.size() == 3);
    }
    SUBCASE("two features, two levels each") {
        FeatureSpace s({2, 2}, true);
        const auto classes = edge_classes(s, s.full_profile());
        REQUIRE(classes.size() == 2);
        for (const auto& ec : classes) CHECK(ec.edges.size() == 2);
    }
    SUBCASE("profile-mode full profile matches in-profile level counts") {
        FeatureSpace s({4, 4}, false);
        const auto classes = edge_classes(s, 3);
        REQUIRE(classes.size() == 4);
        for (const auto& ec : classes) CHECK(ec.edges.size() == 3);
    }
    SUBCASE("classes are disjoint and sizes sum to the edge total") {
        FeatureSpace s({3, 4, 2}, true);
        const auto classes = edge_classes(s, s.full_profile());
        // Sum over features of (L_m - 1) * prod of the other level counts.
        const std::size_t expected = 2 * (4 * 2) + 3 * (3 * 2) + 1 * (3 * 4);
        std::set<std::pair<CellIndex, CellIndex>> seen;
        std::size_t total = 0;
        for (const auto& ec : classes) {
            total += ec.edges.size();
            for (const auto& e : ec.edges) {
                CHECK(seen.insert(e).second);
                CHECK(is_variant(s.cell_at(e.first), s.cell_at(e.second)));
            }
        }
        CHECK(total == expected);
    }
}

TEST_SUITE_END();
