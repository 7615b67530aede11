#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracle_helpers.hpp"
#include "rashomon/analysis.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/partition.hpp"
#include "rashomon/rps.hpp"

using namespace rashomon;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RpsEntry plain_entry(double q, double weight, std::vector<double> effects) {
    RpsEntry e;
    e.q = q;
    e.weight = weight;
    e.effects = std::move(effects);
    return e;
}

}  // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("conditional mean effects average entry effects by weight") {
    RashomonSet rps;

    SUBCASE("a singleton set returns its own effects") {
        rps.entries.push_back(plain_entry(1.0, 1.0, {2.0, -1.0, 0.5}));
        CHECK(conditional_mean_effects(rps) == std::vector<double>{2.0, -1.0, 0.5});
    }
    SUBCASE("equal weights average arithmetically") {
        rps.entries.push_back(plain_entry(1.0, 0.5, {2.0, 4.0}));
        rps.entries.push_back(plain_entry(1.0, 0.5, {4.0, 0.0}));
        const auto mean = conditional_mean_effects(rps);
        CHECK(mean[0] == doctest::Approx(3.0));
        CHECK(mean[1] == doctest::Approx(2.0));
    }
    SUBCASE("undefined cells renormalize over the entries that define them") {
        rps.entries.push_back(plain_entry(1.0, 0.75, {kNaN, 1.0}));
        rps.entries.push_back(plain_entry(1.0, 0.25, {7.0, 3.0}));
        const auto mean = conditional_mean_effects(rps);
        CHECK(mean[0] == doctest::Approx(7.0));
        CHECK(mean[1] == doctest::Approx(1.5));
    }
    SUBCASE("cells no entry defines stay undefined") {
        rps.entries.push_back(plain_entry(1.0, 1.0, {kNaN, 2.0}));
        CHECK(std::isnan(conditional_mean_effects(rps)[0]));
    }
    SUBCASE("empty sets are rejected") {
        CHECK_THROWS_AS(conditional_mean_effects(rps), std::invalid_argument);
    }
    SUBCASE("constant outcomes give the constant everywhere") {
        FeatureSpace s({3, 3}, false);
        DatasetBuilder b(s);
        for (CellIndex c = 0; c < s.universe_size(); ++c)
            for (int i = 0; i < 2; ++i) b.add(c, 4.25);
        const Dataset d = b.build();
        LossConfig cfg;
        cfg.lambda = 0.05;
        const double q0 = q_value(s, partition_from_sigmas(s, fullsplit_reference(s)), d, cfg);
        const auto real = enumerate_rps(s, d, cfg, q0, 0.1);
        REQUIRE(!real.entries.empty());
        for (double v : conditional_mean_effects(real)) CHECK(v == doctest::Approx(4.25));
    }
}

TEST_CASE("approximation error bound follows the two regimes") {
    CHECK(approximation_error_bound(2, 4, 0.3) == doctest::Approx(0.8));
    CHECK(approximation_error_bound(2, 4, 0.5) == doctest::Approx(0.0));
    CHECK(approximation_error_bound(1, 4, 0.2) == doctest::Approx(1.0));
    CHECK(approximation_error_bound(4, 4, 0.2) == doctest::Approx(0.0));
    CHECK(approximation_error_bound(0, 0, 0.5) == doctest::Approx(0.0));

    CHECK_THROWS_AS(approximation_error_bound(-1, 4, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(approximation_error_bound(5, 4, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(approximation_error_bound(1, 4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(approximation_error_bound(1, 4, 1.0), std::invalid_argument);
}

TEST_CASE("sup-CDF error compares step functions exactly") {
    using Atoms = std::vector<std::pair<double, double>>;
    SUBCASE("identical distributions have zero distance") {
        const Atoms a{{0.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}};
        CHECK(empirical_sup_cdf_error(a, a) == doctest::Approx(0.0));
    }
    SUBCASE("dropping an atom shifts the cdf by its mass") {
        const Atoms full{{0.0, 0.5}, {1.0, 0.5}};
        const Atoms restricted{{0.0, 1.0}};
        CHECK(empirical_sup_cdf_error(full, restricted) == doctest::Approx(0.5));
    }
    SUBCASE("disjoint supports reach the maximum") {
        CHECK(empirical_sup_cdf_error({{0.0, 1.0}}, {{5.0, 1.0}}) == doctest::Approx(1.0));
    }
    SUBCASE("input order does not matter") {
        const Atoms full{{2.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}};
        const Atoms restricted{{1.0, 0.5}, {0.0, 0.5}};
        const Atoms full_sorted{{0.0, 0.5}, {1.0, 0.25}, {2.0, 0.25}};
        CHECK(empirical_sup_cdf_error(full, restricted) ==
              doctest::Approx(empirical_sup_cdf_error(full_sorted, restricted)));
    }
    SUBCASE("masses must be normalized and finite") {
        CHECK_THROWS_AS(empirical_sup_cdf_error({{0.0, 0.5}}, {{0.0, 1.0}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(empirical_sup_cdf_error({{0.0, 1.0}}, {{0.0, 2.0}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(empirical_sup_cdf_error({{0.0, 1.5}, {1.0, -0.5}}, {{0.0, 1.0}}),
                        std::invalid_argument);
    }
}

TEST_CASE("treatment contrasts read fitted values per entry") {
    FeatureSpace s({2, 2}, false);
    const CellIndex c00 = s.cell_index({0, 0});
    const CellIndex c10 = s.cell_index({1, 0});

    SUBCASE("pooled treated and control cells give exactly zero") {
        RashomonSet rps;
        std::vector<double> effects(s.universe_size(), 0.0);
        effects[c00] = 5.0;
        effects[c10] = 5.0;
        rps.entries.push_back(plain_entry(1.0, 1.0, effects));
        const auto values = cate(rps, s, {0, 0}, 0);
        REQUIRE(values.size() == 1);
        CHECK(values[0].first == 0.0);
        CHECK(values[0].second == doctest::Approx(1.0));
    }
    SUBCASE("separate pool means subtract") {
        RashomonSet rps;
        std::vector<double> effects(s.universe_size(), 0.0);
        effects[c00] = 3.0;
        effects[c10] = 5.0;
        rps.entries.push_back(plain_entry(1.0, 0.6, effects));
        const auto values = cate(rps, s, {1, 0}, 0);
        REQUIRE(values.size() == 1);
        CHECK(values[0].first == doctest::Approx(2.0));
        CHECK(values[0].second == doctest::Approx(0.6));
    }
    SUBCASE("entries lacking either fitted value are skipped") {
        RashomonSet rps;
        std::vector<double> defined(s.universe_size(), 1.0);
        std::vector<double> missing(s.universe_size(), 1.0);
        missing[c00] = kNaN;
        rps.entries.push_back(plain_entry(1.0, 0.5, defined));
        rps.entries.push_back(plain_entry(1.0, 0.5, missing));
        CHECK(cate(rps, s, {0, 0}, 0).size() == 1);
    }
    SUBCASE("swapping treated and control labels negates every value") {
        RashomonSet rps, swapped;
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<double> e(s.universe_size(), 0.0);
            e[c00] = 1.0 + rep;
            e[c10] = 4.0 - rep;
            auto f = e;
            std::swap(f[c00], f[c10]);
            rps.entries.push_back(plain_entry(1.0, 1.0 / 3, e));
            swapped.entries.push_back(plain_entry(1.0, 1.0 / 3, f));
        }
        const auto a = cate(rps, s, {0, 0}, 0);
        const auto b = cate(swapped, s, {0, 0}, 0);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].first == doctest::Approx(-b[i].first));
            CHECK(a[i].second == doctest::Approx(b[i].second));
        }
    }
    SUBCASE("invalid queries are rejected") {
        RashomonSet rps;
        rps.entries.push_back(plain_entry(1.0, 1.0, std::vector<double>(s.universe_size(), 0.0)));
        CHECK_THROWS_AS(cate(rps, s, {0, 7}, 0), std::invalid_argument);
        CHECK_THROWS_AS(cate(rps, s, {0, 0}, 5), std::invalid_argument);
        FeatureSpace single({2, 2}, true);
        CHECK_THROWS_AS(cate(rps, single, {1, 1}, 0), std::invalid_argument);
    }
}

TEST_CASE("effect binning classifies against the working scale") {
    using Values = std::vector<std::pair<double, double>>;

    SUBCASE("exact zeros all land in the zero bin") {
        const auto bins = effect_binning(Values{{0.0, 0.4}, {0.0, 0.6}}, 1.0);
        CHECK(bins.mass[2] == doctest::Approx(1.0));
        CHECK(bins.mass[0] + bins.mass[1] + bins.mass[3] + bins.mass[4] == doctest::Approx(0.0));
    }
    SUBCASE("bin boundaries are closed away from zero") {
        const auto bins = effect_binning(
            Values{{-2.0, 1.0}, {-1.0, 1.0}, {-0.5, 1.0}, {0.5, 1.0}, {1.0, 1.0}, {2.0, 1.0}},
            1.0);
        CHECK(bins.mass[0] == doctest::Approx(1.0));  // < -sd
        CHECK(bins.mass[1] == doctest::Approx(2.0));  // [-sd, 0)
        CHECK(bins.mass[2] == doctest::Approx(0.0));
        CHECK(bins.mass[3] == doctest::Approx(2.0));  // (0, sd]
        CHECK(bins.mass[4] == doctest::Approx(1.0));  // > sd
        CHECK(bins.sd == doctest::Approx(1.0));
    }
    SUBCASE("masses are preserved, not normalized") {
        const auto bins = effect_binning(Values{{3.0, 2.0}, {-3.0, 6.0}}, 1.0);
        CHECK(bins.mass[4] == doctest::Approx(2.0));
        CHECK(bins.mass[0] == doctest::Approx(6.0));
    }
    SUBCASE("non-positive scale computes the unweighted sd internally") {
        const auto bins = effect_binning(Values{{-2.0, 0.2}, {0.0, 0.2}, {2.0, 0.6}}, 0.0);
        CHECK(bins.sd == doctest::Approx(std::sqrt(8.0 / 3.0)));
        CHECK(bins.mass[0] == doctest::Approx(0.2));
        CHECK(bins.mass[2] == doctest::Approx(0.2));
        CHECK(bins.mass[4] == doctest::Approx(0.6));
    }
    SUBCASE("a tolerance widens the zero bin") {
        const auto bins = effect_binning(Values{{0.3, 1.0}, {-0.2, 1.0}, {0.8, 1.0}}, 1.0, 0.5);
        CHECK(bins.mass[2] == doctest::Approx(2.0));
        CHECK(bins.mass[3] == doctest::Approx(1.0));
    }
    SUBCASE("bin assignment is scale-equivariant") {
        const Values base{{-2.5, 0.1}, {-0.7, 0.2}, {0.0, 0.3}, {0.9, 0.25}, {4.0, 0.15}};
        Values scaled;
        for (const auto& [v, w] : base) scaled.emplace_back(v * 37.0, w);
        const auto a = effect_binning(base, 1.0);
        const auto b = effect_binning(scaled, 37.0);
        for (std::size_t i = 0; i < 5; ++i) CHECK(a.mass[i] == doctest::Approx(b.mass[i]));
    }
    SUBCASE("random values match a direct classifier") {
        std::uint64_t state = 2024;
        Values values;
        for (int i = 0; i < 200; ++i)
            values.emplace_back(oracle::rough_normal(state), oracle::unit_double(state));
        const double sd = 0.8;
        const auto bins = effect_binning(values, sd);
        std::array<double, 5> want{};
        for (const auto& [v, w] : values) {
            std::size_t bin = v == 0.0 ? 2 : v < -sd ? 0 : v < 0.0 ? 1 : v <= sd ? 3 : 4;
            want[bin] += w;
        }
        for (std::size_t i = 0; i < 5; ++i) CHECK(bins.mass[i] == doctest::Approx(want[i]));
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(effect_binning({}, 1.0), std::invalid_argument);
    }
}

TEST_CASE("set summaries bin sizes, ratios, and split weights") {
    FeatureSpace s({3}, true);
    const ProfileMask rho = s.full_profile();

    const auto entry_with_sigma =
        [&](double q, double weight, std::uint64_t pools,
            const std::vector<std::uint8_t>& row) {
            RpsEntry e;
            e.q = q;
            e.weight = weight;
            e.pool_count = pools;
            PartitionMatrix sigma = make_sigma(s, rho, 0);
            sigma.rows[0] = row;
            e.sigmas.push_back(sigma);
            return e;
        };

    const auto frequency_at = [](const RpsSummary& summary, int level) {
        for (const auto& f : summary.split_frequencies)
            if (f.level == level) return f.frequency;
        FAIL("split frequency not reported for level ", level);
        return -1.0;
    };

    SUBCASE("a singleton set is one cell at ratio zero") {
        RashomonSet rps;
        rps.profiles = {rho};
        rps.entries.push_back(entry_with_sigma(2.0, 1.0, 3, {0, 0}));
        const auto summary = rps_summary(rps);
        REQUIRE(summary.histogram.size() == 1);
        CHECK(summary.histogram[0].pool_count == 3);
        CHECK(summary.histogram[0].ratio == doctest::Approx(0.0));
        CHECK(summary.histogram[0].weight == doctest::Approx(1.0));
        REQUIRE(summary.size_curve.size() == 1);
        CHECK(summary.size_curve[0] == std::pair<double, std::uint64_t>{2.0, 3});
    }
    SUBCASE("equal q entries of different sizes split the weight") {
        RashomonSet rps;
        rps.profiles = {rho};
        rps.entries.push_back(entry_with_sigma(2.0, 0.5, 3, {0, 0}));
        rps.entries.push_back(entry_with_sigma(2.0, 0.5, 5, {0, 0}));
        const auto summary = rps_summary(rps);
        REQUIRE(summary.histogram.size() == 2);
        for (const auto& cell : summary.histogram) {
            CHECK(cell.ratio == doctest::Approx(0.0));
            CHECK(cell.weight == doctest::Approx(0.5));
        }
    }
    SUBCASE("ratios come from q differences and stay in [-1, 0]") {
        RashomonSet rps;
        rps.profiles = {rho};
        const double ln2 = std::log(2.0);
        rps.entries.push_back(entry_with_sigma(1.0, 2.0 / 3, 2, {1, 0}));
        rps.entries.push_back(entry_with_sigma(1.0 + ln2, 1.0 / 3, 3, {0, 0}));
        const auto summary = rps_summary(rps);
        REQUIRE(summary.histogram.size() == 2);
        double lo = 0.0;
        for (const auto& cell : summary.histogram) {
            CHECK(cell.ratio <= 0.0);
            CHECK(cell.ratio >= -1.0);
            lo = std::min(lo, cell.ratio);
        }
        CHECK(lo == doctest::Approx(-0.5));
    }
    SUBCASE("split frequencies weigh entries, not count them") {
        RashomonSet rps;
        rps.profiles = {rho};
        rps.entries.push_back(entry_with_sigma(1.0, 0.3, 2, {1, 0}));
        rps.entries.push_back(entry_with_sigma(1.2, 0.7, 2, {0, 1}));
        const auto summary = rps_summary(rps);
        REQUIRE(summary.split_frequencies.size() == 2);
        CHECK(frequency_at(summary, 1) == doctest::Approx(0.7));
        CHECK(frequency_at(summary, 2) == doctest::Approx(0.3));
        for (const auto& f : summary.split_frequencies) CHECK(f.feature == 0);
    }
    SUBCASE("a class split everywhere has frequency one") {
        RashomonSet rps;
        rps.profiles = {rho};
        rps.entries.push_back(entry_with_sigma(1.0, 0.5, 2, {0, 1}));
        rps.entries.push_back(entry_with_sigma(1.1, 0.5, 3, {0, 0}));
        const auto summary = rps_summary(rps);
        CHECK(frequency_at(summary, 1) == doctest::Approx(1.0));
    }
    SUBCASE("identical cells merge their weight") {
        RashomonSet rps;
        rps.profiles = {rho};
        rps.entries.push_back(entry_with_sigma(2.0, 0.5, 3, {0, 0}));
        rps.entries.push_back(entry_with_sigma(2.0, 0.5, 3, {0, 0}));
        const auto summary = rps_summary(rps);
        REQUIRE(summary.histogram.size() == 1);
        CHECK(summary.histogram[0].weight == doctest::Approx(1.0));
    }
    SUBCASE("empty sets are rejected") {
        RashomonSet rps;
        CHECK_THROWS_AS(rps_summary(rps), std::invalid_argument);
    }
}

TEST_SUITE_END();
