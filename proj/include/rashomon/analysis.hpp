#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "rashomon/feature_space.hpp"
#include "rashomon/rps.hpp"

namespace rashomon {

// Weight-averaged fitted value per universe cell. Cells some entries leave
// undefined (lenient empty pools) average over the entries that define them.
std::vector<double> conditional_mean_effects(const RashomonSet& rps);

// Worst-case sup-CDF distance between the full posterior and its restriction
// to the rps_size most probable members, each with posterior mass >= theta.
double approximation_error_bound(std::int64_t rps_size, std::int64_t total_size, double theta);

// Exact sup-norm distance between two step CDFs given as (value, mass) atom
// lists; masses must each sum to one.
double empirical_sup_cdf_error(const std::vector<std::pair<double, double>>& full,
                               const std::vector<std::pair<double, double>>& restricted);

// Per-entry treatment effect at x: fitted value with the treatment feature
// at level 1 minus level 0, paired with the entry weight. Entries that leave
// either cell undefined are skipped.
std::vector<std::pair<double, double>> cate(const RashomonSet& rps, const FeatureSpace& space,
                                            const FeatureCombination& x, int treatment_feature);

struct EffectBins {
    // large-negative, small-negative, zero, small-positive, large-positive
    std::array<double, 5> mass{};
    double sd = 0.0;  // scale actually used
};

// Five-bin weighted histogram of effects: < -sd, [-sd, 0), zero, (0, sd],
// > sd. Pass sd_scale <= 0 to use the unweighted sd of the values. The zero
// bin is exact by default; zero_tolerance widens it to |v| <= tolerance.
EffectBins effect_binning(const std::vector<std::pair<double, double>>& values, double sd_scale,
                          double zero_tolerance = 0.0);

struct SizeRatioCell {
    std::uint64_t pool_count = 0;
    double ratio = 0.0;  // exp(-(Q - Q_min)) - 1, in [-1, 0]
    double weight = 0.0;
};

struct SplitFrequency {
    ProfileMask profile = 0;
    int feature = 0;
    int level = 0;  // gap between in-profile levels (level, level + 1)
    double frequency = 0.0;
};

struct RpsSummary {
    std::vector<SizeRatioCell> histogram;                    // (size, ratio) cells
    std::vector<SplitFrequency> split_frequencies;           // fraction of set weight split
    std::vector<std::pair<double, std::uint64_t>> size_curve;  // ascending (Q, size)
};

RpsSummary rps_summary(const RashomonSet& rps);

}  // namespace rashomon
