#include "rashomon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "rashomon/numeric.hpp"

namespace rashomon {

std::vector<double> conditional_mean_effects(const RashomonSet& rps) {
    if (rps.entries.empty()) throw std::invalid_argument("empty set");
    const std::size_t cells = rps.entries.front().effects.size();
    std::vector<double> out(cells, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 0; c < cells; ++c) {
        NeumaierSum num, den;
        for (const auto& entry : rps.entries) {
            const double v = entry.effects[c];
            if (std::isnan(v)) continue;
            num.add(entry.weight * v);
            den.add(entry.weight);
        }
        if (den.value() > 0.0) out[c] = num.value() / den.value();
    }
    return out;
}

double approximation_error_bound(std::int64_t rps_size, std::int64_t total_size, double theta) {
    if (rps_size < 0 || total_size < rps_size)
        throw std::invalid_argument("need 0 <= rps_size <= total_size");
    if (!(theta > 0.0) || !(theta < 1.0)) throw std::invalid_argument("theta must be in (0,1)");
    if (total_size == 0) return 0.0;
    const double kept = static_cast<double>(rps_size);
    const double all = static_cast<double>(total_size);
    const double bound = theta > 1.0 / all ? 2.0 * (1.0 - kept * theta)
                                           : 2.0 * (all - kept) * theta;
    return std::min(1.0, bound);
}

double empirical_sup_cdf_error(const std::vector<std::pair<double, double>>& full,
                               const std::vector<std::pair<double, double>>& restricted) {
    const auto check = [](const std::vector<std::pair<double, double>>& atoms) {
        NeumaierSum mass;
        for (const auto& [v, m] : atoms) {
            if (std::isnan(v)) throw std::invalid_argument("functional value is NaN");
            if (m < 0.0) throw std::invalid_argument("negative mass");
            mass.add(m);
        }
        if (std::abs(mass.value() - 1.0) > 1e-9)
            throw std::invalid_argument("masses must sum to one");
    };
    check(full);
    check(restricted);

    auto a = full, b = restricted;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double fa = 0.0, fb = 0.0, sup = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        double t;
        if (j == b.size() || (i < a.size() && a[i].first <= b[j].first))
            t = a[i].first;
        else
            t = b[j].first;
        while (i < a.size() && a[i].first == t) fa += a[i++].second;
        while (j < b.size() && b[j].first == t) fb += b[j++].second;
        sup = std::max(sup, std::abs(fa - fb));
    }
    return sup;
}

std::vector<std::pair<double, double>> cate(const RashomonSet& rps, const FeatureSpace& space,
                                            const FeatureCombination& x, int treatment_feature) {
    if (space.single_profile_mode())
        throw std::invalid_argument("treatment contrasts need a control level");
    if (treatment_feature < 0 || treatment_feature >= space.num_features())
        throw std::invalid_argument("treatment feature out of range");
    FeatureCombination treated = x, control = x;
    treated[treatment_feature] = 1;
    control[treatment_feature] = 0;
    const CellIndex ct = space.cell_index(treated);
    const CellIndex cc = space.cell_index(control);

    std::vector<std::pair<double, double>> out;
    for (const auto& entry : rps.entries) {
        const double yt = entry.effects[ct];
        const double yc = entry.effects[cc];
        if (std::isnan(yt) || std::isnan(yc)) continue;
        out.emplace_back(yt - yc, entry.weight);
    }
    return out;
}

EffectBins effect_binning(const std::vector<std::pair<double, double>>& values, double sd_scale,
                          double zero_tolerance) {
    if (values.empty()) throw std::invalid_argument("no effects to bin");
    EffectBins bins;
    if (sd_scale > 0.0) {
        bins.sd = sd_scale;
    } else {
        NeumaierSum sum;
        for (const auto& [v, w] : values) sum.add(v);
        const double mean = sum.value() / static_cast<double>(values.size());
        NeumaierSum sq;
        for (const auto& [v, w] : values) sq.add((v - mean) * (v - mean));
        bins.sd = std::sqrt(sq.value() / static_cast<double>(values.size()));
    }
    for (const auto& [v, w] : values) {
        std::size_t bin;
        if (std::abs(v) <= zero_tolerance)
            bin = 2;
        else if (v < -bins.sd)
            bin = 0;
        else if (v < 0.0)
            bin = 1;
        else if (v <= bins.sd)
            bin = 3;
        else
            bin = 4;
        bins.mass[bin] += w;
    }
    return bins;
}

RpsSummary rps_summary(const RashomonSet& rps) {
    if (rps.entries.empty()) throw std::invalid_argument("empty set");
    RpsSummary summary;

    double q_min = rps.entries.front().q;
    for (const auto& entry : rps.entries) q_min = std::min(q_min, entry.q);

    std::map<std::pair<std::uint64_t, double>, double> cells;
    for (const auto& entry : rps.entries) {
        // posterior mass relative to the best entry; never exponentiates a
        // positive difference
        const double ratio = std::exp(-(entry.q - q_min)) - 1.0;
        cells[{entry.pool_count, ratio}] += entry.weight;
        summary.size_curve.emplace_back(entry.q, entry.pool_count);
    }
    for (const auto& [key, weight] : cells)
        summary.histogram.push_back({key.first, key.second, weight});
    std::sort(summary.size_curve.begin(), summary.size_curve.end());

    // Fraction of set weight whose matrices split each edge class. Row r of
    // a profile's matrix belongs to the r-th active feature of its mask.
    const auto nth_set_bit = [](ProfileMask mask, int n) {
        for (int bit = 0; bit < 32; ++bit)
            if ((mask >> bit) & 1u)
                if (n-- == 0) return bit;
        return -1;
    };
    NeumaierSum total_weight;
    for (const auto& entry : rps.entries) total_weight.add(entry.weight);
    const double total = total_weight.value();
    for (std::size_t i = 0; i < rps.profiles.size(); ++i) {
        if (rps.entries.front().sigmas.size() <= i) break;
        const auto& shape = rps.entries.front().sigmas[i];
        for (std::size_t row = 0; row < shape.rows.size(); ++row) {
            for (std::size_t gap = 0; gap < shape.rows[row].size(); ++gap) {
                NeumaierSum splits;
                for (const auto& entry : rps.entries)
                    if (!entry.sigmas[i].rows[row][gap]) splits.add(entry.weight);
                summary.split_frequencies.push_back(
                    {rps.profiles[i], nth_set_bit(rps.profiles[i], static_cast<int>(row)),
                     static_cast<int>(gap) + 1, total > 0.0 ? splits.value() / total : 0.0});
            }
        }
    }
    return summary;
}

}  // namespace rashomon
