#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rashomon/analysis.hpp"
#include "rashomon/bounds.hpp"
#include "rashomon/enumerate.hpp"
#include "rashomon/io.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/permissibility.hpp"
#include "rashomon/rps.hpp"

namespace {

using namespace rashomon;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;
constexpr int kExitPartial = 4;

struct Overrides {
    std::optional<double> lambda;
    std::optional<double> epsilon;
    std::optional<std::string> reference;
    bool no_cross_profile = false;
    bool single_profile = false;
    std::optional<std::int64_t> h_max;
    std::optional<std::uint64_t> max_rps;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<std::string> data;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--lambda", o.lambda, "pool-count penalty weight");
    cmd->add_option("--epsilon", o.epsilon, "threshold slack around the reference loss");
    cmd->add_option("--reference", o.reference, "fullsplit, greedy, or file:PATH");
    cmd->add_flag("--no-cross-profile", o.no_cross_profile, "disable pooling across profiles");
    cmd->add_flag("--single-profile", o.single_profile, "treat all features as always active");
    cmd->add_option("--h-max", o.h_max, "hard cap on pools per partition");
    cmd->add_option("--max-rps", o.max_rps, "cap on enumerated partitions (flags output partial)");
    cmd->add_option("--seed", o.seed, "seed recorded in the config echo");
    cmd->add_option("--threads", o.threads, "worker threads");
    cmd->add_option("--out", o.out, "artifact output path");
    cmd->add_option("--data", o.data, "CSV data path");
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.lambda) config.lambda = *o.lambda;
    if (o.epsilon) config.epsilon = *o.epsilon;
    if (o.reference) {
        RunConfig probe = parse_run_config(
            std::string("{\"features\":[{\"name\":\"_\",\"levels\":2}],\"reference\":\"") +
            *o.reference + "\"}");
        config.reference = probe.reference;
    }
    if (o.no_cross_profile) config.cross_profile = false;
    if (o.single_profile) config.single_profile_mode = true;
    if (o.h_max) config.h_max = *o.h_max;
    if (o.max_rps) config.max_rps = *o.max_rps;
    if (o.seed) config.seed = *o.seed;
    if (o.threads) config.threads = *o.threads;
    if (o.out) config.out_path = *o.out;
    if (o.data) config.data_path = *o.data;
}

// Empty cells are expected in observational CSVs, so the CLI always runs
// lenient; strict mode stays a library-level choice.
LossConfig loss_config(const RunConfig& config) {
    LossConfig cfg;
    cfg.lambda = config.lambda;
    cfg.outcome_model = OutcomeModel::constant;
    cfg.penalty = PenaltyKind::pool_count;
    cfg.empty_cells = EmptyCellPolicy::lenient;
    return cfg;
}

std::vector<PartitionMatrix> resolve_reference(const FeatureSpace& space, const Dataset& d,
                                               const LossConfig& cfg, const ReferenceSpec& ref) {
    if (ref.kind == ReferenceKind::fullsplit) return fullsplit_reference(space);
    if (ref.kind == ReferenceKind::greedy) return greedy_reference(space, d, cfg);
    std::ifstream in(ref.path, std::ios::binary);
    if (!in) throw ConfigError("cannot open reference file '" + ref.path + "'");
    std::vector<std::string> blocks;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) blocks.push_back(line);
    }
    const auto profiles = space.all_profiles();
    if (blocks.size() != profiles.size())
        throw ConfigError("reference file needs one line per profile (" +
                          std::to_string(profiles.size()) + ")");
    std::vector<PartitionMatrix> out;
    out.reserve(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i)
        out.push_back(sigma_from_string(space, profiles[i], blocks[i]));
    return out;
}

std::string cell_labels(const RunConfig& config, const FeatureSpace& space, CellIndex idx) {
    FeatureCombination k = space.cell_at(idx);
    std::string out;
    for (std::size_t m = 0; m < config.features.size(); ++m) {
        if (m) out += ',';
        out += config.features[m].labels[static_cast<std::size_t>(k[m] - space.min_level())];
    }
    return out;
}

int cmd_enumerate(const RunConfig& config) {
    if (config.data_path.empty()) throw ConfigError("enumerate needs a data path");
    FeatureSpace space = space_from_config(config);
    Dataset data = ingest_csv(config.data_path, config);
    LossConfig cfg = loss_config(config);

    std::vector<PartitionMatrix> ref = resolve_reference(space, data, cfg, config.reference);
    double q0 = q_value(space, partition_from_sigmas(space, ref), data, cfg);

    EnumerateOptions opts;
    opts.cross_profile = config.cross_profile;
    opts.h_max_override = config.h_max;
    opts.max_entries = static_cast<std::size_t>(config.max_rps);
    opts.threads = config.threads;
    RashomonSet rps = enumerate_rps(space, data, cfg, q0, config.epsilon, opts);

    std::string out_path = config.out_path.empty() ? "rps-artifact.txt" : config.out_path;
    write_artifact(out_path, rps, config);
    std::cout << "entries=" << rps.entries.size() << " q0=" << format_double(rps.q0)
              << " theta=" << format_double(rps.theta) << " truncated=" << (rps.truncated ? 1 : 0)
              << " out=" << out_path << "\n";
    return rps.truncated ? kExitPartial : kExitOk;
}

int cmd_analyze(const std::string& artifact_path, const std::string& query,
                const std::string& data_path, const std::string& x_arg,
                const std::string& treatment, double sd_scale) {
    Artifact art = read_artifact(artifact_path);
    FeatureSpace space = space_from_config(art.config);

    if (query == "summary") {
        RpsSummary s = rps_summary(art.rps);
        std::cout << "table,pool_count,ratio,weight\n";
        for (const SizeRatioCell& cell : s.histogram)
            std::cout << "histogram," << cell.pool_count << "," << format_double(cell.ratio) << ","
                      << format_double(cell.weight) << "\n";
        std::cout << "table,profile,feature,level,frequency\n";
        for (const SplitFrequency& f : s.split_frequencies)
            std::cout << "split," << f.profile << "," << f.feature << "," << f.level << ","
                      << format_double(f.frequency) << "\n";
        std::cout << "table,q,pool_count\n";
        for (const auto& [q, size] : s.size_curve)
            std::cout << "size_curve," << format_double(q) << "," << size << "\n";
        return kExitOk;
    }

    if (data_path.empty()) throw ConfigError("query '" + query + "' needs --data");
    Dataset data = ingest_csv(data_path, art.config);
    finalize_entries(art.rps, space, data, loss_config(art.config));

    if (query == "effects") {
        std::vector<double> effects = conditional_mean_effects(art.rps);
        for (const FeatureDecl& f : art.config.features) std::cout << f.name << ",";
        std::cout << "effect\n";
        for (CellIndex k = 0; k < space.universe_size(); ++k)
            std::cout << cell_labels(art.config, space, k) << "," << format_double(effects[k])
                      << "\n";
        return kExitOk;
    }

    if (query == "cate" || query == "bins") {
        int feature = -1;
        for (std::size_t m = 0; m < art.config.features.size(); ++m)
            if (art.config.features[m].name == treatment) feature = static_cast<int>(m);
        if (feature < 0) throw ConfigError("unknown treatment feature '" + treatment + "'");
        std::vector<std::string> labels;
        {
            std::istringstream ss(x_arg);
            std::string item;
            while (std::getline(ss, item, ',')) labels.push_back(item);
        }
        if (labels.size() != art.config.features.size())
            throw ConfigError("--x needs one label per feature");
        FeatureCombination x(labels.size(), 0);
        for (std::size_t m = 0; m < labels.size(); ++m) {
            const FeatureDecl& decl = art.config.features[m];
            int level = -1;
            for (std::size_t r = 0; r < decl.labels.size(); ++r)
                if (decl.labels[r] == labels[m]) level = space.min_level() + static_cast<int>(r);
            if (level < 0)
                throw ConfigError("unknown label '" + labels[m] + "' for feature '" + decl.name +
                                  "'");
            x[m] = level;
        }
        auto pairs = cate(art.rps, space, x, feature);
        if (query == "cate") {
            std::cout << "entry,weight,cate\n";
            for (std::size_t i = 0; i < pairs.size(); ++i)
                std::cout << i << "," << format_double(pairs[i].second) << ","
                          << format_double(pairs[i].first) << "\n";
            double neg = 0.0, zero = 0.0, pos = 0.0, total = 0.0;
            for (const auto& [v, w] : pairs) {
                total += w;
                if (v < 0.0) neg += w;
                else if (v == 0.0) zero += w;
                else pos += w;
            }
            std::cout << "sign,negative,zero,positive\n";
            if (total > 0.0)
                std::cout << "mass," << format_double(neg / total) << ","
                          << format_double(zero / total) << "," << format_double(pos / total)
                          << "\n";
            else
                std::cout << "mass,0,0,0\n";
        } else {
            EffectBins bins = effect_binning(pairs, sd_scale);
            std::cout << "bin,mass\n";
            const char* names[5] = {"large_negative", "small_negative", "zero", "small_positive",
                                    "large_positive"};
            for (int b = 0; b < 5; ++b)
                std::cout << names[b] << "," << format_double(bins.mass[static_cast<std::size_t>(b)])
                          << "\n";
            std::cout << "sd," << format_double(bins.sd) << "\n";
        }
        return kExitOk;
    }

    throw ConfigError("unknown query '" + query + "'");
}

// restricted growth strings; oracle route used only at verify scale
void all_set_partitions(std::size_t n, const std::function<void(const std::vector<int>&)>& emit) {
    std::vector<int> code(n, 0);
    std::vector<int> maxed(n, 0);
    while (true) {
        emit(code);
        std::size_t i = n;
        while (i-- > 1) {
            if (code[i] <= maxed[i - 1]) break;
        }
        if (i == 0) return;
        ++code[i];
        for (std::size_t j = i + 1; j < n; ++j) code[j] = 0;
        for (std::size_t j = i; j < n; ++j)
            maxed[j] = std::max(maxed[j - 1], code[j]);
    }
}

struct SuiteReport {
    std::string name;
    std::uint64_t checks = 0;
    std::uint64_t failures = 0;
};

int cmd_verify(std::uint64_t seed, double threshold_bias) {
    std::vector<SuiteReport> suites;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    {
        SuiteReport suite{"enumeration vs exhaustive filter", 0, 0};
        for (const std::vector<int>& levels :
             {std::vector<int>{3, 3}, std::vector<int>{2, 4}, std::vector<int>{2, 2, 3}}) {
            FeatureSpace space(levels, true);
            ProfileMask rho = space.full_profile();
            for (int ds = 0; ds < 4; ++ds) {
                DatasetBuilder builder(space);
                for (CellIndex k = 0; k < space.universe_size(); ++k)
                    for (int t = 0; t < 4; ++t)
                        builder.add(k, noise(rng) + static_cast<double>(k % 3));
                Dataset data = builder.build();
                LossConfig cfg;
                cfg.lambda = 0.05;
                Partition split = pools_from_sigma(space, make_sigma(space, rho, 0));
                double q0 = q_value(space, split, data, cfg);
                for (double epsilon : {0.02, 0.2}) {
                    double theta = rashomon_threshold(q0, epsilon) + threshold_bias;
                    std::int64_t h = max_pools(q0, epsilon, cfg.lambda);
                    auto fast = enumerate_profile(space, rho, data, cfg, theta, h);
                    auto slow = brute_force_profile(space, rho, data, cfg,
                                                    rashomon_threshold(q0, epsilon), h);
                    ++suite.checks;
                    if (fast != slow) ++suite.failures;
                }
            }
        }
        suites.push_back(suite);
    }

    {
        SuiteReport suite{"profile permissibility dual route", 0, 0};
        for (const std::vector<int>& levels : {std::vector<int>{2, 2}, std::vector<int>{3, 3}}) {
            FeatureSpace space(levels, true);
            const auto cells = space.profile_cells(space.full_profile());
            all_set_partitions(cells.size(), [&](const std::vector<int>& code) {
                Partition p;
                int groups = 0;
                for (int c : code) groups = std::max(groups, c + 1);
                p.pools.resize(static_cast<std::size_t>(groups));
                for (std::size_t i = 0; i < cells.size(); ++i)
                    p.pools[static_cast<std::size_t>(code[i])].members.push_back(cells[i]);
                canonicalize(p);
                ++suite.checks;
                try {
                    is_permissible_profile_partition(space, p, space.full_profile());
                } catch (const std::logic_error&) {
                    ++suite.failures;
                }
            });
        }
        suites.push_back(suite);
    }

    {
        SuiteReport suite{"pool counting identity", 0, 0};
        for (const std::vector<int>& levels :
             {std::vector<int>{4, 4}, std::vector<int>{2, 3, 4}, std::vector<int>{2, 2, 2, 2}}) {
            FeatureSpace space(levels, true);
            ProfileMask rho = space.full_profile();
            PartitionMatrix sigma = make_sigma(space, rho, 0);
            std::size_t slots = 0;
            for (const auto& row : sigma.rows) slots += row.size();
            for (std::uint64_t bits = 0; bits < (1ull << slots); ++bits) {
                std::uint64_t b = bits;
                for (auto& row : sigma.rows)
                    for (auto& v : row) {
                        v = static_cast<std::uint8_t>(b & 1);
                        b >>= 1;
                    }
                ++suite.checks;
                if (count_pools_inclusion_exclusion(space, sigma) !=
                    pools_from_sigma(space, sigma).pools.size())
                    ++suite.failures;
            }
        }
        suites.push_back(suite);
    }

    {
        SuiteReport suite{"search bound under completions", 0, 0};
        FeatureSpace space({2, 3}, true);
        ProfileMask rho = space.full_profile();
        DatasetBuilder builder(space);
        for (CellIndex k = 0; k < space.universe_size(); ++k)
            for (int t = 0; t < 3; ++t) builder.add(k, noise(rng) + static_cast<double>(k));
        Dataset data = builder.build();
        LossConfig cfg;
        cfg.lambda = 0.1;
        PartitionMatrix sigma = make_sigma(space, rho, 0);
        std::vector<std::pair<std::size_t, std::size_t>> slots;
        for (std::size_t r = 0; r < sigma.rows.size(); ++r)
            for (std::size_t c = 0; c < sigma.rows[r].size(); ++c) slots.emplace_back(r, c);
        for (std::uint64_t assign = 0; assign < (1ull << slots.size()); ++assign) {
            for (std::uint64_t fixed = 0; fixed < (1ull << slots.size()); ++fixed) {
                FixedIndexSet fix = make_fixed(space, rho, 0);
                for (std::size_t s = 0; s < slots.size(); ++s) {
                    auto [r, c] = slots[s];
                    sigma.rows[r][c] = static_cast<std::uint8_t>((assign >> s) & 1);
                    fix.fixed[r][c] = (fixed >> s) & 1 ? 1 : 0;
                }
                double bound = search_bound(space, sigma, fix, data, cfg);
                double best = 0.0;
                bool first = true;
                PartitionMatrix completion = sigma;
                std::vector<std::size_t> free_slots;
                for (std::size_t s = 0; s < slots.size(); ++s)
                    if (!((fixed >> s) & 1)) free_slots.push_back(s);
                for (std::uint64_t w = 0; w < (1ull << free_slots.size()); ++w) {
                    for (std::size_t t = 0; t < free_slots.size(); ++t) {
                        auto [r, c] = slots[free_slots[t]];
                        completion.rows[r][c] = static_cast<std::uint8_t>((w >> t) & 1);
                    }
                    double q = q_value(space, pools_from_sigma(space, completion), data, cfg);
                    if (first || q < best) best = q;
                    first = false;
                }
                ++suite.checks;
                if (bound > best + 1e-9 * std::max(1.0, std::abs(best))) ++suite.failures;
            }
        }
        suites.push_back(suite);
    }

    std::uint64_t failed = 0;
    for (const SuiteReport& suite : suites) {
        std::cout << "suite \"" << suite.name << "\": " << suite.checks << " checks, "
                  << suite.failures << " failures\n";
        failed += suite.failures;
    }
    std::cout << (failed == 0 ? "verify: pass\n" : "verify: FAIL\n");
    return failed == 0 ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exhaustive enumeration of near-optimal pooled partitions"};
    app.require_subcommand(1);

    Overrides o;
    std::string config_path;
    CLI::App* enumerate = app.add_subcommand("enumerate", "enumerate the partition set");
    enumerate->add_option("--config", config_path, "JSON run configuration")->required();
    add_override_flags(enumerate, o);

    std::string artifact_path, query, x_arg, treatment, analyze_data;
    double sd_scale = 0.0;
    CLI::App* analyze = app.add_subcommand("analyze", "query an artifact file");
    analyze->add_option("artifact", artifact_path, "artifact file")->required();
    analyze->add_option("query", query, "effects | cate | bins | summary")->required();
    analyze->add_option("--data", analyze_data, "CSV data path (recomputes fitted effects)");
    analyze->add_option("--x", x_arg, "comma-separated labels, one per feature");
    analyze->add_option("--treatment", treatment, "treatment feature name");
    analyze->add_option("--sd-scale", sd_scale, "bin scale; 0 uses the effect sd");

    std::uint64_t verify_seed = 7;
    double threshold_bias = 0.0;
    CLI::App* verify = app.add_subcommand("verify", "run oracle cross-checks");
    verify->add_option("--seed", verify_seed, "seed for the randomized suites");
    verify->add_option("--inject-threshold-bias", threshold_bias,
                       "perturb the acceptance threshold (for testing the checks)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (enumerate->parsed()) {
            RunConfig config = load_run_config(config_path);
            apply_overrides(config, o);
            return cmd_enumerate(config);
        }
        if (analyze->parsed())
            return cmd_analyze(artifact_path, query, analyze_data, x_arg, treatment, sd_scale);
        if (verify->parsed()) return cmd_verify(verify_seed, threshold_bias);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
