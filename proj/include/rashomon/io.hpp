#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rashomon/dataset.hpp"
#include "rashomon/feature_space.hpp"
#include "rashomon/loss.hpp"
#include "rashomon/rps.hpp"

namespace rashomon {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FeatureDecl {
    std::string name;
    int levels = 0;
    std::vector<std::string> labels;  // ordered; labels[i] names level min_level + i
};

struct RunConfig {
    std::vector<FeatureDecl> features;
    std::string outcome_column = "y";
    double lambda = 0.01;
    double epsilon = 0.0;
    ReferenceSpec reference;
    bool cross_profile = true;
    bool single_profile_mode = false;
    std::int64_t h_max = -1;       // < 0 derives the cap from theta / lambda
    std::uint64_t max_rps = 0;     // 0 = unlimited
    std::uint64_t seed = 0;
    int threads = 1;
    std::string data_path;
    std::string out_path;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
// Lossless: parse_run_config(run_config_json(c)) == c field for field.
std::string run_config_json(const RunConfig& config);

FeatureSpace space_from_config(const RunConfig& config);

// Comma-delimited UTF-8 with a header row naming every feature column and
// the outcome column. Label lookups are exact; failures cite row and column.
Dataset ingest_csv(const std::string& path, const RunConfig& config);
Dataset ingest_csv_text(const std::string& text, const RunConfig& config);

struct Artifact {
    RunConfig config;
    RashomonSet rps;  // entry effects/weights are restored by finalize_entries
};

// "01.10" row text for one profile, "-" when the profile has no rows.
PartitionMatrix sigma_from_string(const FeatureSpace& space, ProfileMask rho,
                                  const std::string& text);

std::string artifact_text(const RashomonSet& rps, const RunConfig& config);
Artifact parse_artifact_text(const std::string& text);

// Write-then-rename so readers never observe a partial file.
void write_artifact(const std::string& path, const RashomonSet& rps, const RunConfig& config);
Artifact read_artifact(const std::string& path);

// 17 significant digits; round-trips through strtod exactly.
std::string format_double(double v);

}  // namespace rashomon
