#include "rashomon/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"

namespace rashomon {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

ReferenceSpec parse_reference(const std::string& text) {
    ReferenceSpec ref;
    if (text == "fullsplit") {
        ref.kind = ReferenceKind::fullsplit;
    } else if (text == "greedy") {
        ref.kind = ReferenceKind::greedy;
    } else if (text.rfind("file:", 0) == 0) {
        ref.kind = ReferenceKind::file;
        ref.path = text.substr(5);
        if (ref.path.empty()) throw ConfigError("reference 'file:' needs a path");
    } else {
        throw ConfigError("unknown reference mode '" + text + "'");
    }
    return ref;
}

std::string reference_text(const ReferenceSpec& ref) {
    switch (ref.kind) {
        case ReferenceKind::fullsplit:
            return "fullsplit";
        case ReferenceKind::greedy:
            return "greedy";
        default:
            return "file:" + ref.path;
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig cfg;
    try {
        if (!j.contains("features") || !j["features"].is_array() || j["features"].empty())
            throw ConfigError("config needs a non-empty 'features' array");
        cfg.single_profile_mode = j.value("single_profile", false);
        for (const json& f : j["features"]) {
            FeatureDecl decl;
            decl.name = f.at("name").get<std::string>();
            decl.levels = f.at("levels").get<int>();
            if (decl.name.empty()) throw ConfigError("feature with empty name");
            if (decl.levels < 2) throw ConfigError("feature '" + decl.name + "' needs >= 2 levels");
            if (f.contains("labels")) {
                decl.labels = f["labels"].get<std::vector<std::string>>();
            } else {
                int base = cfg.single_profile_mode ? 1 : 0;
                for (int r = 0; r < decl.levels; ++r)
                    decl.labels.push_back(std::to_string(base + r));
            }
            if (decl.labels.size() != static_cast<std::size_t>(decl.levels))
                throw ConfigError("feature '" + decl.name + "' needs one label per level");
            for (std::size_t a = 0; a < decl.labels.size(); ++a)
                for (std::size_t b = a + 1; b < decl.labels.size(); ++b)
                    if (decl.labels[a] == decl.labels[b])
                        throw ConfigError("feature '" + decl.name + "' has duplicate label '" +
                                          decl.labels[a] + "'");
            cfg.features.push_back(std::move(decl));
        }
        for (std::size_t a = 0; a < cfg.features.size(); ++a)
            for (std::size_t b = a + 1; b < cfg.features.size(); ++b)
                if (cfg.features[a].name == cfg.features[b].name)
                    throw ConfigError("duplicate feature name '" + cfg.features[a].name + "'");

        cfg.outcome_column = j.value("outcome", std::string("y"));
        cfg.lambda = j.value("lambda", 0.01);
        cfg.epsilon = j.value("epsilon", 0.0);
        cfg.reference = parse_reference(j.value("reference", std::string("fullsplit")));
        cfg.cross_profile = j.value("cross_profile", true);
        cfg.h_max = j.value("h_max", static_cast<std::int64_t>(-1));
        cfg.max_rps = j.value("max_rps", static_cast<std::uint64_t>(0));
        cfg.seed = j.value("seed", static_cast<std::uint64_t>(0));
        cfg.threads = j.value("threads", 1);
        cfg.data_path = j.value("data", std::string());
        cfg.out_path = j.value("out", std::string());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config field: ") + e.what());
    }
    if (cfg.lambda <= 0.0) throw ConfigError("lambda must be positive");
    if (cfg.epsilon < 0.0) throw ConfigError("epsilon must be non-negative");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string run_config_json(const RunConfig& config) {
    json features = json::array();
    for (const FeatureDecl& f : config.features) {
        features.push_back({{"name", f.name}, {"levels", f.levels}, {"labels", f.labels}});
    }
    json j{{"features", features},
           {"outcome", config.outcome_column},
           {"lambda", config.lambda},
           {"epsilon", config.epsilon},
           {"reference", reference_text(config.reference)},
           {"cross_profile", config.cross_profile},
           {"single_profile", config.single_profile_mode},
           {"h_max", config.h_max},
           {"max_rps", config.max_rps},
           {"seed", config.seed},
           {"threads", config.threads},
           {"data", config.data_path},
           {"out", config.out_path}};
    return j.dump();
}

FeatureSpace space_from_config(const RunConfig& config) {
    std::vector<int> levels;
    levels.reserve(config.features.size());
    for (const FeatureDecl& f : config.features) levels.push_back(f.levels);
    return FeatureSpace(levels, config.single_profile_mode);
}

Dataset ingest_csv_text(const std::string& text, const RunConfig& config) {
    std::vector<std::string> lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw CsvError("empty file");

    std::vector<std::string> header = split(lines[0], ',');
    for (std::string& h : header) h = trim(h);

    auto column_of = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return static_cast<int>(c);
        throw CsvError("missing column '" + name + "'");
    };
    std::vector<int> feature_col;
    feature_col.reserve(config.features.size());
    for (const FeatureDecl& f : config.features) feature_col.push_back(column_of(f.name));
    int outcome_col = column_of(config.outcome_column);

    // label -> level, exact string match
    std::vector<std::unordered_map<std::string, int>> lookup(config.features.size());
    FeatureSpace space = space_from_config(config);
    for (std::size_t m = 0; m < config.features.size(); ++m) {
        const FeatureDecl& f = config.features[m];
        for (std::size_t r = 0; r < f.labels.size(); ++r)
            lookup[m].emplace(f.labels[r], space.min_level() + static_cast<int>(r));
    }

    DatasetBuilder builder(space);
    bool any = false;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        std::string line = lines[row];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split(line, ',');
        // rows are reported 1-based counting the header
        std::string where = "row " + std::to_string(row + 1);
        if (fields.size() != header.size())
            throw CsvError(where + ": expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(fields.size()));
        FeatureCombination k(config.features.size(), 0);
        for (std::size_t m = 0; m < config.features.size(); ++m) {
            std::string label = trim(fields[static_cast<std::size_t>(feature_col[m])]);
            auto it = lookup[m].find(label);
            if (it == lookup[m].end())
                throw CsvError(where + ", column '" + config.features[m].name +
                               "': unknown label '" + label + "'");
            k[m] = it->second;
        }
        std::string ytext = trim(fields[static_cast<std::size_t>(outcome_col)]);
        char* end = nullptr;
        double y = std::strtod(ytext.c_str(), &end);
        if (ytext.empty() || end != ytext.c_str() + ytext.size())
            throw CsvError(where + ", column '" + config.outcome_column +
                           "': non-numeric outcome '" + ytext + "'");
        builder.add(k, y);
        any = true;
    }
    if (!any) throw CsvError("no data rows");
    return builder.build();
}

Dataset ingest_csv(const std::string& path, const RunConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open data file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_csv_text(buf.str(), config);
}

namespace {

std::string sigma_field(const PartitionMatrix& sigma) {
    if (sigma.rows.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < sigma.rows.size(); ++i) {
        if (i) out += '.';
        for (std::uint8_t v : sigma.rows[i]) out += v ? '1' : '0';
    }
    return out;
}

std::string merges_field(const std::vector<std::vector<std::pair<int, int>>>& merges) {
    if (merges.empty()) return "-";
    std::string out;
    for (std::size_t g = 0; g < merges.size(); ++g) {
        if (g) out += ';';
        for (std::size_t i = 0; i < merges[g].size(); ++i) {
            if (i) out += '+';
            out += std::to_string(merges[g][i].first) + ':' + std::to_string(merges[g][i].second);
        }
    }
    return out;
}

struct LineReader {
    std::vector<std::string> lines;
    std::size_t pos = 0;

    std::string next(const char* what) {
        while (pos < lines.size()) {
            std::string line = trim(lines[pos]);
            ++pos;
            if (!line.empty()) return line;
        }
        throw ArtifactError(std::string("artifact ends before ") + what);
    }
};

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why) {
    throw ArtifactError("artifact line " + std::to_string(line_no) + ": " + why);
}

// key=value tokens after the record tag
std::unordered_map<std::string, std::string> parse_fields(const std::string& line,
                                                          std::size_t line_no) {
    std::unordered_map<std::string, std::string> out;
    for (const std::string& token : split(line, ' ')) {
        if (token.empty()) continue;
        std::size_t eq = token.find('=');
        if (eq == std::string::npos) bad_line(line_no, "expected key=value, got '" + token + "'");
        out[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return out;
}

std::string need(const std::unordered_map<std::string, std::string>& fields, const char* key,
                 std::size_t line_no) {
    auto it = fields.find(key);
    if (it == fields.end()) bad_line(line_no, std::string("missing field '") + key + "'");
    return it->second;
}

double parse_g17(const std::string& text, std::size_t line_no) {
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
        bad_line(line_no, "bad float '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& text, std::size_t line_no) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size())
        bad_line(line_no, "bad integer '" + text + "'");
    return v;
}

std::vector<PartitionMatrix> parse_sigma_field(const FeatureSpace& space,
                                               const std::vector<ProfileMask>& profiles,
                                               const std::string& text, std::size_t line_no) {
    std::vector<std::string> per_profile = split(text, ',');
    if (per_profile.size() != profiles.size())
        bad_line(line_no, "expected " + std::to_string(profiles.size()) + " sigma blocks");
    std::vector<PartitionMatrix> out;
    out.reserve(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        try {
            out.push_back(sigma_from_string(space, profiles[i], per_profile[i]));
        } catch (const ArtifactError& e) {
            bad_line(line_no, e.what());
        }
    }
    return out;
}

std::vector<std::vector<std::pair<int, int>>> parse_merges_field(const std::string& text,
                                                                 std::size_t line_no) {
    std::vector<std::vector<std::pair<int, int>>> out;
    if (text == "-") return out;
    for (const std::string& group : split(text, ';')) {
        std::vector<std::pair<int, int>> pairs;
        for (const std::string& item : split(group, '+')) {
            std::size_t colon = item.find(':');
            if (colon == std::string::npos) bad_line(line_no, "bad merge pair '" + item + "'");
            pairs.emplace_back(
                static_cast<int>(parse_u64(item.substr(0, colon), line_no)),
                static_cast<int>(parse_u64(item.substr(colon + 1), line_no)));
        }
        if (pairs.size() < 2) bad_line(line_no, "merge group needs >= 2 pools");
        out.push_back(std::move(pairs));
    }
    return out;
}

}  // namespace

PartitionMatrix sigma_from_string(const FeatureSpace& space, ProfileMask rho,
                                  const std::string& text) {
    PartitionMatrix sigma = make_sigma(space, rho, 0);
    if (text == "-") {
        if (!sigma.rows.empty()) throw ArtifactError("sigma block missing rows");
        return sigma;
    }
    std::vector<std::string> rows = split(text, '.');
    if (rows.size() != sigma.rows.size()) throw ArtifactError("wrong sigma row count");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != sigma.rows[r].size()) throw ArtifactError("wrong sigma row width");
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (rows[r][c] != '0' && rows[r][c] != '1')
                throw ArtifactError("sigma rows must be 0/1");
            sigma.rows[r][c] = rows[r][c] == '1' ? 1 : 0;
        }
    }
    return sigma;
}

std::string artifact_text(const RashomonSet& rps, const RunConfig& config) {
    std::string out;
    out += "rashomon-artifact 1\n";
    out += "config " + run_config_json(config) + "\n";
    out += "reference q0=" + format_double(rps.q0) + "\n";
    out += "threshold lambda=" + format_double(rps.lambda) + " epsilon=" +
           format_double(rps.epsilon) + " theta=" + format_double(rps.theta) + "\n";
    out += std::string("flags cross_profile=") + (rps.cross_profile ? "1" : "0") +
           " truncated=" + (rps.truncated ? "1" : "0") + "\n";
    out += "profiles";
    for (ProfileMask rho : rps.profiles) out += " " + std::to_string(rho);
    out += "\n";
    out += "entries " + std::to_string(rps.entries.size()) + "\n";
    for (const RpsEntry& entry : rps.entries) {
        out += "entry q=" + format_double(entry.q) +
               " pools=" + std::to_string(entry.pool_count) +
               " weight=" + format_double(entry.weight) + " sigma=";
        for (std::size_t i = 0; i < entry.sigmas.size(); ++i) {
            if (i) out += ',';
            out += sigma_field(entry.sigmas[i]);
        }
        out += " merges=" + merges_field(entry.merges) + "\n";
    }
    out += "end\n";
    return out;
}

Artifact parse_artifact_text(const std::string& text) {
    LineReader reader{split(text, '\n'), 0};

    std::string header = reader.next("header");
    if (header != "rashomon-artifact 1")
        throw ArtifactError("unsupported artifact header '" + header + "'");

    std::string config_line = reader.next("config record");
    if (config_line.rfind("config ", 0) != 0) bad_line(reader.pos, "expected config record");
    Artifact art;
    try {
        art.config = parse_run_config(config_line.substr(7));
    } catch (const ConfigError& e) {
        throw ArtifactError(std::string("embedded config: ") + e.what());
    }
    FeatureSpace space = space_from_config(art.config);
    art.rps.profiles = space.all_profiles();

    std::string ref_line = reader.next("reference record");
    if (ref_line.rfind("reference ", 0) != 0) bad_line(reader.pos, "expected reference record");
    art.rps.q0 = parse_g17(need(parse_fields(ref_line.substr(10), reader.pos), "q0", reader.pos),
                           reader.pos);

    std::string thr_line = reader.next("threshold record");
    if (thr_line.rfind("threshold ", 0) != 0) bad_line(reader.pos, "expected threshold record");
    auto thr = parse_fields(thr_line.substr(10), reader.pos);
    art.rps.lambda = parse_g17(need(thr, "lambda", reader.pos), reader.pos);
    art.rps.epsilon = parse_g17(need(thr, "epsilon", reader.pos), reader.pos);
    art.rps.theta = parse_g17(need(thr, "theta", reader.pos), reader.pos);

    std::string flag_line = reader.next("flags record");
    if (flag_line.rfind("flags ", 0) != 0) bad_line(reader.pos, "expected flags record");
    auto flags = parse_fields(flag_line.substr(6), reader.pos);
    art.rps.cross_profile = need(flags, "cross_profile", reader.pos) == "1";
    art.rps.truncated = need(flags, "truncated", reader.pos) == "1";

    std::string prof_line = reader.next("profiles record");
    if (prof_line.rfind("profiles", 0) != 0) bad_line(reader.pos, "expected profiles record");
    {
        std::vector<ProfileMask> listed;
        std::istringstream ss(prof_line.substr(8));
        std::uint64_t mask = 0;
        while (ss >> mask) listed.push_back(static_cast<ProfileMask>(mask));
        if (listed != art.rps.profiles)
            bad_line(reader.pos, "profile list does not match the embedded config");
    }

    std::string count_line = reader.next("entries record");
    if (count_line.rfind("entries ", 0) != 0) bad_line(reader.pos, "expected entries record");
    std::uint64_t count = parse_u64(trim(count_line.substr(8)), reader.pos);

    art.rps.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string line = reader.next("entry record");
        if (line.rfind("entry ", 0) != 0) bad_line(reader.pos, "expected entry record");
        auto fields = parse_fields(line.substr(6), reader.pos);
        RpsEntry entry;
        entry.q = parse_g17(need(fields, "q", reader.pos), reader.pos);
        entry.pool_count = parse_u64(need(fields, "pools", reader.pos), reader.pos);
        entry.weight = parse_g17(need(fields, "weight", reader.pos), reader.pos);
        entry.sigmas =
            parse_sigma_field(space, art.rps.profiles, need(fields, "sigma", reader.pos),
                              reader.pos);
        entry.merges = parse_merges_field(need(fields, "merges", reader.pos), reader.pos);
        try {
            entry.partition = partition_from_sigmas_and_merges(space, entry.sigmas, entry.merges);
        } catch (const std::invalid_argument& e) {
            bad_line(reader.pos, e.what());
        }
        if (entry.partition.pools.size() != entry.pool_count)
            bad_line(reader.pos, "pool count does not match sigma/merges");
        art.rps.entries.push_back(std::move(entry));
    }

    if (reader.next("end record") != "end") bad_line(reader.pos, "expected end record");
    return art;
}

void write_artifact(const std::string& path, const RashomonSet& rps, const RunConfig& config) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ArtifactError("cannot open '" + tmp + "' for writing");
        out << artifact_text(rps, config);
        out.flush();
        if (!out) throw ArtifactError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw ArtifactError("cannot move artifact into place at '" + path + "'");
    }
}

Artifact read_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open artifact '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_artifact_text(buf.str());
}

}  // namespace rashomon
