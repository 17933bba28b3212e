#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distaudit/distortion.hpp"
#include "distaudit/manifest.hpp"
#include "distaudit/metrics.hpp"
#include "distaudit/protocol.hpp"

#include <nlohmann/json_fwd.hpp>

namespace distaudit {

// Feature source: the built-in toy extractor, or a store of externally
// computed vectors keyed by image_id / image_id|token.
struct ProviderOptions {
    bool toy = true;
    std::string store_path;
};

struct AuditConfig {
    std::string manifest_path;
    Axis axis = Axis::Gender;
    Family family = Family::GaussianBlur;
    std::vector<DistortionSpec> grid;  // empty = canonical grid for `family`
    ProviderOptions provider;
    std::uint64_t seed = 0;
    double far = 0.01;
    bool per_subgroup_threshold = false;  // default: one pooled threshold per intensity
    bool restore_resolution = true;
    bool balance = true;
    std::string out_dir;
    int threads = 0;  // 0 = leave the OpenMP default alone

    // Grid actually audited (config grid or the canonical default).
    std::vector<DistortionSpec> effective_grid() const;

    static AuditConfig from_json(const nlohmann::json& j);
    // Echo of the experiment-defining keys. out_dir and threads are
    // execution parameters and are excluded, which keeps output bytes
    // independent of where and how wide the run executed.
    nlohmann::json echo_json() const;
};

struct SubgroupCell {
    std::string label;
    double accuracy = 0;  // percent
    long long n_genuine = 0;
    long long n_impostor = 0;
    std::optional<double> threshold;  // set in per-subgroup threshold mode
};

struct AuditRow {
    DistortionSpec spec;
    std::string intensity;
    std::optional<double> threshold;  // pooled mode
    std::vector<SubgroupCell> subgroups;
    double dob = 0;
};

struct AuditReport {
    AuditConfig config;
    std::vector<AuditRow> rows;
    long long zero_norm_embeddings = 0;
    std::map<std::string, std::string> input_hashes;
    nlohmann::json provenance() const;
    nlohmann::json to_json() const;
};

struct AuditOutcome {
    AuditReport report;
    PairProtocol protocol;
};

// The full experiment for one distortion family: build the balanced
// protocol once, then for the identity spec plus every grid intensity,
// embed clean galleries and distorted probes, score with cosine
// similarity, set the FAR threshold, and collect per-subgroup accuracy
// and its spread. Deterministic for a fixed config, whatever the thread
// count.
AuditOutcome run_audit(const AuditConfig& config);

// Clean-vs-distorted similarity per subgroup across the same grid, over
// every image of the balanced manifest.
std::vector<CurvePoint> run_similarity_study(const AuditConfig& config);

// Writes report.json, report.csv, pairs.csv and provenance.json.
void write_audit_outputs(const AuditOutcome& outcome, const std::string& out_dir);

void write_report_json(const AuditReport& report, const std::string& path);
void write_report_csv(const AuditReport& report, const std::string& path);
void write_curves_csv(const std::vector<CurvePoint>& points, const std::string& path);

// Score dump used by the match subcommand: pair_id,subgroup,label,score.
struct ScoredPair {
    Pair pair;
    double score = 0;
};
std::vector<ScoredPair> score_pairs(const std::vector<Pair>& pairs,
                                    const std::vector<ManifestRecord>& records,
                                    const DistortionSpec& probe_spec,
                                    const ProviderOptions& provider, std::uint64_t seed,
                                    bool restore_resolution = true);
void write_scores_csv(const std::vector<ScoredPair>& rows, const std::string& path);

}  // namespace distaudit
