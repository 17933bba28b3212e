// distaudit: distortion-vs-bias audit pipeline for face verification.
//
// Subcommands: distort, pairs, embed, match, audit, curves, validate.
// Every run drops a provenance JSON (config echo, seed, tool version, input
// hashes) next to its outputs; rerunning with identical inputs and seed
// reproduces every output byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "distaudit/audit.hpp"
#include "distaudit/distortion.hpp"
#include "distaudit/embedding.hpp"
#include "distaudit/embedding_store.hpp"
#include "distaudit/hash.hpp"
#include "distaudit/image_io.hpp"
#include "distaudit/manifest.hpp"
#include "distaudit/protocol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace distaudit;

namespace {

constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 ok, 1 runtime/validation failure, 2 usage error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_provenance(const fs::path& dir, const std::string& command, const json& config,
                      const json& inputs, const std::vector<std::string>& outputs) {
    json p;
    p["tool"] = "distaudit";
    p["version"] = kVersion;
    p["command"] = command;
    p["config"] = config;
    p["inputs"] = inputs;
    p["outputs"] = outputs;
    std::ofstream out(dir / "provenance.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write provenance.json in " + dir.string());
    out << p.dump(2) << "\n";
}

DistortionSpec parse_spec_arg(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--spec is not valid JSON: ") + e.what());
    }
    try {
        return DistortionSpec::from_json(doc);
    } catch (const std::exception& e) {
        throw UsageError(std::string("invalid --spec: ") + e.what());
    }
}

std::string safe_token(const DistortionSpec& spec) {
    std::string t = spec.token();
    for (char& c : t)
        if (c == ':' || c == '.') c = '_';
    return t;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const std::exception& e) {
        throw UsageError("config file " + path + " is not valid JSON: " + e.what());
    }
}

// Shared flag -> config-key overrides for audit and curves.
struct AuditFlags {
    std::string config_path, manifest, axis, family, grid, provider, store, scope, out_dir;
    std::uint64_t seed = 0;
    double far = 0;
    int threads = 0;
    bool seed_set = false, far_set = false, threads_set = false;
    bool no_restore = false, no_balance = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--manifest", manifest, "dataset manifest CSV");
        cmd->add_option("--axis", axis, "gender | race | intersection");
        cmd->add_option("--family", family, "distortion family name");
        cmd->add_option("--grid", grid, "comma-separated intensities (family-specific)");
        cmd->add_option("--provider", provider, "toy | store");
        cmd->add_option("--store", store, "embedding store path");
        cmd->add_option("--seed", seed, "master seed")->each([this](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--far", far, "target false accept rate")->each(
            [this](const std::string&) { far_set = true; });
        cmd->add_option("--threshold-scope", scope, "pooled | per_subgroup");
        cmd->add_flag("--no-restore", no_restore, "keep low-resolution probes small");
        cmd->add_flag("--no-balance", no_balance, "skip control-axis balancing");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--threads", threads, "OpenMP worker count")
            ->each([this](const std::string&) { threads_set = true; });
    }

    AuditConfig resolve() const {
        json j = config_path.empty() ? json::object() : load_config_file(config_path);
        if (!manifest.empty()) j["manifest"] = manifest;
        if (!axis.empty()) j["axis"] = axis;
        if (!family.empty()) j["family"] = family;
        if (!grid.empty()) {
            json arr = json::array();
            std::string item;
            std::istringstream gs(grid);
            while (std::getline(gs, item, ',')) {
                try {
                    arr.push_back(json::parse(item));
                } catch (...) {
                    arr.push_back(item);  // occlusion region names
                }
            }
            j["grid"] = arr;
        }
        if (!provider.empty()) j["provider"] = provider;
        if (!store.empty()) j["store"] = store;
        if (seed_set) j["seed"] = seed;
        if (far_set) j["far"] = far;
        if (!scope.empty()) j["threshold_scope"] = scope;
        if (no_restore) j["restore_resolution"] = false;
        if (no_balance) j["balance"] = false;
        if (!out_dir.empty()) j["out_dir"] = out_dir;
        if (threads_set) j["threads"] = threads;

        AuditConfig cfg;
        try {
            cfg = AuditConfig::from_json(j);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        if (cfg.manifest_path.empty()) throw UsageError("a manifest is required (--manifest)");
        if (cfg.out_dir.empty()) throw UsageError("an output directory is required (--out)");
        return cfg;
    }
};

int cmd_distort(const std::string& spec_text, const std::string& in_path,
                const std::string& out_dir, std::uint64_t seed, const std::string& kp_path,
                bool restore) {
    const DistortionSpec spec = parse_spec_arg(spec_text);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    struct Item {
        std::string id;
        std::string path;
        std::string keypoints;
    };
    std::vector<Item> items;
    json inputs;
    const bool manifest_mode = in_path.size() > 4 && in_path.substr(in_path.size() - 4) == ".csv";
    if (manifest_mode) {
        for (const auto& r : load_manifest(in_path))
            items.push_back({r.image_id, r.path, r.keypoints_path});
        inputs["manifest"] = file_content_hash(in_path);
    } else {
        const std::string stem = fs::path(in_path).stem().string();
        items.push_back({stem, in_path, kp_path});
        inputs["image"] = file_content_hash(in_path);
    }

    json emitted = json::array();
    for (const auto& item : items) {
        const Image img = load_image(item.path);
        const KeypointSet* kps = nullptr;
        KeypointSet loaded;
        if (spec.family == Family::Occlusion) {
            if (item.keypoints.empty())
                throw std::runtime_error("occlusion needs keypoints for image " + item.id);
            loaded = load_keypoints(item.keypoints);
            kps = &loaded;
        }
        const Image out = apply(img, spec, SeedContext{seed, item.id}, kps, restore);
        const std::string name =
            item.id + "__" + safe_token(spec) + (out.channels == 1 ? ".pgm" : ".ppm");
        save_image(out, (dir / name).string());
        json rec;
        rec["image"] = name;
        rec["item_id"] = item.id;
        rec["content_hash"] = file_content_hash((dir / name).string());
        emitted.push_back(rec);
    }

    json sidecar;
    sidecar["spec"] = spec.to_json();
    sidecar["seed"] = seed;
    sidecar["restore_resolution"] = restore;
    sidecar["outputs"] = emitted;
    std::ofstream side(dir / "distort_manifest.json", std::ios::binary);
    side << sidecar.dump(2) << "\n";

    json cfg;
    cfg["spec"] = spec.to_json();
    cfg["seed"] = seed;
    cfg["in"] = in_path;
    cfg["restore_resolution"] = restore;
    std::vector<std::string> outs = {"distort_manifest.json"};
    for (const auto& e : emitted) outs.push_back(e["image"].get<std::string>());
    write_provenance(dir, "distort", cfg, inputs, outs);
    return 0;
}

int cmd_pairs(const std::string& manifest_path, const std::string& axis_str, std::uint64_t seed,
              const std::string& out_path, bool no_balance) {
    Axis axis;
    try {
        axis = axis_from_name(axis_str);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    auto records = load_manifest(manifest_path);
    if (!no_balance && axis != Axis::Intersection)
        records = balance_manifest(records, axis, seed);
    const PairProtocol protocol = generate_pairs(records, axis, seed);
    const auto report = validate_protocol(protocol, records);
    if (!report.ok())
        throw std::runtime_error("generated protocol failed validation: " +
                                 report.violations.front());
    save_pairs_csv(protocol, out_path);

    json cfg;
    cfg["manifest"] = manifest_path;
    cfg["axis"] = axis_str;
    cfg["seed"] = seed;
    cfg["balance"] = !no_balance;
    json inputs;
    inputs["manifest"] = file_content_hash(manifest_path);
    write_provenance(fs::path(out_path).parent_path().empty()
                         ? fs::path(".")
                         : fs::path(out_path).parent_path(),
                     "pairs", cfg, inputs, {fs::path(out_path).filename().string()});
    return 0;
}

int cmd_embed(const std::string& manifest_path, const std::string& out_path,
              const std::string& spec_text, std::uint64_t seed, bool restore) {
    const DistortionSpec spec =
        spec_text.empty() ? DistortionSpec::identity() : parse_spec_arg(spec_text);
    const auto records = load_manifest(manifest_path);

    EmbeddingStore store(kToyEmbedDim);
    for (const auto& r : records) {
        const Image img = load_image(r.path);
        const KeypointSet* kps = nullptr;
        KeypointSet loaded;
        if (spec.family == Family::Occlusion) {
            if (r.keypoints_path.empty())
                throw std::runtime_error("occlusion needs keypoints for image " + r.image_id);
            loaded = load_keypoints(r.keypoints_path);
            kps = &loaded;
        }
        const Image distorted = apply(img, spec, SeedContext{seed, r.image_id}, kps, restore);
        const std::string key = spec.family == Family::Identity
                                    ? r.image_id
                                    : r.image_id + "|" + spec.token();
        store.insert(key, toy_embed(distorted));
    }
    store_write(store, out_path);

    json cfg;
    cfg["manifest"] = manifest_path;
    cfg["spec"] = spec.to_json();
    cfg["seed"] = seed;
    json inputs;
    inputs["manifest"] = file_content_hash(manifest_path);
    write_provenance(fs::path(out_path).parent_path().empty()
                         ? fs::path(".")
                         : fs::path(out_path).parent_path(),
                     "embed", cfg, inputs, {fs::path(out_path).filename().string()});
    return 0;
}

int cmd_match(const std::string& pairs_path, const std::string& manifest_path,
              const std::string& provider_str, const std::string& store_path,
              const std::string& spec_text, std::uint64_t seed, const std::string& out_path,
              bool restore) {
    const DistortionSpec spec =
        spec_text.empty() ? DistortionSpec::identity() : parse_spec_arg(spec_text);
    ProviderOptions provider;
    if (provider_str == "toy") {
        provider.toy = true;
    } else if (provider_str == "store") {
        if (store_path.empty()) throw UsageError("provider 'store' needs --store");
        provider.toy = false;
        provider.store_path = store_path;
    } else {
        throw UsageError("provider must be 'toy' or 'store'");
    }

    const auto records = load_manifest(manifest_path);
    const PairProtocol protocol = load_pairs_csv(pairs_path);
    const auto scored = score_pairs(protocol.pairs, records, spec, provider, seed, restore);
    write_scores_csv(scored, out_path);

    json cfg;
    cfg["pairs"] = pairs_path;
    cfg["manifest"] = manifest_path;
    cfg["provider"] = provider_str;
    if (!store_path.empty()) cfg["store"] = store_path;
    cfg["spec"] = spec.to_json();
    cfg["seed"] = seed;
    json inputs;
    inputs["manifest"] = file_content_hash(manifest_path);
    inputs["pairs"] = file_content_hash(pairs_path);
    if (!store_path.empty()) inputs["store"] = file_content_hash(store_path);
    write_provenance(fs::path(out_path).parent_path().empty()
                         ? fs::path(".")
                         : fs::path(out_path).parent_path(),
                     "match", cfg, inputs, {fs::path(out_path).filename().string()});
    return 0;
}

int cmd_audit(const AuditFlags& flags) {
    const AuditConfig cfg = flags.resolve();
    const AuditOutcome outcome = run_audit(cfg);
    write_audit_outputs(outcome, cfg.out_dir);
    std::cout << "audit: " << outcome.report.rows.size() << " intensity rows, "
              << outcome.protocol.pairs.size() << " pairs -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_curves(const AuditFlags& flags) {
    const AuditConfig cfg = flags.resolve();
    const auto points = run_similarity_study(cfg);
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    write_curves_csv(points, (dir / "curves.csv").string());
    json inputs;
    inputs["manifest"] = file_content_hash(cfg.manifest_path);
    write_provenance(dir, "curves", cfg.echo_json(), inputs, {"curves.csv"});
    std::cout << "curves: " << points.size() << " points -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_validate(const std::string& pairs_path, const std::string& manifest_path,
                 const std::string& axis_str) {
    Axis axis;
    try {
        axis = axis_from_name(axis_str);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    const auto records = load_manifest(manifest_path);
    PairProtocol protocol = load_pairs_csv(pairs_path);
    protocol.axis = axis;
    const auto report = validate_protocol(protocol, records);
    if (report.ok()) {
        std::cout << "protocol OK: " << protocol.pairs.size() << " pairs, "
                  << protocol.subgroups.size() << " subgroups\n";
        return 0;
    }
    std::cout << report.violations.size() << " violation(s):\n";
    for (const auto& v : report.violations) std::cout << "  " << v << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distortion-vs-bias audit toolkit for face verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // distort
    auto* distort = app.add_subcommand("distort", "apply one distortion spec to images");
    std::string d_spec, d_in, d_out, d_kp;
    std::uint64_t d_seed = 0;
    bool d_restore = false;
    distort->add_option("--spec", d_spec, "distortion spec JSON")->required();
    distort->add_option("--in", d_in, "image file or manifest CSV")->required();
    distort->add_option("--out", d_out, "output directory")->required();
    distort->add_option("--seed", d_seed, "master seed");
    distort->add_option("--keypoints", d_kp, "keypoint file (single-image occlusion)");
    distort->add_flag("--restore", d_restore, "restore low-resolution probes to source size");

    // pairs
    auto* pairs = app.add_subcommand("pairs", "generate the split/pair protocol");
    std::string p_manifest, p_axis = "gender", p_out = "pairs.csv";
    std::uint64_t p_seed = 0;
    bool p_no_balance = false;
    pairs->add_option("--manifest", p_manifest, "dataset manifest CSV")->required();
    pairs->add_option("--axis", p_axis, "gender | race | intersection");
    pairs->add_option("--seed", p_seed, "master seed");
    pairs->add_option("--out", p_out, "output pairs CSV");
    pairs->add_flag("--no-balance", p_no_balance, "skip control-axis balancing");

    // embed
    auto* embed = app.add_subcommand("embed", "write toy embeddings to a store");
    std::string e_manifest, e_out, e_spec;
    std::uint64_t e_seed = 0;
    bool e_no_restore = false;
    embed->add_option("--manifest", e_manifest, "dataset manifest CSV")->required();
    embed->add_option("--out", e_out, "output store path")->required();
    embed->add_option("--spec", e_spec, "optional distortion applied before embedding");
    embed->add_option("--seed", e_seed, "master seed");
    embed->add_flag("--no-restore", e_no_restore, "keep low-resolution probes small");

    // match
    auto* match = app.add_subcommand("match", "score a pairs file, write the score dump");
    std::string m_pairs, m_manifest, m_provider = "toy", m_store, m_spec, m_out = "scores.csv";
    std::uint64_t m_seed = 0;
    bool m_no_restore = false;
    match->add_option("--pairs", m_pairs, "pairs CSV")->required();
    match->add_option("--manifest", m_manifest, "dataset manifest CSV")->required();
    match->add_option("--provider", m_provider, "toy | store");
    match->add_option("--store", m_store, "embedding store path");
    match->add_option("--spec", m_spec, "probe-side distortion spec JSON");
    match->add_option("--seed", m_seed, "master seed");
    match->add_option("--out", m_out, "output scores CSV");
    match->add_flag("--no-restore", m_no_restore, "keep low-resolution probes small");

    // audit / curves
    auto* audit = app.add_subcommand("audit", "run the full per-intensity bias audit");
    AuditFlags a_flags;
    a_flags.attach(audit);
    auto* curves = app.add_subcommand("curves", "clean-vs-distorted similarity curves");
    AuditFlags c_flags;
    c_flags.attach(curves);

    // validate
    auto* validate = app.add_subcommand("validate", "check a pairs file against its manifest");
    std::string v_pairs, v_manifest, v_axis = "gender";
    validate->add_option("--pairs", v_pairs, "pairs CSV")->required();
    validate->add_option("--manifest", v_manifest, "dataset manifest CSV")->required();
    validate->add_option("--axis", v_axis, "gender | race | intersection");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*distort) return cmd_distort(d_spec, d_in, d_out, d_seed, d_kp, d_restore);
        if (*pairs) return cmd_pairs(p_manifest, p_axis, p_seed, p_out, p_no_balance);
        if (*embed) return cmd_embed(e_manifest, e_out, e_spec, e_seed, !e_no_restore);
        if (*match)
            return cmd_match(m_pairs, m_manifest, m_provider, m_store, m_spec, m_seed, m_out,
                             !m_no_restore);
        if (*audit) return cmd_audit(a_flags);
        if (*curves) return cmd_curves(c_flags);
        if (*validate) return cmd_validate(v_pairs, v_manifest, v_axis);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
