#include "distaudit/audit.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "distaudit/embedding.hpp"
#include "distaudit/embedding_store.hpp"
#include "distaudit/hash.hpp"
#include "distaudit/csv.hpp"
#include "distaudit/image_io.hpp"

namespace distaudit {

namespace {

using nlohmann::json;

std::string fmt_shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

DistortionSpec grid_entry_from_json(Family family, const json& v) {
    switch (family) {
        case Family::Identity:
            throw std::invalid_argument("identity family takes no grid");
        case Family::Occlusion:
            if (!v.is_string()) throw std::invalid_argument("occlusion grid entries are region names");
            return DistortionSpec::occlusion(face_region_from_name(v.get<std::string>()));
        case Family::GaussianBlur: return DistortionSpec::gaussian_blur(v.get<double>());
        case Family::Brightness: return DistortionSpec::brightness(v.get<double>());
        case Family::GaussianNoise: return DistortionSpec::gaussian_noise(v.get<double>());
        case Family::SaltPepper: return DistortionSpec::salt_pepper(v.get<double>());
        case Family::Resolution: {
            if (v.is_number_integer()) {
                const int s = v.get<int>();
                return DistortionSpec::resolution(s, s);
            }
            if (v.is_array() && v.size() == 2)
                return DistortionSpec::resolution(v[0].get<int>(), v[1].get<int>());
            throw std::invalid_argument("resolution grid entries are ints or [w,h] pairs");
        }
    }
    throw std::invalid_argument("unknown family");
}

json grid_entry_to_json(const DistortionSpec& s) {
    switch (s.family) {
        case Family::Occlusion: return face_region_name(s.region);
        case Family::GaussianBlur:
        case Family::GaussianNoise: return s.sigma;
        case Family::Brightness: return s.beta;
        case Family::SaltPepper: return s.p;
        case Family::Resolution: return json::array({s.width, s.height});
        case Family::Identity: break;
    }
    return nullptr;
}

// Store lookup key for an (image, spec) pair; clean images use the bare id.
std::string store_key(const std::string& image_id, const DistortionSpec& spec) {
    if (spec.family == Family::Identity) return image_id;
    return image_id + "|" + spec.token();
}

// Resolves embeddings for (image, spec) batches, either by running the toy
// extractor over distorted pixels or by looking vectors up in a store.
class FeatureSource {
public:
    FeatureSource(const std::vector<ManifestRecord>& records, const ProviderOptions& provider,
                  std::uint64_t seed, bool restore, bool needs_keypoints)
        : provider_(provider), seed_(seed), restore_(restore) {
        for (const auto& r : records) by_id_[r.image_id] = &r;
        if (!provider_.toy) {
            store_ = store_read(provider_.store_path);
            return;
        }
        // Preload pixels (and landmarks, when occlusions will run) so the
        // parallel embedding loops touch no shared mutable state.
        for (const auto& [id, rec] : by_id_) {
            images_[id] = load_image(rec->path);
            if (needs_keypoints) {
                if (rec->keypoints_path.empty())
                    throw std::runtime_error("image " + id +
                                             " has no keypoints_path; occlusion needs one");
                keypoints_[id] = load_keypoints(rec->keypoints_path);
            }
        }
    }

    std::map<std::string, Embedding> embed_all(const std::vector<std::string>& ids,
                                               const DistortionSpec& spec) {
        std::vector<Embedding> out(ids.size());
        if (!provider_.toy) {
            std::vector<std::string> missing;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const auto* vec = store_.find(store_key(ids[i], spec));
                if (!vec)
                    missing.push_back(store_key(ids[i], spec));
                else
                    out[i] = *vec;
            }
            if (!missing.empty()) {
                std::string msg = "embedding store is missing " +
                                  std::to_string(missing.size()) + " key(s):";
                for (const auto& k : missing) msg += "\n  " + k;
                throw std::runtime_error(msg);
            }
        } else {
            const bool occ = spec.family == Family::Occlusion;
            long long zero_norm = 0;
            const auto n = static_cast<long long>(ids.size());
            for (const auto& id : ids)
                if (!images_.count(id))
                    throw std::runtime_error("manifest does not contain image id: " + id);
            #pragma omp parallel for schedule(dynamic) reduction(+ : zero_norm)
            for (long long i = 0; i < n; ++i) {
                const auto& id = ids[static_cast<std::size_t>(i)];
                const Image& img = images_.at(id);
                const SeedContext ctx{seed_, id};
                const KeypointSet* kps = occ ? &keypoints_.at(id) : nullptr;
                const Image distorted = apply(img, spec, ctx, kps, restore_);
                bool zn = false;
                out[static_cast<std::size_t>(i)] = toy_embed(distorted, &zn);
                if (zn) ++zero_norm;
            }
            zero_norm_count_ += zero_norm;
        }
        std::map<std::string, Embedding> result;
        for (std::size_t i = 0; i < ids.size(); ++i) result[ids[i]] = std::move(out[i]);
        return result;
    }

    long long zero_norm_count() const { return zero_norm_count_; }

    std::map<std::string, std::string> input_hashes(const std::string& manifest_path) const {
        std::map<std::string, std::string> h;
        h["manifest"] = file_content_hash(manifest_path);
        if (provider_.toy) {
            std::uint64_t acc = 0xcbf29ce484222325ull;
            for (const auto& [id, img] : images_) {
                std::uint64_t ih = fnv1a64(id);
                ih = fnv1a64(img.pixels.data(), img.pixels.size(), ih);
                const std::string line = id + ":" + to_hex(ih) + "\n";
                acc = fnv1a64(line, acc);
            }
            h["images"] = "fnv1a64:" + to_hex(acc);
        } else {
            h["store"] = file_content_hash(provider_.store_path);
        }
        return h;
    }

private:
    ProviderOptions provider_;
    std::uint64_t seed_;
    bool restore_;
    std::map<std::string, const ManifestRecord*> by_id_;
    std::map<std::string, Image> images_;
    std::map<std::string, KeypointSet> keypoints_;
    EmbeddingStore store_;
    long long zero_norm_count_ = 0;
};

std::vector<ManifestRecord> load_and_balance(const AuditConfig& config) {
    auto records = load_manifest(config.manifest_path);
    if (config.balance && config.axis != Axis::Intersection)
        records = balance_manifest(records, config.axis, config.seed);
    return records;
}

void apply_thread_count(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

}  // namespace

std::vector<DistortionSpec> AuditConfig::effective_grid() const {
    return grid.empty() ? default_grid(family) : grid;
}

AuditConfig AuditConfig::from_json(const json& j) {
    static const std::set<std::string> known = {
        "manifest",  "axis",    "family",  "grid",    "provider", "store",
        "seed",      "far",     "threshold_scope",    "restore_resolution",
        "balance",   "out_dir", "threads"};
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw std::invalid_argument("unknown config key: " + key);

    AuditConfig c;
    if (j.contains("manifest")) c.manifest_path = j["manifest"].get<std::string>();
    if (j.contains("axis")) c.axis = axis_from_name(j["axis"].get<std::string>());
    if (j.contains("family")) c.family = family_from_name(j["family"].get<std::string>());
    if (j.contains("grid"))
        for (const auto& v : j["grid"]) c.grid.push_back(grid_entry_from_json(c.family, v));
    if (j.contains("provider")) {
        const auto p = j["provider"].get<std::string>();
        if (p == "toy")
            c.provider.toy = true;
        else if (p == "store")
            c.provider.toy = false;
        else
            throw std::invalid_argument("provider must be 'toy' or 'store', got '" + p + "'");
    }
    if (j.contains("store")) c.provider.store_path = j["store"].get<std::string>();
    if (!c.provider.toy && c.provider.store_path.empty())
        throw std::invalid_argument("provider 'store' needs a 'store' path");
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("far")) c.far = j["far"].get<double>();
    if (!(c.far > 0.0 && c.far < 1.0)) throw std::invalid_argument("far must be in (0, 1)");
    if (j.contains("threshold_scope")) {
        const auto s = j["threshold_scope"].get<std::string>();
        if (s == "pooled")
            c.per_subgroup_threshold = false;
        else if (s == "per_subgroup")
            c.per_subgroup_threshold = true;
        else
            throw std::invalid_argument("threshold_scope must be 'pooled' or 'per_subgroup'");
    }
    if (j.contains("restore_resolution")) c.restore_resolution = j["restore_resolution"].get<bool>();
    if (j.contains("balance")) c.balance = j["balance"].get<bool>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    return c;
}

json AuditConfig::echo_json() const {
    json e;
    e["manifest"] = manifest_path;
    e["axis"] = axis_name(axis);
    e["family"] = family_name(family);
    json g = json::array();
    for (const auto& s : effective_grid()) g.push_back(grid_entry_to_json(s));
    e["grid"] = g;
    e["provider"] = provider.toy ? "toy" : "store";
    if (!provider.toy) e["store"] = provider.store_path;
    e["seed"] = seed;
    e["far"] = far;
    e["threshold_scope"] = per_subgroup_threshold ? "per_subgroup" : "pooled";
    e["restore_resolution"] = restore_resolution;
    e["balance"] = balance;
    return e;
}

json AuditReport::provenance() const {
    json p;
    p["tool"] = "distaudit";
    p["version"] = "1.0.0";
    p["seed"] = config.seed;
    p["inputs"] = json(input_hashes);
    p["zero_norm_embeddings"] = zero_norm_embeddings;
    return p;
}

json AuditReport::to_json() const {
    json doc;
    doc["config"] = config.echo_json();
    json rows_json = json::array();
    for (const auto& row : rows) {
        json r;
        r["intensity"] = row.intensity;
        r["spec"] = row.spec.to_json();
        r["threshold"] = row.threshold ? json(*row.threshold) : json(nullptr);
        r["dob"] = row.dob;
        json cells = json::array();
        for (const auto& cell : row.subgroups) {
            json c;
            c["label"] = cell.label;
            c["accuracy"] = cell.accuracy;
            c["n_genuine"] = cell.n_genuine;
            c["n_impostor"] = cell.n_impostor;
            if (cell.threshold) c["threshold"] = *cell.threshold;
            cells.push_back(c);
        }
        r["subgroups"] = cells;
        rows_json.push_back(r);
    }
    doc["rows"] = rows_json;
    doc["provenance"] = provenance();
    return doc;
}

AuditOutcome run_audit(const AuditConfig& config) {
    apply_thread_count(config.threads);
    const auto records = load_and_balance(config);
    AuditOutcome outcome;
    outcome.protocol = generate_pairs(records, config.axis, config.seed);
    const PairProtocol& protocol = outcome.protocol;

    std::vector<DistortionSpec> specs = {DistortionSpec::identity()};
    for (const auto& s : config.effective_grid()) specs.push_back(s);
    const bool any_occlusion =
        std::any_of(specs.begin(), specs.end(),
                    [](const DistortionSpec& s) { return s.family == Family::Occlusion; });

    std::set<std::string> probe_set, gallery_set;
    for (const auto& p : protocol.pairs) {
        probe_set.insert(p.probe_id);
        gallery_set.insert(p.gallery_id);
    }
    // Clean embeddings serve galleries and the identity probe row alike.
    std::set<std::string> clean_set = gallery_set;
    clean_set.insert(probe_set.begin(), probe_set.end());
    const std::vector<std::string> probe_ids(probe_set.begin(), probe_set.end());
    const std::vector<std::string> clean_ids(clean_set.begin(), clean_set.end());

    FeatureSource source(records, config.provider, config.seed, config.restore_resolution,
                         any_occlusion && config.provider.toy);
    const auto clean = source.embed_all(clean_ids, DistortionSpec::identity());

    AuditReport& report = outcome.report;
    report.config = config;

    for (const auto& spec : specs) {
        const auto probe =
            spec.family == Family::Identity ? clean : source.embed_all(probe_ids, spec);

        std::map<std::string, ScoreSet> by_subgroup;
        for (const auto& label : protocol.subgroups) by_subgroup[label].subgroup = label;
        std::vector<double> pooled_impostor;
        for (const auto& p : protocol.pairs) {
            const double s = cosine_similarity(probe.at(p.probe_id), clean.at(p.gallery_id));
            auto& set = by_subgroup[p.subgroup];
            (p.genuine ? set.genuine : set.impostor).push_back(s);
            if (!p.genuine) pooled_impostor.push_back(s);
        }

        AuditRow row;
        row.spec = spec;
        row.intensity = spec.intensity_label();
        double pooled_threshold = 0;
        if (!config.per_subgroup_threshold) {
            pooled_threshold = far_threshold(pooled_impostor, config.far);
            row.threshold = pooled_threshold;
        }
        std::vector<double> accuracies;
        for (const auto& label : protocol.subgroups) {
            const ScoreSet& set = by_subgroup[label];
            SubgroupCell cell;
            cell.label = label;
            const double t = config.per_subgroup_threshold
                                 ? far_threshold(set.impostor, config.far)
                                 : pooled_threshold;
            if (config.per_subgroup_threshold) cell.threshold = t;
            cell.accuracy = verification_accuracy(set, t);
            cell.n_genuine = static_cast<long long>(set.genuine.size());
            cell.n_impostor = static_cast<long long>(set.impostor.size());
            accuracies.push_back(cell.accuracy);
            row.subgroups.push_back(std::move(cell));
        }
        row.dob = degree_of_bias(accuracies);
        report.rows.push_back(std::move(row));
    }

    report.zero_norm_embeddings = source.zero_norm_count();
    report.input_hashes = source.input_hashes(config.manifest_path);
    return outcome;
}

std::vector<CurvePoint> run_similarity_study(const AuditConfig& config) {
    apply_thread_count(config.threads);
    const auto records = load_and_balance(config);

    std::vector<DistortionSpec> specs = {DistortionSpec::identity()};
    for (const auto& s : config.effective_grid()) specs.push_back(s);
    const bool any_occlusion =
        std::any_of(specs.begin(), specs.end(),
                    [](const DistortionSpec& s) { return s.family == Family::Occlusion; });

    std::vector<std::string> ids;
    std::map<std::string, std::string> subgroup_of_id;
    for (const auto& r : records) {
        ids.push_back(r.image_id);
        subgroup_of_id[r.image_id] = subgroup_of(r, config.axis);
    }
    std::sort(ids.begin(), ids.end());
    const auto subgroups = subgroups_in(records, config.axis);

    FeatureSource source(records, config.provider, config.seed, config.restore_resolution,
                         any_occlusion && config.provider.toy);
    const auto clean = source.embed_all(ids, DistortionSpec::identity());

    std::vector<CurvePoint> points;
    for (const auto& spec : specs) {
        const auto distorted =
            spec.family == Family::Identity ? clean : source.embed_all(ids, spec);
        std::map<std::string, std::vector<double>> sims;
        for (const auto& id : ids)
            sims[subgroup_of_id[id]].push_back(
                cosine_similarity(clean.at(id), distorted.at(id)));
        for (const auto& label : subgroups) {
            const auto& v = sims[label];
            if (v.empty()) continue;
            CurvePoint pt;
            pt.intensity = spec.intensity_label();
            pt.subgroup = label;
            pt.mean_similarity = mean_of(v);
            pt.std_similarity = population_std(v);
            pt.n = static_cast<long long>(v.size());
            points.push_back(std::move(pt));
        }
    }
    return points;
}

void write_report_json(const AuditReport& report, const std::string& path) {
    auto out = open_out(path);
    out << report.to_json().dump(2) << "\n";
}

void write_report_csv(const AuditReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "intensity,row,value\n";
    for (const auto& row : report.rows) {
        for (const auto& cell : row.subgroups)
            out << csv::join_row({row.intensity, cell.label, fmt_fixed(cell.accuracy, 2)})
                << "\n";
        out << csv::join_row({row.intensity, "DoB", fmt_fixed(row.dob, 2)}) << "\n";
    }
}

void write_curves_csv(const std::vector<CurvePoint>& points, const std::string& path) {
    auto out = open_out(path);
    out << "intensity,subgroup,mean_similarity,std_similarity,n\n";
    for (const auto& p : points)
        out << csv::join_row({p.intensity, p.subgroup, fmt_fixed(p.mean_similarity, 6),
                              fmt_fixed(p.std_similarity, 6), std::to_string(p.n)})
            << "\n";
}

void write_audit_outputs(const AuditOutcome& outcome, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_report_json(outcome.report, (dir / "report.json").string());
    write_report_csv(outcome.report, (dir / "report.csv").string());
    save_pairs_csv(outcome.protocol, (dir / "pairs.csv").string());
    auto out = open_out((dir / "provenance.json").string());
    out << outcome.report.provenance().dump(2) << "\n";
}

std::vector<ScoredPair> score_pairs(const std::vector<Pair>& pairs,
                                    const std::vector<ManifestRecord>& records,
                                    const DistortionSpec& probe_spec,
                                    const ProviderOptions& provider, std::uint64_t seed,
                                    bool restore_resolution) {
    std::set<std::string> probe_set, clean_set;
    for (const auto& p : pairs) {
        probe_set.insert(p.probe_id);
        clean_set.insert(p.gallery_id);
    }
    if (probe_spec.family == Family::Identity)
        clean_set.insert(probe_set.begin(), probe_set.end());

    FeatureSource source(records, provider, seed, restore_resolution,
                         probe_spec.family == Family::Occlusion && provider.toy);
    const auto clean =
        source.embed_all({clean_set.begin(), clean_set.end()}, DistortionSpec::identity());
    const auto probe = probe_spec.family == Family::Identity
                           ? clean
                           : source.embed_all({probe_set.begin(), probe_set.end()}, probe_spec);

    std::vector<ScoredPair> out;
    for (const auto& p : pairs) {
        ScoredPair sp;
        sp.pair = p;
        sp.score = cosine_similarity(probe.at(p.probe_id), clean.at(p.gallery_id));
        out.push_back(std::move(sp));
    }
    return out;
}

void write_scores_csv(const std::vector<ScoredPair>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "pair_id,subgroup,label,score\n";
    for (const auto& r : rows)
        out << csv::join_row({r.pair.probe_id + ":" + r.pair.gallery_id, r.pair.subgroup,
                              r.pair.genuine ? "1" : "0", fmt_shortest(r.score)})
            << "\n";
}

}  // namespace distaudit
