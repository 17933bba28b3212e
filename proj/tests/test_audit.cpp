#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "distaudit/audit.hpp"
#include "distaudit/embedding.hpp"
#include "distaudit/embedding_store.hpp"
#include "distaudit/image_io.hpp"
#include "distaudit/metrics.hpp"
#include "test_util.hpp"

using namespace distaudit;
namespace fs = std::filesystem;

namespace {

AuditConfig base_config() {
    AuditConfig cfg;
    cfg.manifest_path = testutil::synth_manifest();
    cfg.axis = Axis::Gender;
    cfg.family = Family::GaussianBlur;
    cfg.grid = {DistortionSpec::gaussian_blur(4.0)};
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("run_audit produces a consistent report on the synthetic dataset") {
    const AuditConfig cfg = base_config();
    const AuditOutcome outcome = run_audit(cfg);
    const AuditReport& report = outcome.report;

    REQUIRE(report.rows.size() == 2);  // identity + sigma 4.0
    CHECK(report.rows[0].intensity == "0");
    CHECK(report.rows[1].intensity == "4");

    for (const auto& row : report.rows) {
        REQUIRE(row.subgroups.size() == 2);
        CHECK(row.subgroups[0].label == "G1");
        CHECK(row.subgroups[1].label == "G2");
        for (const auto& cell : row.subgroups) {
            CHECK(cell.n_genuine == 3000);
            CHECK(cell.n_impostor == 3000);
            CHECK(cell.accuracy >= 0.0);
            CHECK(cell.accuracy <= 100.0);
        }
        // the reported DoB recomputes from the row's own accuracies
        CHECK(row.dob ==
              doctest::Approx(degree_of_bias({row.subgroups[0].accuracy,
                                              row.subgroups[1].accuracy}))
                  .epsilon(1e-9));
        REQUIRE(row.threshold.has_value());
    }

    // the synthetic data is tuned to verify well at the baseline
    CHECK(report.rows[0].subgroups[0].accuracy > 95.0);
    CHECK(report.rows[0].subgroups[1].accuracy > 95.0);
    // heavy blur costs accuracy
    CHECK(report.rows[1].subgroups[0].accuracy < report.rows[0].subgroups[0].accuracy);

    CHECK(validate_protocol(outcome.protocol, load_manifest(cfg.manifest_path)).ok());
}

TEST_CASE("identity row equals a no-distortion baseline run") {
    AuditConfig cfg = base_config();
    const AuditOutcome full = run_audit(cfg);

    AuditConfig baseline_cfg = cfg;
    baseline_cfg.family = Family::Identity;
    baseline_cfg.grid.clear();
    const AuditOutcome baseline = run_audit(baseline_cfg);

    REQUIRE(baseline.report.rows.size() == 1);
    const auto& a = full.report.rows[0];
    const auto& b = baseline.report.rows[0];
    CHECK(a.threshold == b.threshold);
    for (std::size_t i = 0; i < a.subgroups.size(); ++i)
        CHECK(a.subgroups[i].accuracy == b.subgroups[i].accuracy);
    CHECK(a.dob == b.dob);
}

TEST_CASE("a brightness grid point at 1.0 matches the identity row exactly") {
    AuditConfig cfg = base_config();
    cfg.family = Family::Brightness;
    cfg.grid = {DistortionSpec::brightness(1.0)};
    const AuditReport report = run_audit(cfg).report;
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].threshold == report.rows[1].threshold);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(report.rows[0].subgroups[i].accuracy == report.rows[1].subgroups[i].accuracy);
    CHECK(report.rows[0].dob == report.rows[1].dob);
}

TEST_CASE("audit output files are byte-identical across runs and thread counts") {
    AuditConfig cfg = base_config();
    const auto out1 = (testutil::scratch_dir() / "audit_t1").string();
    const auto out2 = (testutil::scratch_dir() / "audit_t8").string();

    cfg.threads = 1;
    write_audit_outputs(run_audit(cfg), out1);
    cfg.threads = 8;
    write_audit_outputs(run_audit(cfg), out2);

    for (const char* name : {"report.json", "report.csv", "pairs.csv", "provenance.json"}) {
        const auto a = testutil::read_file((fs::path(out1) / name).string());
        const auto b = testutil::read_file((fs::path(out2) / name).string());
        REQUIRE(!a.empty());
        CHECK(a == b);
    }
}

TEST_CASE("per-subgroup threshold mode reports one threshold per cell") {
    AuditConfig cfg = base_config();
    cfg.grid.clear();
    cfg.family = Family::Identity;
    cfg.per_subgroup_threshold = true;
    const AuditReport report = run_audit(cfg).report;
    REQUIRE(report.rows.size() == 1);
    CHECK(!report.rows[0].threshold.has_value());
    for (const auto& cell : report.rows[0].subgroups) {
        REQUIRE(cell.threshold.has_value());
        CHECK(*cell.threshold > 0.0);
    }
}

TEST_CASE("similarity study: identity means 1.0, heavy blur strictly lower") {
    AuditConfig cfg = base_config();
    cfg.grid = {DistortionSpec::gaussian_blur(2.0), DistortionSpec::gaussian_blur(4.0)};
    const auto points = run_similarity_study(cfg);
    REQUIRE(points.size() == 6);  // 3 intensities x 2 subgroups

    std::map<std::string, std::map<std::string, CurvePoint>> by_label;
    for (const auto& p : points) by_label[p.intensity][p.subgroup] = p;
    for (const auto& sg : {"G1", "G2"}) {
        CHECK(by_label["0"][sg].mean_similarity == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(by_label["0"][sg].std_similarity == doctest::Approx(0.0).epsilon(1e-6));
        CHECK(by_label["4"][sg].mean_similarity < by_label["0"][sg].mean_similarity);
        // smoke trend with slack: monotone non-increasing along the grid
        CHECK(by_label["2"][sg].mean_similarity <=
              by_label["0"][sg].mean_similarity + 0.02);
        CHECK(by_label["4"][sg].mean_similarity <=
              by_label["2"][sg].mean_similarity + 0.02);
        CHECK(by_label["0"][sg].n == 1200);  // balanced manifest, per gender
    }
}

TEST_CASE("subgroups with identical images produce identical curves") {
    // two subjects per gender, same image bytes under different ids
    const auto dir = testutil::scratch_dir() / "twin";
    fs::create_directories(dir);
    std::vector<ManifestRecord> records;
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < 2; ++i) {
            const Image img = testutil::random_image(32, 32, 1,
                                                     900 + static_cast<std::uint64_t>(s * 2 + i));
            for (const char* g : {"G1", "G2"}) {
                ManifestRecord r;
                r.image_id = std::string(g) + "_s" + std::to_string(s) + "_i" + std::to_string(i);
                r.path = (dir / (r.image_id + ".pgm")).string();
                r.subject_id = std::string(g) + "_s" + std::to_string(s);
                r.gender = g;
                r.race = s == 0 ? "R1" : "R2";
                save_image(img, r.path);
                records.push_back(r);
            }
        }
    const auto manifest = (dir / "manifest.csv").string();
    save_manifest(records, manifest);

    AuditConfig cfg;
    cfg.manifest_path = manifest;
    cfg.axis = Axis::Gender;
    cfg.family = Family::GaussianBlur;
    cfg.grid = {DistortionSpec::gaussian_blur(3.0)};
    cfg.seed = 5;
    const auto points = run_similarity_study(cfg);
    std::map<std::string, std::map<std::string, CurvePoint>> by_label;
    for (const auto& p : points) by_label[p.intensity][p.subgroup] = p;
    for (const auto& intensity : {"0", "3"}) {
        CHECK(by_label[intensity]["G1"].mean_similarity ==
              by_label[intensity]["G2"].mean_similarity);
        CHECK(by_label[intensity]["G1"].std_similarity ==
              by_label[intensity]["G2"].std_similarity);
    }
}

TEST_CASE("a single image per subgroup gives zero curve spread") {
    const auto dir = testutil::scratch_dir() / "single";
    fs::create_directories(dir);
    std::vector<ManifestRecord> records;
    for (const char* g : {"G1", "G2"}) {
        ManifestRecord r;
        r.image_id = std::string("only_") + g;
        r.path = (dir / (r.image_id + ".pgm")).string();
        r.subject_id = r.image_id;
        r.gender = g;
        r.race = "R1";
        save_image(testutil::random_image(24, 24, 1, g[1] == '1' ? 801 : 802), r.path);
        records.push_back(r);
    }
    const auto manifest = (dir / "manifest.csv").string();
    save_manifest(records, manifest);

    AuditConfig cfg;
    cfg.manifest_path = manifest;
    cfg.axis = Axis::Gender;
    cfg.family = Family::GaussianBlur;
    cfg.grid = {DistortionSpec::gaussian_blur(2.0)};
    cfg.balance = false;
    for (const auto& p : run_similarity_study(cfg)) {
        CHECK(p.n == 1);
        CHECK(p.std_similarity == 0.0);
    }
}

TEST_CASE("curve means match hand arithmetic on three fixed vectors") {
    // cos((1,0),(1,0)) = 1, cos((1,0),(1,1)) = 1/sqrt(2), cos((1,0),(0,1)) = 0
    const std::vector<double> sims = {cosine_similarity({1, 0}, {1, 0}),
                                      cosine_similarity({1, 0}, {1, 1}),
                                      cosine_similarity({1, 0}, {0, 1})};
    const double expected_mean = (1.0 + 1.0 / std::sqrt(2.0) + 0.0) / 3.0;
    CHECK(mean_of(sims) == doctest::Approx(expected_mean).epsilon(1e-12));
    const double expected_var = ((1.0 - expected_mean) * (1.0 - expected_mean) +
                                 (1.0 / std::sqrt(2.0) - expected_mean) *
                                     (1.0 / std::sqrt(2.0) - expected_mean) +
                                 expected_mean * expected_mean) /
                                3.0;
    CHECK(population_std(sims) == doctest::Approx(std::sqrt(expected_var)).epsilon(1e-12));
}

TEST_CASE("resolution-family study restores probes before embedding") {
    AuditConfig cfg = base_config();
    cfg.family = Family::Resolution;
    cfg.grid = {DistortionSpec::resolution(28, 28)};
    const auto points = run_similarity_study(cfg);
    std::map<std::string, std::map<std::string, CurvePoint>> by_label;
    for (const auto& p : points) by_label[p.intensity][p.subgroup] = p;
    for (const auto& sg : {"G1", "G2"}) {
        CHECK(by_label["28x28"][sg].mean_similarity < 1.0);
        CHECK(by_label["28x28"][sg].mean_similarity > 0.5);
    }
}

TEST_CASE("store provider matches toy provider and reports missing keys") {
    // build a tiny manifest + store of clean toy embeddings
    const auto dir = testutil::scratch_dir() / "storeprov";
    fs::create_directories(dir);
    std::vector<ManifestRecord> records;
    EmbeddingStore store(kToyEmbedDim);
    std::vector<Pair> pairs;
    for (int s = 0; s < 3; ++s)
        for (int i = 0; i < 2; ++i) {
            ManifestRecord r;
            r.image_id = "s" + std::to_string(s) + "_i" + std::to_string(i);
            r.path = (dir / (r.image_id + ".pgm")).string();
            r.subject_id = "s" + std::to_string(s);
            r.gender = "G1";
            r.race = "R1";
            const Image img =
                testutil::random_image(32, 32, 1, 950 + static_cast<std::uint64_t>(s * 2 + i));
            save_image(img, r.path);
            store.insert(r.image_id, toy_embed(img));
            records.push_back(r);
        }
    for (int s = 0; s < 3; ++s) {
        Pair p;
        p.probe_id = "s" + std::to_string(s) + "_i0";
        p.gallery_id = "s" + std::to_string(s) + "_i1";
        p.genuine = true;
        p.subgroup = "G1";
        p.split = 1;
        pairs.push_back(p);
    }
    const auto store_path = (dir / "clean.emb").string();
    store_write(store, store_path);

    ProviderOptions toy;
    ProviderOptions from_store;
    from_store.toy = false;
    from_store.store_path = store_path;

    const auto via_toy = score_pairs(pairs, records, DistortionSpec::identity(), toy, 7);
    const auto via_store =
        score_pairs(pairs, records, DistortionSpec::identity(), from_store, 7);
    REQUIRE(via_toy.size() == via_store.size());
    for (std::size_t i = 0; i < via_toy.size(); ++i)
        CHECK(via_toy[i].score == doctest::Approx(via_store[i].score).epsilon(1e-12));

    // a distorted probe spec needs keys the store does not have; the error
    // names every one of them
    try {
        score_pairs(pairs, records, DistortionSpec::gaussian_blur(2.0), from_store, 7);
        FAIL("expected missing-key error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("missing 3 key(s)") != std::string::npos);
        CHECK(msg.find("s0_i0|blur:2") != std::string::npos);
        CHECK(msg.find("s1_i0|blur:2") != std::string::npos);
        CHECK(msg.find("s2_i0|blur:2") != std::string::npos);
    }
}

TEST_CASE("audit config JSON parsing and echo") {
    using nlohmann::json;
    const json j = {{"manifest", "m.csv"},
                    {"axis", "race"},
                    {"family", "SaltPepper"},
                    {"grid", {0.03, 0.09}},
                    {"seed", 11},
                    {"far", 0.05},
                    {"threshold_scope", "per_subgroup"},
                    {"restore_resolution", false},
                    {"out_dir", "/tmp/x"},
                    {"threads", 4}};
    const AuditConfig cfg = AuditConfig::from_json(j);
    CHECK(cfg.axis == Axis::Race);
    CHECK(cfg.family == Family::SaltPepper);
    CHECK(cfg.grid.size() == 2);
    CHECK(cfg.grid[1].p == doctest::Approx(0.09));
    CHECK(cfg.per_subgroup_threshold);
    CHECK(!cfg.restore_resolution);
    CHECK(cfg.threads == 4);

    const json echo = cfg.echo_json();
    CHECK(!echo.contains("out_dir"));
    CHECK(!echo.contains("threads"));
    CHECK(echo["far"] == 0.05);

    CHECK_THROWS_WITH_AS(AuditConfig::from_json(json{{"manifst", "x"}}),
                         doctest::Contains("unknown config key"), std::invalid_argument);
    CHECK_THROWS(AuditConfig::from_json(json{{"far", 2.0}}));
    CHECK_THROWS(AuditConfig::from_json(json{{"provider", "gpu"}}));
}

TEST_CASE("all-black images fall back to e1 and keep similarity defined") {
    const auto dir = testutil::scratch_dir() / "black";
    fs::create_directories(dir);
    std::vector<ManifestRecord> records;
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < 2; ++i) {
            ManifestRecord r;
            r.image_id = "b" + std::to_string(s) + "_" + std::to_string(i);
            r.path = (dir / (r.image_id + ".pgm")).string();
            r.subject_id = "b" + std::to_string(s);
            r.gender = s == 0 ? "G1" : "G2";
            r.race = "R1";
            save_image(make_image(16, 16, 1, 0), r.path);
            records.push_back(r);
        }
    const auto manifest = (dir / "manifest.csv").string();
    save_manifest(records, manifest);

    AuditConfig cfg;
    cfg.manifest_path = manifest;
    cfg.axis = Axis::Gender;
    cfg.family = Family::Identity;
    cfg.balance = false;
    const auto points = run_similarity_study(cfg);
    CHECK(!points.empty());  // e1 fallback keeps similarity defined
    for (const auto& p : points) CHECK(p.mean_similarity == doctest::Approx(1.0));
}
