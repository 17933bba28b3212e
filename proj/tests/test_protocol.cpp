#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "distaudit/protocol.hpp"
#include "distaudit/synth.hpp"
#include "test_util.hpp"

using namespace distaudit;

namespace {

ManifestRecord rec(const std::string& id, const std::string& subject, const std::string& g,
                   const std::string& r) {
    ManifestRecord m;
    m.image_id = id;
    m.path = "images/" + id + ".pgm";
    m.subject_id = subject;
    m.gender = g;
    m.race = r;
    return m;
}

// Label-only records for protocol tests; pair generation never touches pixels.
std::vector<ManifestRecord> synth_records() {
    static std::vector<ManifestRecord> records = [] {
        SynthConfig cfg;
        std::vector<ManifestRecord> out;
        for (const auto& si : generate_synth_dataset(cfg)) out.push_back(si.record);
        return out;
    }();
    return records;
}

std::string manifest_csv(const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    out << "image_id,path,subject_id,gender,race,keypoints_path\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("load_manifest happy path and schema errors") {
    const auto path = (testutil::scratch_dir() / "m.csv").string();
    testutil::write_file(path, manifest_csv({{"i1", "p1", "s1", "G1", "R1", ""},
                                             {"i2", "p2", "s1", "G1", "R2", "k2"},
                                             {"i3", "p3", "s2", "G2", "R1", ""}}));
    const auto records = load_manifest(path);
    REQUIRE(records.size() == 3);
    CHECK(records[1].keypoints_path == "k2");
    CHECK(subgroup_of(records[2], Axis::Gender) == "G2");
    CHECK(subgroup_of(records[2], Axis::Intersection) == "{G2,R1}");

    const auto dup = (testutil::scratch_dir() / "dup.csv").string();
    testutil::write_file(dup, manifest_csv({{"i1", "p", "s", "G1", "R1", ""},
                                            {"i1", "p", "s", "G1", "R1", ""}}));
    CHECK_THROWS_WITH_AS(load_manifest(dup), doctest::Contains("i1"), std::runtime_error);

    const auto noracecol = (testutil::scratch_dir() / "norace.csv").string();
    testutil::write_file(noracecol, "image_id,path,subject_id,gender\na,b,c,G1\n");
    CHECK_THROWS_WITH_AS(load_manifest(noracecol), doctest::Contains("race"),
                         std::runtime_error);

    const auto empty = (testutil::scratch_dir() / "empty.csv").string();
    testutil::write_file(empty, "");
    CHECK_THROWS(load_manifest(empty));
}

TEST_CASE("manifest save/load round-trip") {
    const auto records = std::vector<ManifestRecord>{rec("a", "s1", "G1", "R1"),
                                                     rec("b,with comma", "s2", "G2", "R2")};
    const auto path = (testutil::scratch_dir() / "rt.csv").string();
    save_manifest(records, path);
    CHECK(load_manifest(path) == records);
}

TEST_CASE("balance_manifest equalizes control labels inside each analysis subgroup") {
    std::vector<ManifestRecord> records;
    int id = 0;
    auto add = [&](int n, const std::string& g, const std::string& r) {
        for (int i = 0; i < n; ++i) {
            ++id;
            records.push_back(rec("img" + std::to_string(id), "s" + std::to_string(id), g, r));
        }
    };
    add(100, "G1", "R1");
    add(60, "G1", "R2");
    add(80, "G2", "R1");
    add(70, "G2", "R2");

    const auto balanced = balance_manifest(records, Axis::Gender, 5);
    std::map<std::pair<std::string, std::string>, int> cells;
    for (const auto& r : balanced) ++cells[{r.gender, r.race}];
    CHECK(cells[{"G1", "R1"}] == 60);
    CHECK(cells[{"G1", "R2"}] == 60);
    CHECK(cells[{"G2", "R1"}] == 60);
    CHECK(cells[{"G2", "R2"}] == 60);

    // deterministic under the seed, different under another
    CHECK(balance_manifest(records, Axis::Gender, 5) == balanced);
    CHECK(balance_manifest(records, Axis::Gender, 6) != balanced);
}

TEST_CASE("balance_manifest keeps an already balanced manifest, sorted by id") {
    std::vector<ManifestRecord> records = {rec("d", "s4", "G2", "R2"), rec("c", "s3", "G2", "R1"),
                                           rec("b", "s2", "G1", "R2"), rec("a", "s1", "G1", "R1")};
    const auto balanced = balance_manifest(records, Axis::Race, 1);
    REQUIRE(balanced.size() == 4);
    CHECK(balanced[0].image_id == "a");
    CHECK(balanced[3].image_id == "d");
}

TEST_CASE("balance_manifest rejects an empty cell and the intersection axis") {
    // R2 exists under G1 but the (G2, R2) cell is empty
    std::vector<ManifestRecord> records = {rec("a", "s1", "G1", "R1"),
                                           rec("b", "s2", "G1", "R2"),
                                           rec("c", "s3", "G2", "R1")};
    CHECK_THROWS_WITH_AS(balance_manifest(records, Axis::Gender, 1),
                         doctest::Contains("empty"), std::runtime_error);
    CHECK_THROWS(balance_manifest(records, Axis::Intersection, 1));
}

TEST_CASE("generate_pairs meets the published protocol counts") {
    const auto records = synth_records();
    const PairProtocol protocol = generate_pairs(records, Axis::Gender, 7);

    CHECK(protocol.subgroups == std::vector<std::string>{"G1", "G2"});
    CHECK(protocol.pairs.size() == 12000);
    long long genuine = 0;
    std::map<std::pair<int, std::string>, std::pair<int, int>> slice;
    for (const auto& p : protocol.pairs) {
        if (p.genuine) ++genuine;
        auto& c = slice[{p.split, p.subgroup}];
        (p.genuine ? c.first : c.second) += 1;
    }
    CHECK(genuine == 6000);
    CHECK(slice.size() == 20);
    for (const auto& [key, c] : slice) {
        CHECK(c.first == 300);
        CHECK(c.second == 300);
    }

    const auto report = validate_protocol(protocol, records);
    CHECK(report.ok());
}

TEST_CASE("generate_pairs is seed deterministic") {
    const auto records = synth_records();
    const PairProtocol a = generate_pairs(records, Axis::Gender, 7);
    const PairProtocol b = generate_pairs(records, Axis::Gender, 7);
    CHECK(a.pairs == b.pairs);
    const PairProtocol c = generate_pairs(records, Axis::Gender, 8);
    CHECK(a.pairs != c.pairs);
}

TEST_CASE("generate_pairs works on race and intersection axes") {
    const auto records = synth_records();
    const PairProtocol race = generate_pairs(records, Axis::Race, 3);
    CHECK(race.pairs.size() == 12000);
    CHECK(validate_protocol(race, records).ok());

    const PairProtocol inter = generate_pairs(records, Axis::Intersection, 3);
    CHECK(inter.subgroups.size() == 4);
    CHECK(inter.pairs.size() == 24000);  // 4 subgroups x 10 x 600
    CHECK(validate_protocol(inter, records).ok());
}

TEST_CASE("no pair is reused anywhere in the protocol") {
    const auto records = synth_records();
    const PairProtocol protocol = generate_pairs(records, Axis::Gender, 11);
    std::set<std::tuple<std::string, std::string, bool>> seen;
    for (const auto& p : protocol.pairs) {
        auto key = p.probe_id < p.gallery_id
                       ? std::tuple{p.probe_id, p.gallery_id, p.genuine}
                       : std::tuple{p.gallery_id, p.probe_id, p.genuine};
        CHECK(seen.insert(key).second);
    }
}

TEST_CASE("generate_pairs reports the limiting subgroup on insufficient data") {
    std::vector<ManifestRecord> records;
    // G1 rich enough, G2 a single subject with two images
    for (int s = 0; s < 120; ++s)
        for (int i = 0; i < 8; ++i)
            records.push_back(rec("g1_" + std::to_string(s) + "_" + std::to_string(i),
                                  "s" + std::to_string(s), "G1", s % 2 ? "R1" : "R2"));
    records.push_back(rec("g2_a", "lone", "G2", "R1"));
    records.push_back(rec("g2_b", "lone", "G2", "R1"));
    CHECK_THROWS_WITH_AS(generate_pairs(records, Axis::Gender, 1), doctest::Contains("G2"),
                         std::runtime_error);

    // a single subject with many images: genuine pairs exist, impostors cannot
    std::vector<ManifestRecord> one_subject = records;
    one_subject.resize(120 * 8);
    for (int i = 0; i < 90; ++i)
        one_subject.push_back(rec("solo_" + std::to_string(i), "solo", "G2", "R1"));
    CHECK_THROWS_WITH_AS(generate_pairs(one_subject, Axis::Gender, 1),
                         doctest::Contains("impostor"), std::runtime_error);
}

TEST_CASE("validate_protocol flags seeded mutations") {
    const auto records = synth_records();
    PairProtocol protocol = generate_pairs(records, Axis::Gender, 21);

    SUBCASE("duplicated pair across splits") {
        PairProtocol bad = protocol;
        Pair dup = bad.pairs.front();
        dup.split = 2;
        // replace one split-2 pair of the same subgroup and label
        for (auto& p : bad.pairs)
            if (p.split == 2 && p.genuine == dup.genuine && p.subgroup == dup.subgroup) {
                p = dup;
                break;
            }
        const auto report = validate_protocol(bad, records);
        CHECK(!report.ok());
        bool mentions_dup = false;
        for (const auto& v : report.violations)
            if (v.find("more than once") != std::string::npos) mentions_dup = true;
        CHECK(mentions_dup);
    }

    SUBCASE("genuine pair crossing subjects") {
        PairProtocol bad = protocol;
        Pair& g = bad.pairs.front();
        REQUIRE(g.genuine);
        std::string probe_subject;
        for (const auto& r : records)
            if (r.image_id == g.probe_id) probe_subject = r.subject_id;
        // swap its gallery for an image of a different subject
        for (const auto& r : records)
            if (r.subject_id != probe_subject && subgroup_of(r, Axis::Gender) == g.subgroup) {
                g.gallery_id = r.image_id;
                break;
            }
        const auto report = validate_protocol(bad, records);
        CHECK(!report.ok());
        bool mentions_cross = false;
        for (const auto& v : report.violations)
            if (v.find("crosses subjects") != std::string::npos) mentions_cross = true;
        CHECK(mentions_cross);
    }

    SUBCASE("wrong per-slice counts") {
        PairProtocol bad = protocol;
        bad.pairs.pop_back();
        const auto report = validate_protocol(bad, records);
        CHECK(!report.ok());
    }
}

TEST_CASE("pairs CSV round-trip preserves every field") {
    const auto records = synth_records();
    const PairProtocol protocol = generate_pairs(records, Axis::Intersection, 9);
    const auto path = (testutil::scratch_dir() / "pairs_rt.csv").string();
    save_pairs_csv(protocol, path);
    PairProtocol loaded = load_pairs_csv(path);
    loaded.axis = protocol.axis;
    CHECK(loaded.pairs == protocol.pairs);
    CHECK(loaded.subgroups == protocol.subgroups);  // {G,R} labels survive CSV quoting
}

TEST_CASE("axis names round-trip") {
    for (Axis a : {Axis::Gender, Axis::Race, Axis::Intersection})
        CHECK(axis_from_name(axis_name(a)) == a);
    CHECK_THROWS(axis_from_name("age"));
}
