#include "distaudit/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "distaudit/csv.hpp"
#include "distaudit/rng.hpp"

namespace distaudit {

namespace {

const std::vector<std::string> kManifestHeader = {"image_id", "path",        "subject_id",
                                                  "gender",   "race",        "keypoints_path"};

}  // namespace

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::Gender: return "gender";
        case Axis::Race: return "race";
        case Axis::Intersection: return "intersection";
    }
    return "?";
}

Axis axis_from_name(const std::string& name) {
    for (Axis a : {Axis::Gender, Axis::Race, Axis::Intersection})
        if (name == axis_name(a)) return a;
    throw std::invalid_argument("unknown demographic axis: " + name);
}

std::string subgroup_of(const ManifestRecord& rec, Axis axis) {
    switch (axis) {
        case Axis::Gender: return rec.gender;
        case Axis::Race: return rec.race;
        case Axis::Intersection: return "{" + rec.gender + "," + rec.race + "}";
    }
    return "?";
}

std::vector<std::string> subgroups_in(const std::vector<ManifestRecord>& records, Axis axis) {
    std::set<std::string> labels;
    for (const auto& r : records) labels.insert(subgroup_of(r, axis));
    return {labels.begin(), labels.end()};
}

std::vector<ManifestRecord> load_manifest(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty()) throw std::runtime_error("empty manifest: " + path);
    const auto& header = rows[0];
    for (std::size_t i = 0; i < kManifestHeader.size(); ++i) {
        const bool ok = i < header.size() && header[i] == kManifestHeader[i];
        // keypoints_path is optional as a column.
        if (!ok && !(i == 5 && header.size() == 5))
            throw std::runtime_error("manifest is missing column '" + kManifestHeader[i] +
                                     "': " + path);
    }

    std::vector<ManifestRecord> records;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < 5)
            throw std::runtime_error("manifest row " + std::to_string(r + 1) +
                                     " has too few fields: " + path);
        ManifestRecord rec;
        rec.image_id = row[0];
        rec.path = row[1];
        rec.subject_id = row[2];
        rec.gender = row[3];
        rec.race = row[4];
        rec.keypoints_path = row.size() > 5 ? row[5] : "";
        if (rec.image_id.empty() || rec.subject_id.empty() || rec.gender.empty() ||
            rec.race.empty())
            throw std::runtime_error("manifest row " + std::to_string(r + 1) +
                                     " has empty required fields: " + path);
        if (!seen.insert(rec.image_id).second)
            throw std::runtime_error("duplicate image_id '" + rec.image_id + "' in " + path);
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw std::runtime_error("manifest has no data rows: " + path);
    return records;
}

void save_manifest(const std::vector<ManifestRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
    out << csv::join_row(kManifestHeader) << "\n";
    for (const auto& r : records)
        out << csv::join_row({r.image_id, r.path, r.subject_id, r.gender, r.race,
                              r.keypoints_path})
            << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ManifestRecord> balance_manifest(const std::vector<ManifestRecord>& records,
                                             Axis analysis, std::uint64_t seed) {
    if (analysis == Axis::Intersection)
        throw std::invalid_argument("balance_manifest needs a gender or race analysis axis");
    const Axis control = analysis == Axis::Gender ? Axis::Race : Axis::Gender;

    // Cell = (analysis label, control label). Every cell is cut down to the
    // size of the smallest so the control attribute is equally represented
    // inside each analysis subgroup.
    std::map<std::pair<std::string, std::string>, std::vector<const ManifestRecord*>> cells;
    for (const auto& r : records)
        cells[{subgroup_of(r, analysis), subgroup_of(r, control)}].push_back(&r);

    const auto a_labels = subgroups_in(records, analysis);
    const auto c_labels = subgroups_in(records, control);
    std::size_t target = records.size();
    for (const auto& a : a_labels)
        for (const auto& c : c_labels) {
            const auto it = cells.find({a, c});
            if (it == cells.end() || it->second.empty())
                throw std::runtime_error("cannot balance: cell (" + a + ", " + c + ") is empty");
            target = std::min(target, it->second.size());
        }

    std::vector<ManifestRecord> out;
    for (auto& [cell, members] : cells) {
        std::sort(members.begin(), members.end(),
                  [](const ManifestRecord* a, const ManifestRecord* b) {
                      return a->image_id < b->image_id;
                  });
        SeqRng rng(derive_stream(seed, "balance", cell.first + "\x1f" + cell.second));
        rng.shuffle(members);
        for (std::size_t i = 0; i < target; ++i) out.push_back(*members[i]);
    }
    std::sort(out.begin(), out.end(),
              [](const ManifestRecord& a, const ManifestRecord& b) {
                  return a.image_id < b.image_id;
              });
    return out;
}

}  // namespace distaudit
