#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace distaudit {

// One dataset image with its subject and demographic labels.
// CSV schema: image_id,path,subject_id,gender,race,keypoints_path
struct ManifestRecord {
    std::string image_id;
    std::string path;
    std::string subject_id;
    std::string gender;
    std::string race;
    std::string keypoints_path;  // optional, empty if absent

    bool operator==(const ManifestRecord&) const = default;
};

enum class Axis { Gender, Race, Intersection };

const char* axis_name(Axis a);
Axis axis_from_name(const std::string& name);

// Subgroup label of a record along an axis. Intersection labels follow the
// "{G,R}" notation.
std::string subgroup_of(const ManifestRecord& rec, Axis axis);

// Sorted distinct subgroup labels present in `records` for `axis`.
std::vector<std::string> subgroups_in(const std::vector<ManifestRecord>& records, Axis axis);

// Validates the schema and uniqueness of image_id.
std::vector<ManifestRecord> load_manifest(const std::string& path);
void save_manifest(const std::vector<ManifestRecord>& records, const std::string& path);

// Equalizes the control-axis distribution inside every analysis-axis
// subgroup by seeded subsampling: every (analysis, control) cell is cut to
// the size of the smallest one. Output is sorted by image_id. Throws if any
// cell is empty. `analysis` must be Gender or Race; the control axis is the
// other one.
std::vector<ManifestRecord> balance_manifest(const std::vector<ManifestRecord>& records,
                                             Axis analysis, std::uint64_t seed);

}  // namespace distaudit
