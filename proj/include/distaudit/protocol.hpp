#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distaudit/manifest.hpp"

namespace distaudit {

inline constexpr int kSplitCount = 10;
inline constexpr int kPairsPerSplit = 300;  // per subgroup, per label

// One verification trial. The probe is the side distortions are applied to.
struct Pair {
    std::string probe_id;
    std::string gallery_id;
    bool genuine = false;
    std::string subgroup;
    int split = 0;  // 1..kSplitCount

    bool operator==(const Pair&) const = default;
};

struct PairProtocol {
    Axis axis = Axis::Gender;
    std::vector<std::string> subgroups;
    std::vector<Pair> pairs;  // ordered: split, then subgroup, genuine block, impostor block
};

// Builds 10 splits x (300 genuine + 300 impostor) per subgroup, sampled
// without replacement under the seed. Splits are pair-disjoint always;
// when a subgroup has at least 10x the subjects a single split needs, its
// splits are made subject-disjoint as well. Throws with the limiting
// subgroup and counts when the records cannot support the protocol.
PairProtocol generate_pairs(const std::vector<ManifestRecord>& records, Axis axis,
                            std::uint64_t seed);

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Checks every protocol invariant (split count, per-slice counts, label/
// subject consistency against the manifest, global pair uniqueness).
ValidationReport validate_protocol(const PairProtocol& protocol,
                                   const std::vector<ManifestRecord>& records);

// CSV: split,label,probe_id,gallery_id,subgroup with label 1=genuine 0=impostor.
void save_pairs_csv(const PairProtocol& protocol, const std::string& path);
PairProtocol load_pairs_csv(const std::string& path);

}  // namespace distaudit
