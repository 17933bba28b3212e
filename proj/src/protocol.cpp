#include "distaudit/protocol.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "distaudit/csv.hpp"
#include "distaudit/rng.hpp"

namespace distaudit {

namespace {

constexpr int kGenuinePerSubgroup = kSplitCount * kPairsPerSplit;

struct Subject {
    std::string id;
    std::vector<std::string> images;  // sorted

    std::size_t genuine_capacity() const { return images.size() * (images.size() - 1) / 2; }
};

using IdPair = std::pair<std::string, std::string>;  // unordered, first < second

IdPair ordered(const std::string& a, const std::string& b) {
    return a < b ? IdPair{a, b} : IdPair{b, a};
}

std::vector<IdPair> genuine_candidates(const std::vector<Subject>& subjects) {
    std::vector<IdPair> out;
    for (const auto& s : subjects)
        for (std::size_t i = 0; i < s.images.size(); ++i)
            for (std::size_t j = i + 1; j < s.images.size(); ++j)
                out.push_back({s.images[i], s.images[j]});
    return out;
}

std::size_t impostor_capacity(const std::vector<Subject>& subjects) {
    std::size_t total = 0, same = 0;
    for (const auto& s : subjects) {
        total += s.images.size();
        same += s.genuine_capacity();
    }
    return total * (total - 1) / 2 - same;
}

// Minimal number of subjects (greediest first) whose genuine capacity covers
// one split. Drives the subject-disjoint eligibility rule.
std::size_t split_subject_demand(const std::vector<Subject>& subjects) {
    std::vector<std::size_t> caps;
    caps.reserve(subjects.size());
    for (const auto& s : subjects) caps.push_back(s.genuine_capacity());
    std::sort(caps.rbegin(), caps.rend());
    std::size_t need = kPairsPerSplit, count = 0;
    for (std::size_t c : caps) {
        if (need == 0) break;
        ++count;
        need -= std::min(need, c);
    }
    return std::max<std::size_t>(count, 2);
}

std::vector<IdPair> sample_impostors(const std::vector<Subject>& subjects, std::size_t need,
                                     SeqRng& rng, std::set<IdPair>& used,
                                     const std::string& subgroup) {
    std::vector<IdPair> out;
    std::size_t attempts = 0;
    const std::size_t max_attempts = need * 200 + 10000;
    while (out.size() < need) {
        if (++attempts > max_attempts)
            throw std::runtime_error("subgroup " + subgroup +
                                     ": cannot sample enough distinct impostor pairs (have " +
                                     std::to_string(out.size()) + " of " + std::to_string(need) +
                                     ")");
        const std::size_t a = static_cast<std::size_t>(rng.below(subjects.size()));
        const std::size_t b = static_cast<std::size_t>(rng.below(subjects.size()));
        if (a == b) continue;
        const auto& ia = subjects[a].images;
        const auto& ib = subjects[b].images;
        IdPair p = ordered(ia[static_cast<std::size_t>(rng.below(ia.size()))],
                           ib[static_cast<std::size_t>(rng.below(ib.size()))]);
        if (!used.insert(p).second) continue;
        out.push_back(std::move(p));
    }
    return out;
}

void emit_pairs(std::vector<Pair>& sink, const std::vector<IdPair>& ids, bool genuine,
                const std::string& subgroup, int split, SeqRng& rng) {
    for (const auto& [a, b] : ids) {
        Pair p;
        const bool flip = rng.coin();
        p.probe_id = flip ? b : a;
        p.gallery_id = flip ? a : b;
        p.genuine = genuine;
        p.subgroup = subgroup;
        p.split = split;
        sink.push_back(std::move(p));
    }
}

}  // namespace

PairProtocol generate_pairs(const std::vector<ManifestRecord>& records, Axis axis,
                            std::uint64_t seed) {
    PairProtocol protocol;
    protocol.axis = axis;
    protocol.subgroups = subgroups_in(records, axis);
    if (protocol.subgroups.size() < 2)
        throw std::runtime_error("axis " + std::string(axis_name(axis)) + " has " +
                                 std::to_string(protocol.subgroups.size()) +
                                 " subgroup(s); need at least 2");

    // subgroup -> subject -> images
    std::map<std::string, std::map<std::string, std::vector<std::string>>> grouped;
    for (const auto& r : records)
        grouped[subgroup_of(r, axis)][r.subject_id].push_back(r.image_id);

    // Per subgroup and split: a genuine block then an impostor block.
    std::map<std::string, std::vector<std::vector<Pair>>> per_subgroup_splits;

    for (const auto& label : protocol.subgroups) {
        std::vector<Subject> subjects;
        for (auto& [sid, images] : grouped[label]) {
            Subject s{sid, images};
            std::sort(s.images.begin(), s.images.end());
            subjects.push_back(std::move(s));
        }

        const auto all_genuine = genuine_candidates(subjects);
        if (all_genuine.size() < kGenuinePerSubgroup)
            throw std::runtime_error(
                "subgroup " + label + ": only " + std::to_string(all_genuine.size()) +
                " genuine pair candidates, need " + std::to_string(kGenuinePerSubgroup) +
                " (add subjects with >= 2 images)");
        if (subjects.size() < 2 || impostor_capacity(subjects) < kGenuinePerSubgroup)
            throw std::runtime_error("subgroup " + label +
                                     ": not enough cross-subject image pairs for " +
                                     std::to_string(kGenuinePerSubgroup) + " impostor pairs");

        SeqRng rng(derive_stream(seed, "pairs", label));
        std::set<IdPair> used_impostor;
        std::vector<std::vector<Pair>> splits(kSplitCount);

        // Prefer subject-disjoint splits when the subgroup is rich enough;
        // otherwise fall back to globally pair-disjoint sampling.
        bool bucketed = false;
        if (subjects.size() >= 10 * split_subject_demand(subjects)) {
            for (int attempt = 0; attempt < 3 && !bucketed; ++attempt) {
                std::vector<std::size_t> order(subjects.size());
                for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                rng.shuffle(order);
                std::array<std::vector<Subject>, kSplitCount> buckets;
                for (std::size_t i = 0; i < order.size(); ++i)
                    buckets[i % kSplitCount].push_back(subjects[order[i]]);
                bool feasible = true;
                for (const auto& b : buckets) {
                    if (genuine_candidates(b).size() < kPairsPerSplit || b.size() < 2 ||
                        impostor_capacity(b) < kPairsPerSplit) {
                        feasible = false;
                        break;
                    }
                }
                if (!feasible) continue;
                for (int s = 0; s < kSplitCount; ++s) {
                    auto cand = genuine_candidates(buckets[static_cast<std::size_t>(s)]);
                    rng.shuffle(cand);
                    cand.resize(kPairsPerSplit);
                    emit_pairs(splits[static_cast<std::size_t>(s)], cand, true, label, s + 1, rng);
                    const auto imp = sample_impostors(buckets[static_cast<std::size_t>(s)],
                                                      kPairsPerSplit, rng, used_impostor, label);
                    emit_pairs(splits[static_cast<std::size_t>(s)], imp, false, label, s + 1, rng);
                }
                bucketed = true;
            }
        }

        if (!bucketed) {
            auto cand = all_genuine;
            rng.shuffle(cand);
            cand.resize(kGenuinePerSubgroup);
            const auto imp =
                sample_impostors(subjects, kGenuinePerSubgroup, rng, used_impostor, label);
            for (int s = 0; s < kSplitCount; ++s) {
                const std::size_t off = static_cast<std::size_t>(s) * kPairsPerSplit;
                std::vector<IdPair> g(cand.begin() + off, cand.begin() + off + kPairsPerSplit);
                std::vector<IdPair> i(imp.begin() + off, imp.begin() + off + kPairsPerSplit);
                emit_pairs(splits[static_cast<std::size_t>(s)], g, true, label, s + 1, rng);
                emit_pairs(splits[static_cast<std::size_t>(s)], i, false, label, s + 1, rng);
            }
        }
        per_subgroup_splits[label] = std::move(splits);
    }

    for (int s = 0; s < kSplitCount; ++s)
        for (const auto& label : protocol.subgroups)
            for (auto& p : per_subgroup_splits[label][static_cast<std::size_t>(s)])
                protocol.pairs.push_back(p);
    return protocol;
}

ValidationReport validate_protocol(const PairProtocol& protocol,
                                   const std::vector<ManifestRecord>& records) {
    ValidationReport report;
    auto flag = [&report](const std::string& msg) { report.violations.push_back(msg); };

    std::map<std::string, const ManifestRecord*> by_id;
    for (const auto& r : records) by_id[r.image_id] = &r;

    const std::set<std::string> subgroup_set(protocol.subgroups.begin(),
                                             protocol.subgroups.end());
    if (subgroup_set.size() < 2) flag("protocol has fewer than 2 subgroups");

    std::map<std::pair<int, std::string>, std::pair<int, int>> counts;  // (split,subgroup)->(g,i)
    std::set<std::tuple<std::string, std::string, bool>> seen;
    std::set<int> split_ids;

    for (const auto& p : protocol.pairs) {
        split_ids.insert(p.split);
        if (p.split < 1 || p.split > kSplitCount)
            flag("pair " + p.probe_id + "/" + p.gallery_id + ": split " +
                 std::to_string(p.split) + " out of range");
        if (!subgroup_set.count(p.subgroup))
            flag("pair " + p.probe_id + "/" + p.gallery_id + ": unknown subgroup " + p.subgroup);
        if (p.probe_id == p.gallery_id)
            flag("pair " + p.probe_id + "/" + p.gallery_id + ": image paired with itself");

        auto key = ordered(p.probe_id, p.gallery_id);
        if (!seen.insert({key.first, key.second, p.genuine}).second)
            flag("pair " + key.first + "/" + key.second + " occurs more than once");

        const auto probe = by_id.find(p.probe_id);
        const auto gallery = by_id.find(p.gallery_id);
        if (probe == by_id.end()) flag("pair references unknown image " + p.probe_id);
        if (gallery == by_id.end()) flag("pair references unknown image " + p.gallery_id);
        if (probe != by_id.end() && gallery != by_id.end()) {
            const bool same_subject = probe->second->subject_id == gallery->second->subject_id;
            if (p.genuine && !same_subject)
                flag("genuine pair " + p.probe_id + "/" + p.gallery_id +
                     " crosses subjects");
            if (!p.genuine && same_subject)
                flag("impostor pair " + p.probe_id + "/" + p.gallery_id +
                     " shares subject " + probe->second->subject_id);
            for (const auto* rec : {probe->second, gallery->second})
                if (subgroup_of(*rec, protocol.axis) != p.subgroup)
                    flag("pair " + p.probe_id + "/" + p.gallery_id + ": image " +
                         rec->image_id + " is not in subgroup " + p.subgroup);
        }

        auto& c = counts[{p.split, p.subgroup}];
        (p.genuine ? c.first : c.second) += 1;
    }

    if (static_cast<int>(split_ids.size()) != kSplitCount)
        flag("expected " + std::to_string(kSplitCount) + " splits, found " +
             std::to_string(split_ids.size()));
    for (int s = 1; s <= kSplitCount; ++s)
        for (const auto& label : protocol.subgroups) {
            const auto it = counts.find({s, label});
            const int g = it == counts.end() ? 0 : it->second.first;
            const int i = it == counts.end() ? 0 : it->second.second;
            if (g != kPairsPerSplit || i != kPairsPerSplit)
                flag("split " + std::to_string(s) + " subgroup " + label + ": " +
                     std::to_string(g) + " genuine / " + std::to_string(i) +
                     " impostor pairs, expected " + std::to_string(kPairsPerSplit) + "/" +
                     std::to_string(kPairsPerSplit));
        }
    return report;
}

void save_pairs_csv(const PairProtocol& protocol, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open pairs file for writing: " + path);
    out << "split,label,probe_id,gallery_id,subgroup\n";
    for (const auto& p : protocol.pairs)
        out << csv::join_row({std::to_string(p.split), p.genuine ? "1" : "0", p.probe_id,
                              p.gallery_id, p.subgroup})
            << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

PairProtocol load_pairs_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty()) throw std::runtime_error("empty pairs file: " + path);
    const std::vector<std::string> header = {"split", "label", "probe_id", "gallery_id",
                                             "subgroup"};
    if (rows[0] != header)
        throw std::runtime_error("pairs file must start with header split,label,probe_id,"
                                 "gallery_id,subgroup: " + path);
    PairProtocol protocol;
    std::set<std::string> labels;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 5)
            throw std::runtime_error("pairs row " + std::to_string(r + 1) +
                                     " has wrong field count: " + path);
        Pair p;
        try {
            p.split = std::stoi(row[0]);
        } catch (const std::exception&) {
            throw std::runtime_error("pairs row " + std::to_string(r + 1) +
                                     ": bad split value '" + row[0] + "': " + path);
        }
        if (row[1] != "0" && row[1] != "1")
            throw std::runtime_error("pairs row " + std::to_string(r + 1) +
                                     ": label must be 0 or 1: " + path);
        p.genuine = row[1] == "1";
        p.probe_id = row[2];
        p.gallery_id = row[3];
        p.subgroup = row[4];
        labels.insert(p.subgroup);
        protocol.pairs.push_back(std::move(p));
    }
    protocol.subgroups.assign(labels.begin(), labels.end());
    return protocol;
}

}  // namespace distaudit
