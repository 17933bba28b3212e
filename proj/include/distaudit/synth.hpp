#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distaudit/image.hpp"
#include "distaudit/landmarks.hpp"
#include "distaudit/manifest.hpp"

namespace distaudit {

// Seeded generator of geometric "faces" so the whole pipeline can run and
// be tested with zero external data. Subjects get persistent geometry and
// tone parameters conditioned on their (gender, race) cell; images of one
// subject differ by small jitter only, so a feature extractor can tell
// subjects apart.
struct SynthConfig {
    int subjects_per_cell = 50;  // per (gender, race) cell
    int images_per_subject = 12;
    int size = 96;  // square canvas
    std::uint64_t seed = 42;
};

struct SynthImage {
    ManifestRecord record;  // path/keypoints_path filled by write_synth_dataset
    Image image;
    KeypointSet keypoints;
};

std::vector<SynthImage> generate_synth_dataset(const SynthConfig& config);

// Writes images/<id>.pgm, keypoints/<id>.txt and manifest.csv under root;
// returns the manifest path.
std::string write_synth_dataset(const SynthConfig& config, const std::string& root);

}  // namespace distaudit
