#pragma once

#include <string>

#include "distaudit/image.hpp"

namespace distaudit {

// Reads PGM (P5), PPM (P6) or PNG (8-bit gray / truecolor, non-interlaced).
// Format is detected from the file's magic bytes, not the extension.
Image load_image(const std::string& path);

// Writes PGM for 1-channel images, PPM for 3-channel. The extension must
// match the channel count (.pgm <-> 1, .ppm <-> 3). PNG output is not
// supported; PGM/PPM carry the bit-exact reference bytes.
void save_image(const Image& img, const std::string& path);

}  // namespace distaudit
