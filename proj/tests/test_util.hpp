#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "distaudit/image.hpp"
#include "distaudit/rng.hpp"
#include "distaudit/synth.hpp"

namespace testutil {

// Per-process scratch directory, removed on exit.
inline std::filesystem::path scratch_dir() {
    struct Scratch {
        std::filesystem::path path;
        Scratch() {
            path = std::filesystem::temp_directory_path() /
                   ("distaudit_test_" + std::to_string(::getpid()));
            std::filesystem::create_directories(path);
        }
        ~Scratch() {
            std::error_code ec;
            std::filesystem::remove_all(path, ec);
        }
    };
    static Scratch scratch;
    return scratch.path;
}

// The bundled synthetic dataset, written once per process. Sized so every
// subgroup supports the full 10x(300+300) protocol.
inline std::string synth_manifest() {
    static std::string path = [] {
        distaudit::SynthConfig cfg;
        cfg.seed = 42;
        return distaudit::write_synth_dataset(cfg, (scratch_dir() / "synth").string());
    }();
    return path;
}

inline distaudit::Image random_image(int w, int h, int channels, std::uint64_t stream) {
    distaudit::Image img = distaudit::make_image(w, h, channels);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<std::uint8_t>(distaudit::ctr64::at(stream, i) & 0xff);
    return img;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace testutil
