// synthgen: builds the bundled synthetic face dataset (images, keypoints,
// manifest) so the pipeline runs without any external data.

#include <iostream>

#include <CLI11.hpp>

#include "distaudit/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"seeded synthetic face dataset generator"};
    distaudit::SynthConfig cfg;
    std::string out_dir = "synth_data";
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--subjects-per-cell", cfg.subjects_per_cell,
                   "subjects per (gender, race) cell");
    app.add_option("--images-per-subject", cfg.images_per_subject, "images per subject");
    app.add_option("--size", cfg.size, "square canvas size in pixels");
    app.add_option("--seed", cfg.seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const std::string manifest = distaudit::write_synth_dataset(cfg, out_dir);
        std::cout << "wrote " << manifest << " (" << 2 * 2 * cfg.subjects_per_cell << " subjects, "
                  << 2 * 2 * cfg.subjects_per_cell * cfg.images_per_subject << " images)\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
