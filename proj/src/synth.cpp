#include "distaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "distaudit/image_io.hpp"
#include "distaudit/rng.hpp"

namespace distaudit {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Persistent per-subject geometry, in units of the canvas size.
struct FaceParams {
    double cx, cy;
    double half_w, half_h;
    double skin;
    double shade_x, shade_y;  // per-subject low-frequency shading
    double background;
    double hair_frac, hair_tone;
    double tex_amp, tex_fx, tex_fy, tex_phase;      // fine grating, gone by sigma=2 blur
    double tex2_amp, tex2_fx, tex2_fy, tex2_phase;  // coarse grating, fades by sigma=4
    double eye_dx, eye_dy, eye_rx, eye_ry;
    double pupil;
    double brow_dy, brow_len, brow_th, brow_tone;
    double nose_top_dy, nose_len, nose_w;
    double mouth_dy, mouth_w, mouth_th, mouth_tone;
    std::array<double, 4> quadrant;  // coarse per-quadrant tone offsets
    struct Bar {
        double dx, dy, cos_a, sin_a, half_w, delta;  // oriented stripe
    };
    std::array<Bar, 2> bars;
    struct Blob {
        double dx, dy, r, delta;
    };
    std::array<Blob, 5> blobs;
};

double uniform_in(SeqRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.unit(); }

FaceParams draw_subject(SeqRng& rng, const std::string& gender, const std::string& race,
                        int size) {
    const double N = size;
    FaceParams f{};
    f.cx = N * 0.5 + uniform_in(rng, -2, 2) * N / 96.0;
    f.cy = N * 0.5 + uniform_in(rng, -2, 2) * N / 96.0;
    f.half_w = N * (0.26 + 0.10 * rng.unit() + (gender == "G1" ? 0.02 : 0.0));
    f.half_h = N * (0.38 + 0.08 * rng.unit());
    f.skin = race == "R1" ? uniform_in(rng, 140, 215) : uniform_in(rng, 60, 135);
    f.shade_x = uniform_in(rng, -0.35, 0.35);
    f.shade_y = uniform_in(rng, -0.35, 0.35);
    f.background = uniform_in(rng, 210, 250);
    f.hair_frac = uniform_in(rng, 0.15, 0.48);
    f.hair_tone = uniform_in(rng, 10, 110);
    f.tex_amp = uniform_in(rng, 4, 10);
    {
        const double lambda = uniform_in(rng, 4.5, 10.0) * N / 96.0;
        const double ang = uniform_in(rng, 0, kPi);
        f.tex_fx = 2 * kPi * std::cos(ang) / lambda;
        f.tex_fy = 2 * kPi * std::sin(ang) / lambda;
    }
    f.tex_phase = uniform_in(rng, 0, 2 * kPi);
    f.tex2_amp = uniform_in(rng, 8, 18);
    {
        const double lambda = uniform_in(rng, 14.0, 26.0) * N / 96.0;
        const double ang = uniform_in(rng, 0, kPi);
        f.tex2_fx = 2 * kPi * std::cos(ang) / lambda;
        f.tex2_fy = 2 * kPi * std::sin(ang) / lambda;
    }
    f.tex2_phase = uniform_in(rng, 0, 2 * kPi);
    f.eye_dx = N * (0.11 + 0.07 * rng.unit());
    f.eye_dy = -N * (0.09 + 0.04 * rng.unit());
    f.eye_rx = N * (0.035 + 0.025 * rng.unit());
    f.eye_ry = f.eye_rx * (0.45 + 0.15 * rng.unit());
    f.pupil = uniform_in(rng, 5, 70);
    f.brow_dy = f.eye_dy - N * (0.055 + 0.025 * rng.unit());
    f.brow_len = N * (0.08 + 0.07 * rng.unit());
    f.brow_th = N * (0.010 + 0.012 * rng.unit() + (gender == "G1" ? 0.006 : 0.0));
    f.brow_tone = f.skin * uniform_in(rng, 0.25, 0.5);
    f.nose_top_dy = -N * (0.04 + 0.02 * rng.unit());
    f.nose_len = N * (0.13 + 0.08 * rng.unit());
    f.nose_w = N * (0.025 + 0.03 * rng.unit());
    f.mouth_dy = N * (0.19 + 0.05 * rng.unit());
    f.mouth_w = N * (0.08 + 0.07 * rng.unit());
    f.mouth_th = N * (0.014 + 0.018 * rng.unit());
    f.mouth_tone = f.skin * (gender == "G2" ? uniform_in(rng, 0.35, 0.5)
                                            : uniform_in(rng, 0.48, 0.65));
    for (auto& q : f.quadrant) q = uniform_in(rng, -14, 14);
    for (auto& b : f.bars) {
        // Long oriented stripes: their edge orientations keep feeding the
        // gradient histogram after heavy blur, unlike fine texture.
        const double ang = uniform_in(rng, 0, kPi);
        b.cos_a = std::cos(ang);
        b.sin_a = std::sin(ang);
        b.dx = uniform_in(rng, -0.4, 0.4) * f.half_w;
        b.dy = uniform_in(rng, -0.4, 0.4) * f.half_h;
        b.half_w = N * (0.025 + 0.03 * rng.unit());
        b.delta = (rng.coin() ? 1 : -1) * uniform_in(rng, 30, 55);
    }
    for (auto& b : f.blobs) {
        const double ang = uniform_in(rng, 0, 2 * kPi);
        const double rad = 0.3 + 0.5 * rng.unit();
        b.dx = rad * f.half_w * std::cos(ang);
        b.dy = rad * f.half_h * std::sin(ang);
        b.r = N * (0.015 + 0.03 * rng.unit());
        b.delta = (rng.coin() ? 1 : -1) * uniform_in(rng, 18, 45);
    }
    return f;
}

bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
    const double dx = (x - cx) / rx, dy = (y - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
}

Image render_face(const FaceParams& f, int size, double jx, double jy, double tone_jit,
                  double grad, std::uint64_t noise_stream_seed) {
    Image img = make_image(size, size, 1);
    const double cx = f.cx + jx, cy = f.cy + jy;
    const double ex_l = cx - f.eye_dx, ex_r = cx + f.eye_dx, ey = cy + f.eye_dy;
    const double nose_top = cy + f.nose_top_dy;
    const double mouth_y = cy + f.mouth_dy;

    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double fx = x + 0.5, fy = y + 0.5;
            double v = f.background + grad * (fx / size - 0.5) + tone_jit * 0.5;

            if (in_ellipse(fx, fy, cx, cy, f.half_w, f.half_h)) {
                v = f.skin * (1.0 + f.shade_x * (fx - cx) / f.half_w +
                              f.shade_y * (fy - cy) / f.half_h) +
                    tone_jit;
                v += f.tex_amp * std::sin(f.tex_fx * fx + f.tex_fy * fy + f.tex_phase) +
                     f.tex2_amp * std::sin(f.tex2_fx * fx + f.tex2_fy * fy + f.tex2_phase);
                v += f.quadrant[(fx < cx ? 0 : 1) + (fy < cy ? 0 : 2)];
                for (const auto& b : f.bars) {
                    const double d = (fx - (cx + b.dx)) * b.sin_a - (fy - (cy + b.dy)) * b.cos_a;
                    if (std::abs(d) <= b.half_w) v += b.delta;
                }
                // hair band across the top of the head ellipse
                if (fy < cy - (1.0 - f.hair_frac) * f.half_h) v = f.hair_tone;
                for (const auto& b : f.blobs) {
                    const double dx = fx - (cx + b.dx), dy = fy - (cy + b.dy);
                    if (dx * dx + dy * dy <= b.r * b.r) v += b.delta;
                }
                // nose wedge
                if (fy >= nose_top && fy <= nose_top + f.nose_len) {
                    const double w = f.nose_w * (fy - nose_top) / f.nose_len;
                    if (std::abs(fx - cx) <= w) v = f.skin * 0.82 + tone_jit;
                }
                // brows
                if (std::abs(fy - (cy + f.brow_dy)) <= f.brow_th &&
                    (std::abs(fx - ex_l) <= f.brow_len / 2 ||
                     std::abs(fx - ex_r) <= f.brow_len / 2))
                    v = f.brow_tone;
                // eyes: sclera with dark pupil
                for (double ex : {ex_l, ex_r}) {
                    if (in_ellipse(fx, fy, ex, ey, f.eye_rx, f.eye_ry)) {
                        v = 235.0;
                        if (in_ellipse(fx, fy, ex, ey, f.eye_rx * 0.45, f.eye_ry * 0.8))
                            v = f.pupil;
                    }
                }
                // mouth
                if (in_ellipse(fx, fy, cx, mouth_y, f.mouth_w, f.mouth_th)) v = f.mouth_tone;
            }
            const double noise =
                1.0 * ctr64::normal(noise_stream_seed,
                                    static_cast<std::uint64_t>(y) * size + x);
            img.at(x, y) = quantize_u8(v + noise);
        }
    }
    return img;
}

KeypointSet face_keypoints(const FaceParams& f, int size, double jx, double jy) {
    KeypointSet k;
    const double cx = f.cx + jx, cy = f.cy + jy;
    const double ex_l = cx - f.eye_dx, ex_r = cx + f.eye_dx, ey = cy + f.eye_dy;

    // Jaw 1-17 along the lower half of the head ellipse, left ear to right.
    for (int i = 0; i < 17; ++i) {
        const double phi = kPi - i * (kPi / 16.0);
        k.pt(1 + i) = {cx + f.half_w * std::cos(phi), cy + f.half_h * std::sin(phi)};
    }
    // Brows 18-22 (image-left), 23-27 (image-right).
    for (int i = 0; i < 5; ++i) {
        const double t = i / 4.0 - 0.5;
        k.pt(18 + i) = {ex_l + t * f.brow_len, cy + f.brow_dy};
        k.pt(23 + i) = {ex_r + t * f.brow_len, cy + f.brow_dy};
    }
    // Nose bridge 28-31, nostril row 32-36.
    const double nose_top = cy + f.nose_top_dy;
    for (int i = 0; i < 4; ++i)
        k.pt(28 + i) = {cx, nose_top + f.nose_len * i / 3.0};
    for (int i = 0; i < 5; ++i) {
        const double t = i / 4.0 - 0.5;
        k.pt(32 + i) = {cx + 2.0 * t * f.nose_w, nose_top + f.nose_len + 1.0};
    }
    // Eyes 37-42 / 43-48: hexagon corners of each eye ellipse.
    auto eye_hex = [&](int base, double ex) {
        k.pt(base + 0) = {ex - f.eye_rx, ey};
        k.pt(base + 1) = {ex - f.eye_rx / 2, ey - f.eye_ry};
        k.pt(base + 2) = {ex + f.eye_rx / 2, ey - f.eye_ry};
        k.pt(base + 3) = {ex + f.eye_rx, ey};
        k.pt(base + 4) = {ex + f.eye_rx / 2, ey + f.eye_ry};
        k.pt(base + 5) = {ex - f.eye_rx / 2, ey + f.eye_ry};
    };
    eye_hex(37, ex_l);
    eye_hex(43, ex_r);
    // Mouth: outer ring 49-60, inner ring 61-68.
    const double mouth_y = cy + f.mouth_dy;
    for (int i = 0; i < 12; ++i) {
        const double ang = kPi + i * (2 * kPi / 12.0);
        k.pt(49 + i) = {cx + f.mouth_w * std::cos(ang), mouth_y + 1.6 * f.mouth_th * std::sin(ang)};
    }
    for (int i = 0; i < 8; ++i) {
        const double ang = kPi + i * (2 * kPi / 8.0);
        k.pt(61 + i) = {cx + 0.6 * f.mouth_w * std::cos(ang),
                        mouth_y + 0.8 * f.mouth_th * std::sin(ang)};
    }

    // The invariant demands non-negative coordinates; geometry keeps points
    // inside the canvas, clamp guards the extreme jitter corner anyway.
    for (auto& p : k.points) {
        p.x = std::clamp(p.x, 0.0, static_cast<double>(size - 1));
        p.y = std::clamp(p.y, 0.0, static_cast<double>(size - 1));
    }
    return k;
}

}  // namespace

std::vector<SynthImage> generate_synth_dataset(const SynthConfig& config) {
    if (config.subjects_per_cell < 1 || config.images_per_subject < 1 || config.size < 32)
        throw std::invalid_argument("synth config needs subjects >= 1, images >= 1, size >= 32");

    std::vector<SynthImage> out;
    for (const char* gender : {"G1", "G2"}) {
        for (const char* race : {"R1", "R2"}) {
            for (int s = 0; s < config.subjects_per_cell; ++s) {
                char sid[64];
                std::snprintf(sid, sizeof sid, "%s%s_s%03d", gender, race, s);
                SeqRng subject_rng(derive_stream(config.seed, "subject", sid));
                const FaceParams params = draw_subject(subject_rng, gender, race, config.size);

                for (int i = 0; i < config.images_per_subject; ++i) {
                    char iid[80];
                    std::snprintf(iid, sizeof iid, "%s_i%02d", sid, i);
                    SeqRng img_rng(derive_stream(config.seed, "imagejitter", iid));
                    const double jx = uniform_in(img_rng, -0.75, 0.75) * config.size / 96.0;
                    const double jy = uniform_in(img_rng, -0.75, 0.75) * config.size / 96.0;
                    const double tone_jit = uniform_in(img_rng, -2, 2);
                    const double grad = uniform_in(img_rng, -2, 2);

                    SynthImage si;
                    si.record.image_id = iid;
                    si.record.subject_id = sid;
                    si.record.gender = gender;
                    si.record.race = race;
                    si.image = render_face(params, config.size, jx, jy, tone_jit, grad,
                                           derive_stream(config.seed, "imagenoise", iid));
                    si.keypoints = face_keypoints(params, config.size, jx, jy);
                    out.push_back(std::move(si));
                }
            }
        }
    }
    return out;
}

std::string write_synth_dataset(const SynthConfig& config, const std::string& root) {
    namespace fs = std::filesystem;
    const fs::path base(root);
    fs::create_directories(base / "images");
    fs::create_directories(base / "keypoints");

    auto dataset = generate_synth_dataset(config);
    std::vector<ManifestRecord> records;
    for (auto& si : dataset) {
        const fs::path img_path = base / "images" / (si.record.image_id + ".pgm");
        const fs::path kp_path = base / "keypoints" / (si.record.image_id + ".txt");
        save_image(si.image, img_path.string());

        std::ofstream kp(kp_path, std::ios::binary);
        if (!kp) throw std::runtime_error("cannot write keypoints: " + kp_path.string());
        for (const auto& p : si.keypoints.points) {
            char line[64];
            std::snprintf(line, sizeof line, "%.2f %.2f\n", p.x, p.y);
            kp << line;
        }

        si.record.path = img_path.string();
        si.record.keypoints_path = kp_path.string();
        records.push_back(si.record);
    }
    const fs::path manifest = base / "manifest.csv";
    save_manifest(records, manifest.string());
    return manifest.string();
}

}  // namespace distaudit
