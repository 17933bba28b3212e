#include "distaudit/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace distaudit {

namespace {

// Min/max of a coordinate over 1-indexed points [first, last].
struct Span {
    double lo, hi;
};

Span span_x(const KeypointSet& k, int first, int last) {
    double lo = k.pt(first).x, hi = lo;
    for (int i = first; i <= last; ++i) {
        lo = std::min(lo, k.pt(i).x);
        hi = std::max(hi, k.pt(i).x);
    }
    return {lo, hi};
}

Span span_y(const KeypointSet& k, int first, int last) {
    double lo = k.pt(first).y, hi = lo;
    for (int i = first; i <= last; ++i) {
        lo = std::min(lo, k.pt(i).y);
        hi = std::max(hi, k.pt(i).y);
    }
    return {lo, hi};
}

RectF grown_bbox(const KeypointSet& k, int first, int last, double margin) {
    const Span xs = span_x(k, first, last);
    const Span ys = span_y(k, first, last);
    const double mx = margin * (xs.hi - xs.lo);
    const double my = margin * (ys.hi - ys.lo);
    return {xs.lo - mx, ys.lo - my, xs.hi + mx, ys.hi + my};
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

const char* face_region_name(FaceRegion r) {
    switch (r) {
        case FaceRegion::Eyes: return "Eyes";
        case FaceRegion::Nose: return "Nose";
        case FaceRegion::Mouth: return "Mouth";
        case FaceRegion::Forehead: return "Forehead";
        case FaceRegion::LeftCheek: return "LeftCheek";
        case FaceRegion::RightCheek: return "RightCheek";
        case FaceRegion::Mask: return "Mask";
    }
    return "?";
}

FaceRegion face_region_from_name(const std::string& name) {
    for (FaceRegion r : kAllFaceRegions)
        if (name == face_region_name(r)) return r;
    throw std::invalid_argument("unknown face region: " + name);
}

void check_keypoints(const KeypointSet& kps) {
    for (const auto& p : kps.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0)
            throw std::invalid_argument("keypoint coordinates must be finite and >= 0");
    }
}

KeypointSet parse_keypoints(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw std::runtime_error("empty keypoint document");

    KeypointSet kps;
    if (text[first] == '[') {
        const auto doc = nlohmann::json::parse(text);
        if (!doc.is_array() || doc.size() != 68)
            throw std::runtime_error("expected 68 points, got " + std::to_string(doc.size()));
        for (std::size_t i = 0; i < 68; ++i) {
            const auto& pair = doc[i];
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
                !pair[1].is_number())
                throw std::runtime_error("keypoint " + std::to_string(i + 1) +
                                         " is not a [x, y] number pair");
            kps.points[i] = {pair[0].get<double>(), pair[1].get<double>()};
        }
    } else {
        std::istringstream in(text);
        std::size_t n = 0;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::istringstream ls(line);
            double x, y;
            if (!(ls >> x >> y))
                throw std::runtime_error("non-numeric token on keypoint line " +
                                         std::to_string(n + 1));
            if (n >= 68) throw std::runtime_error("expected 68 points, file has more");
            kps.points[n++] = {x, y};
        }
        if (n != 68)
            throw std::runtime_error("expected 68 points, got " + std::to_string(n));
    }
    check_keypoints(kps);
    return kps;
}

KeypointSet load_keypoints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open keypoint file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_keypoints(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

RectF region_bounds_unclamped(const KeypointSet& k, FaceRegion region) {
    switch (region) {
        case FaceRegion::Eyes: return grown_bbox(k, 37, 48, 0.10);
        case FaceRegion::Nose: return grown_bbox(k, 28, 36, 0.10);
        case FaceRegion::Mouth: return grown_bbox(k, 49, 68, 0.10);
        case FaceRegion::Forehead: {
            const Span bx = span_x(k, 18, 27);
            const double brow_top = span_y(k, 18, 27).lo;
            const double eye_top = span_y(k, 37, 48).lo;
            const double top = std::max(0.0, brow_top - 1.2 * (eye_top - brow_top));
            return {bx.lo, top, bx.hi, brow_top};
        }
        case FaceRegion::LeftCheek: {
            const double eye_bottom = span_y(k, 37, 42).hi;
            const double mouth_top = span_y(k, 49, 68).lo;
            return {k.pt(2).x, eye_bottom, k.pt(32).x, mouth_top};
        }
        case FaceRegion::RightCheek: {
            const double eye_bottom = span_y(k, 43, 48).hi;
            const double mouth_top = span_y(k, 49, 68).lo;
            return {k.pt(36).x, eye_bottom, k.pt(16).x, mouth_top};
        }
        case FaceRegion::Mask: {
            const Span jx = span_x(k, 2, 16);
            const double chin = span_y(k, 2, 16).hi;
            return {jx.lo, k.pt(31).y, jx.hi, chin};
        }
    }
    throw std::invalid_argument("unknown face region");
}

RectRegion region_bbox(const KeypointSet& kps, FaceRegion region, int img_w, int img_h) {
    check_keypoints(kps);
    if (img_w < 1 || img_h < 1) throw std::invalid_argument("image dimensions must be >= 1");
    const RectF b = region_bounds_unclamped(kps, region);
    RectRegion r;
    r.x0 = std::max(0, round_half_up(b.x0));
    r.y0 = std::max(0, round_half_up(b.y0));
    r.x1 = std::min(img_w, round_half_up(b.x1));
    r.y1 = std::min(img_h, round_half_up(b.y1));
    if (r.x0 >= r.x1 || r.y0 >= r.y1)
        throw std::runtime_error(std::string("region ") + face_region_name(region) +
                                 " is empty after clamping; keypoints outside the image?");
    return r;
}

}  // namespace distaudit
