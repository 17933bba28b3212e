#pragma once

#include <array>
#include <string>

namespace distaudit {

// The standard 68-point facial annotation, 1-indexed in the usual convention:
// jaw 1-17, eyebrows 18-27, nose 28-36, eyes 37-48, mouth 49-68.
struct KeypointSet {
    struct Point {
        double x = 0;
        double y = 0;
    };
    std::array<Point, 68> points{};

    // 1-indexed accessor matching the annotation numbering.
    const Point& pt(int index1) const { return points[static_cast<std::size_t>(index1 - 1)]; }
    Point& pt(int index1) { return points[static_cast<std::size_t>(index1 - 1)]; }
};

enum class FaceRegion { Eyes, Nose, Mouth, Forehead, LeftCheek, RightCheek, Mask };

inline constexpr std::array<FaceRegion, 7> kAllFaceRegions = {
    FaceRegion::Eyes,      FaceRegion::Nose,       FaceRegion::Mouth, FaceRegion::Forehead,
    FaceRegion::LeftCheek, FaceRegion::RightCheek, FaceRegion::Mask};

const char* face_region_name(FaceRegion r);
FaceRegion face_region_from_name(const std::string& name);

// Integer pixel rectangle, inclusive-exclusive on both axes.
struct RectRegion {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    bool operator==(const RectRegion&) const = default;
};

// Text format: 68 lines "x y". JSON alternative: array of 68 [x, y] pairs.
// Detected by the first non-space byte.
KeypointSet load_keypoints(const std::string& path);
KeypointSet parse_keypoints(const std::string& text);

void check_keypoints(const KeypointSet& kps);

// Region geometry:
//   Eyes  = bbox of points 37-48, grown by 10% of its width/height per side.
//   Nose  = bbox of points 28-36, grown 10%.
//   Mouth = bbox of points 49-68, grown 10%.
//   Forehead = x-range of brow points 18-27; y from
//              max(0, browTop - 1.2 * (eyeTop - browTop)) down to browTop.
//   LeftCheek  = x from jaw point 2 to nose point 32,
//                y from max y of 37-42 down to min y of 49-68.
//   RightCheek = mirrored: jaw point 16, nose point 36, eye points 43-48.
//   Mask = x-extent of jaw points 2-16; y from point 31 down to the lowest
//          jaw point among 2-16.
// Bounds are rounded half-up, then clamped to the image. Throws if the
// region is empty after clamping.
RectRegion region_bbox(const KeypointSet& kps, FaceRegion region, int img_w, int img_h);

// Same geometry before clamping, exposed for geometry-level checks.
struct RectF {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
RectF region_bounds_unclamped(const KeypointSet& kps, FaceRegion region);

}  // namespace distaudit
