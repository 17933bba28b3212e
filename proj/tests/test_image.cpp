#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "distaudit/image.hpp"
#include "distaudit/serial_kernels.hpp"
#include "test_util.hpp"

using namespace distaudit;

TEST_CASE("quantize_u8 rounds half up and clamps") {
    CHECK(quantize_u8(127.5) == 128);
    CHECK(quantize_u8(127.49) == 127);
    CHECK(quantize_u8(-3.0) == 0);
    CHECK(quantize_u8(-0.5) == 0);  // floor(-0.5 + 0.5) = 0
    CHECK(quantize_u8(254.5) == 255);
    CHECK(quantize_u8(300.0) == 255);
}

TEST_CASE("make_image validates dimensions and channels") {
    CHECK_THROWS(make_image(0, 4, 1));
    CHECK_THROWS(make_image(4, -1, 1));
    CHECK_THROWS(make_image(4, 4, 2));
    const Image img = make_image(3, 2, 3, 9);
    CHECK(img.pixels.size() == 18);
    CHECK(img.at(2, 1, 2) == 9);
}

TEST_CASE("to_grayscale weights and identity") {
    Image rgb = make_image(2, 1, 3);
    rgb.at(0, 0, 0) = 255; rgb.at(0, 0, 1) = 255; rgb.at(0, 0, 2) = 255;
    rgb.at(1, 0, 0) = 100; rgb.at(1, 0, 1) = 150; rgb.at(1, 0, 2) = 200;
    const Image gray = to_grayscale(rgb);
    CHECK(gray.channels == 1);
    CHECK(gray.at(0, 0) == 255);
    // 0.299*100 + 0.587*150 + 0.114*200 = 140.75, half-up
    CHECK(gray.at(1, 0) == 141);

    const Image already = testutil::random_image(7, 5, 1, 11);
    CHECK(to_grayscale(already) == already);
}

TEST_CASE("to_grayscale is idempotent") {
    for (std::uint64_t s = 0; s < 8; ++s) {
        const Image img = testutil::random_image(9, 6, 3, 100 + s);
        const Image once = to_grayscale(img);
        CHECK(to_grayscale(once) == once);
    }
}

TEST_CASE("resize_area identity and constant blocks") {
    const Image img = testutil::random_image(96, 96, 1, 3);
    CHECK(resize_area(img, 96, 96) == img);

    const Image c = make_image(4, 4, 1, 77);
    const Image half = resize_area(c, 2, 2);
    for (auto v : half.pixels) CHECK(v == 77);
}

TEST_CASE("resize_area 2x2 to 1x1 rounds the block mean half up") {
    Image img = make_image(2, 2, 1);
    img.pixels = {0, 255, 255, 0};
    const Image one = resize_area(img, 1, 1);
    CHECK(one.pixels[0] == 128);  // mean 127.5, half-up
}

TEST_CASE("resize_area stays within the input range and keeps constants") {
    for (std::uint64_t s = 0; s < 6; ++s) {
        const Image img = testutil::random_image(13, 9, 3, 40 + s);
        const auto lo = *std::min_element(img.pixels.begin(), img.pixels.end());
        const auto hi = *std::max_element(img.pixels.begin(), img.pixels.end());
        const Image out = resize_area(img, 5, 4);
        for (auto v : out.pixels) {
            CHECK(v >= lo);
            CHECK(v <= hi);
        }
    }
    // mean preservation for constants at awkward ratios
    const Image c = make_image(10, 7, 1, 201);
    for (auto v : resize_area(c, 3, 5).pixels) CHECK(v == 201);
}

TEST_CASE("resize_area rejects zero targets") {
    const Image img = make_image(4, 4, 1);
    CHECK_THROWS(resize_area(img, 0, 4));
    CHECK_THROWS(resize_area(img, 4, 0));
}

TEST_CASE("resize_bilinear constants, identity, zero target") {
    const Image c = make_image(5, 3, 3, 123);
    for (auto v : resize_bilinear(c, 11, 7).pixels) CHECK(v == 123);
    const Image img = testutil::random_image(8, 8, 1, 77);
    CHECK(resize_bilinear(img, 8, 8) == img);
    CHECK_THROWS(resize_bilinear(img, 0, 1));
}

// Reference evaluation of the bilinear formula at half-pixel centers,
// independent of the implementation.
static double bilinear_ref_1d(const std::vector<double>& row, int out_n, int ox) {
    const double scale = static_cast<double>(row.size()) / out_n;
    const double fx = (ox + 0.5) * scale - 0.5;
    const int x0 = static_cast<int>(std::floor(fx));
    const double t = fx - x0;
    const int n = static_cast<int>(row.size());
    const int a = std::clamp(x0, 0, n - 1), b = std::clamp(x0 + 1, 0, n - 1);
    return (1.0 - t) * row[static_cast<std::size_t>(a)] + t * row[static_cast<std::size_t>(b)];
}

TEST_CASE("resize_bilinear matches direct formula evaluation on a 1x2 upscale") {
    Image img = make_image(2, 1, 1);
    img.pixels = {0, 255};
    const Image out = resize_bilinear(img, 4, 1);
    for (int ox = 0; ox < 4; ++ox) {
        const double expect = bilinear_ref_1d({0.0, 255.0}, 4, ox);
        CHECK(out.at(ox, 0) == quantize_u8(expect));
    }
    // frozen from the oracle: centers at -0.25, 0.25, 0.75, 1.25
    CHECK(out.pixels == std::vector<std::uint8_t>{0, 64, 191, 255});
}

TEST_CASE("openmp kernels match the serial reference byte for byte") {
    for (int ch : {1, 3}) {
        const Image img = testutil::random_image(33, 21, ch, 500 + static_cast<std::uint64_t>(ch));
        CHECK(to_grayscale(img) == serial::to_grayscale(img));
        CHECK(resize_area(img, 9, 5) == serial::resize_area(img, 9, 5));
        CHECK(resize_area(img, 50, 40) == serial::resize_area(img, 50, 40));
        CHECK(resize_bilinear(img, 17, 11) == serial::resize_bilinear(img, 17, 11));
        CHECK(resize_bilinear(img, 64, 48) == serial::resize_bilinear(img, 64, 48));
    }
}
