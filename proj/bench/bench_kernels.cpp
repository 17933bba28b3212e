// Timing comparison of the OpenMP raster kernels against their serial
// reference implementations, plus a byte-equality check between the two.
//
// Usage: bench_kernels [size] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "distaudit/distortion.hpp"
#include "distaudit/image.hpp"
#include "distaudit/rng.hpp"
#include "distaudit/serial_kernels.hpp"

using namespace distaudit;

namespace {

Image random_image(int w, int h, int channels, std::uint64_t stream) {
    Image img = make_image(w, h, channels);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<std::uint8_t>(ctr64::at(stream, i) & 0xff);
    return img;
}

template <typename F>
double best_ms(F&& fn, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

int failures = 0;

template <typename P, typename S>
void run_case(const char* name, P&& parallel, S&& serial, int repeats) {
    Image out_p, out_s;
    const double ms_p = best_ms([&] { out_p = parallel(); }, repeats);
    const double ms_s = best_ms([&] { out_s = serial(); }, repeats);
    const bool equal = out_p == out_s;
    if (!equal) ++failures;
    std::printf("%-18s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   %s\n", name, ms_s,
                ms_p, ms_s / ms_p, equal ? "bytes equal" : "BYTES DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    const int size = argc > 1 ? std::atoi(argv[1]) : 1024;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

#ifdef _OPENMP
    std::printf("threads: %d, image: %dx%d, repeats: %d\n", omp_get_max_threads(), size, size,
                repeats);
#else
    std::printf("built without OpenMP, image: %dx%d, repeats: %d\n", size, size, repeats);
#endif

    const Image gray = random_image(size, size, 1, derive_stream(7, "bench", "gray"));
    const Image rgb = random_image(size, size, 3, derive_stream(7, "bench", "rgb"));
    const SeedContext ctx{7, "bench"};

    run_case(
        "gaussian_blur 4.0", [&] { return gaussian_blur(gray, 4.0); },
        [&] { return serial::gaussian_blur(gray, 4.0); }, repeats);
    run_case(
        "gaussian_noise 20", [&] { return add_gaussian_noise(gray, 20.0, ctx); },
        [&] { return serial::add_gaussian_noise(gray, 20.0, ctx); }, repeats);
    run_case(
        "salt_pepper 0.09", [&] { return add_salt_pepper(rgb, 0.09, ctx); },
        [&] { return serial::add_salt_pepper(rgb, 0.09, ctx); }, repeats);
    run_case(
        "brightness 1.5", [&] { return adjust_brightness(rgb, 1.5); },
        [&] { return serial::adjust_brightness(rgb, 1.5); }, repeats);
    run_case(
        "resize_area /4", [&] { return resize_area(gray, size / 4, size / 4); },
        [&] { return serial::resize_area(gray, size / 4, size / 4); }, repeats);
    run_case(
        "resize_bilinear x2", [&] { return resize_bilinear(gray, size * 2, size * 2); },
        [&] { return serial::resize_bilinear(gray, size * 2, size * 2); }, repeats);
    run_case(
        "to_grayscale", [&] { return to_grayscale(rgb); },
        [&] { return serial::to_grayscale(rgb); }, repeats);

    if (failures) {
        std::printf("%d kernel(s) diverged from the serial reference\n", failures);
        return 1;
    }
    return 0;
}
