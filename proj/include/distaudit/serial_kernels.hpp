#pragma once

#include "distaudit/distortion.hpp"
#include "distaudit/image.hpp"

namespace distaudit::serial {

// Plain single-threaded versions of the raster kernels. The production
// kernels in distaudit:: run their pixel loops under OpenMP; these exist so
// tests can pin the parallel output against a sequential run, and so the
// benchmark has a baseline. Same arithmetic, same bytes.
Image to_grayscale(const Image& img);
Image resize_area(const Image& img, int out_w, int out_h);
Image resize_bilinear(const Image& img, int out_w, int out_h);
Image gaussian_blur(const Image& img, double sigma);
Image adjust_brightness(const Image& img, double beta);
Image add_gaussian_noise(const Image& img, double sigma, const SeedContext& ctx);
Image add_salt_pepper(const Image& img, double p, const SeedContext& ctx);

// Direct dense 2-D convolution with the outer product of the 1-D taps.
// Independent of the separable path; agrees with it to within one gray
// level per sample (quantization happens once in both).
Image gaussian_blur_dense(const Image& img, double sigma);

}  // namespace distaudit::serial
