#pragma once

#include "rden/image.hpp"

#include <limits>

namespace rden {

/// Returned by psnr() for identical images.
inline constexpr double kPsnrPerfect = std::numeric_limits<double>::infinity();

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// 10 log10(peak^2 / mse), kPsnrPerfect when mse == 0.
double psnr(const Image& reference, const Image& test, double peak = 1.0);

/// Mean SSIM over every fully contained 11x11 Gaussian window (sigma 1.5),
/// with C1 = (0.01 peak)^2 and C2 = (0.03 peak)^2.
double ssim(const Image& reference, const Image& test, double peak = 1.0);

struct QualityScore {
    double psnr_db = 0.0;
    double ssim = 0.0;
};

QualityScore quality(const Image& reference, const Image& test, double peak = 1.0);

} // namespace rden
