#include "rden/metrics.hpp"

#include "rden/error.hpp"

#include <array>
#include <cmath>

namespace rden {

namespace {

std::array<double, kSsimWindow * kSsimWindow> gaussian_window()
{
    std::array<double, kSsimWindow * kSsimWindow> w{};
    const double half = static_cast<double>(kSsimWindow / 2);
    double total = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i)
        for (std::size_t j = 0; j < kSsimWindow; ++j) {
            const double dy = static_cast<double>(i) - half;
            const double dx = static_cast<double>(j) - half;
            w[i * kSsimWindow + j] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSsimSigma * kSsimSigma));
            total += w[i * kSsimWindow + j];
        }
    for (double& v : w)
        v /= total;
    return w;
}

void require_peak(double peak)
{
    if (!(peak > 0.0) || !std::isfinite(peak))
        throw ConfigError("metric peak must be finite and > 0");
}

} // namespace

double psnr(const Image& reference, const Image& test, double peak)
{
    require_same_shape(reference, test, "psnr");
    require_peak(peak);
    const double err = squared_distance(reference, test) / static_cast<double>(reference.size());
    if (err == 0.0)
        return kPsnrPerfect;
    return 10.0 * std::log10(peak * peak / err);
}

double ssim(const Image& reference, const Image& test, double peak)
{
    require_same_shape(reference, test, "ssim");
    require_peak(peak);
    if (reference.width < kSsimWindow || reference.height < kSsimWindow)
        throw ConfigError("ssim needs images of at least 11x11 pixels");

    static const auto window = gaussian_window();
    const double c1 = (kSsimK1 * peak) * (kSsimK1 * peak);
    const double c2 = (kSsimK2 * peak) * (kSsimK2 * peak);
    const std::size_t w = reference.width;
    const std::size_t rows = reference.height - kSsimWindow + 1;
    const std::size_t cols = reference.width - kSsimWindow + 1;

    std::vector<double> local(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
            for (std::size_t i = 0; i < kSsimWindow; ++i)
                for (std::size_t j = 0; j < kSsimWindow; ++j) {
                    const double g = window[i * kSsimWindow + j];
                    const double a = reference.data[(r + i) * w + c + j];
                    const double b = test.data[(r + i) * w + c + j];
                    mx += g * a;
                    my += g * b;
                    xx += g * (a * a);
                    yy += g * (b * b);
                    xy += g * (a * b);
                }
            const double vx = xx - mx * mx;
            const double vy = yy - my * my;
            const double cov = xy - mx * my;
            local[r * cols + c] = ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                                  / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return pairwise_sum(local) / static_cast<double>(local.size());
}

QualityScore quality(const Image& reference, const Image& test, double peak)
{
    return {psnr(reference, test, peak), ssim(reference, test, peak)};
}

} // namespace rden
