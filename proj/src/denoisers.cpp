#include "rden/denoisers.hpp"

#include "rden/error.hpp"

#include <cmath>

namespace rden {

Denoiser::Denoiser(std::string name, ApplyFn apply, DivergenceFn divergence)
    : name_(std::move(name)), apply_(std::move(apply)), divergence_(std::move(divergence))
{
    if (!apply_)
        throw ConfigError("denoiser '" + name_ + "' has no evaluation function");
}

Image Denoiser::operator()(const Image& y) const
{
    Image out = apply_(y);
    if (!out.same_shape(y))
        throw ConfigError("denoiser '" + name_ + "' changed the image dimensions");
    return out;
}

double Denoiser::analytic_divergence(const Image& y) const
{
    if (!divergence_)
        throw ConfigError("denoiser '" + name_ + "' has no analytic divergence");
    return divergence_(y);
}

ConvKernel::ConvKernel(std::size_t n, std::vector<double> values) : size(n), taps(std::move(values))
{
    if (size % 2 == 0)
        throw ConfigError("kernel size must be odd");
    if (taps.size() != size * size)
        throw ConfigError("kernel tap count does not match size");
    for (double t : taps)
        if (!std::isfinite(t))
            throw ConfigError("kernel taps must be finite");
}

ConvKernel ConvKernel::box(std::size_t n)
{
    return ConvKernel(n, std::vector<double>(n * n, 1.0 / static_cast<double>(n * n)));
}

ConvKernel ConvKernel::gaussian(std::size_t n, double sigma)
{
    if (!(sigma > 0.0))
        throw ConfigError("gaussian kernel sigma must be > 0");
    std::vector<double> taps(n * n);
    const double half = static_cast<double>(n / 2);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double dy = static_cast<double>(i) - half;
            const double dx = static_cast<double>(j) - half;
            taps[i * n + j] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            total += taps[i * n + j];
        }
    for (double& t : taps)
        t /= total;
    return ConvKernel(n, std::move(taps));
}

Image circular_convolve(const Image& y, const ConvKernel& kernel)
{
    if (kernel.size > y.width || kernel.size > y.height)
        throw ConfigError("kernel of size " + std::to_string(kernel.size)
                          + " is larger than the image");
    const std::size_t w = y.width;
    const std::size_t h = y.height;
    const std::size_t n = kernel.size;
    const std::size_t half = n / 2;
    Image out(w, h, 0.0);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t rr = (r + h + half - i) % h;
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t cc = (c + w + half - j) % w;
                    acc += kernel.taps[i * n + j] * y.data[rr * w + cc];
                }
            }
            out.data[r * w + c] = acc;
        }
    return out;
}

namespace denoisers {

Denoiser identity()
{
    return Denoiser(
        "identity", [](const Image& y) { return y; }, [](const Image&) { return 1.0; });
}

Denoiser constant(double value)
{
    if (!std::isfinite(value))
        throw ConfigError("constant denoiser value must be finite");
    return Denoiser(
        "constant", [value](const Image& y) { return Image(y.width, y.height, value); },
        [](const Image&) { return 0.0; });
}

Denoiser conv_filter(ConvKernel kernel)
{
    const double center = kernel.center();
    return Denoiser(
        "conv" + std::to_string(kernel.size),
        [k = std::move(kernel)](const Image& y) { return circular_convolve(y, k); },
        [center](const Image&) { return center; });
}

Denoiser soft_threshold(double tau)
{
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw ConfigError("soft threshold tau must be finite and >= 0");
    return Denoiser(
        "soft_threshold",
        [tau](const Image& y) {
            Image out = y;
            for (double& v : out.data) {
                const double mag = std::fabs(v) - tau;
                v = mag > 0.0 ? std::copysign(mag, v) : 0.0;
            }
            return out;
        },
        [tau](const Image& y) {
            std::size_t active = 0;
            for (double v : y.data)
                if (std::fabs(v) > tau)
                    ++active;
            return static_cast<double>(active) / static_cast<double>(y.size());
        });
}

} // namespace denoisers

} // namespace rden
