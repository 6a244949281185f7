#include "rden/image.hpp"

#include "rden/error.hpp"

#include <cmath>

namespace rden {

Image::Image(std::size_t w, std::size_t h, double fill) : width(w), height(h), data(w * h, fill)
{
    if (w == 0 || h == 0)
        throw ConfigError("image dimensions must be at least 1x1");
}

Image::Image(std::size_t w, std::size_t h, std::vector<double> values)
    : width(w), height(h), data(std::move(values))
{
    if (w == 0 || h == 0)
        throw ConfigError("image dimensions must be at least 1x1");
    if (data.size() != w * h)
        throw ConfigError("image data length " + std::to_string(data.size())
                          + " does not match " + std::to_string(w) + "x" + std::to_string(h));
}

void require_same_shape(const Image& a, const Image& b, const std::string& what)
{
    if (!a.same_shape(b))
        throw ConfigError(what + ": dimension mismatch (" + std::to_string(a.width) + "x"
                          + std::to_string(a.height) + " vs " + std::to_string(b.width) + "x"
                          + std::to_string(b.height) + ")");
}

void require_finite(const Image& img, const std::string& what)
{
    for (double v : img.data)
        if (!std::isfinite(v))
            throw ConfigError(what + ": non-finite pixel value");
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double sum(std::span<const double> values)
{
    return pairwise_sum(values);
}

double squared_distance(const Image& a, const Image& b)
{
    require_same_shape(a, b, "squared_distance");
    std::vector<double> sq(a.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sq[i] = d * d;
    }
    return pairwise_sum(sq);
}

MeanAndError mean_and_stderr(std::span<const double> values)
{
    MeanAndError out;
    const std::size_t n = values.size();
    if (n == 0)
        return out;
    out.mean = pairwise_sum(values) / static_cast<double>(n);
    if (n < 2)
        return out;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - out.mean;
        dev[i] = d * d;
    }
    const double variance = pairwise_sum(dev) / static_cast<double>(n - 1);
    out.std_error = std::sqrt(variance / static_cast<double>(n));
    return out;
}

} // namespace rden
