#pragma once

#include "rden/image.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rden {

/// Uniform evaluation interface for reference filters and trained networks.
///
/// `apply` must be deterministic and dimension-preserving. When present,
/// `divergence` returns (1/N) sum_i dh_i/dy_i at the given input exactly.
class Denoiser {
public:
    using ApplyFn = std::function<Image(const Image&)>;
    using DivergenceFn = std::function<double(const Image&)>;

    Denoiser(std::string name, ApplyFn apply, DivergenceFn divergence = {});

    Image operator()(const Image& y) const;

    const std::string& name() const noexcept { return name_; }
    bool has_analytic_divergence() const noexcept { return static_cast<bool>(divergence_); }
    /// Throws ConfigError when the denoiser has no closed-form divergence.
    double analytic_divergence(const Image& y) const;

private:
    std::string name_;
    ApplyFn apply_;
    DivergenceFn divergence_;
};

/// Odd-sized square kernel, taps row-major.
struct ConvKernel {
    std::size_t size = 1;
    std::vector<double> taps{1.0};

    ConvKernel() = default;
    ConvKernel(std::size_t size, std::vector<double> taps);

    double center() const { return taps[(size / 2) * size + size / 2]; }

    static ConvKernel box(std::size_t size);
    /// Sampled Gaussian truncated to `size`, normalized to unit sum.
    static ConvKernel gaussian(std::size_t size, double sigma);
};

namespace denoisers {

Denoiser identity();
Denoiser constant(double value);
/// Circular (wrap-around) convolution; divergence is the center tap.
Denoiser conv_filter(ConvKernel kernel);
/// Pixel-domain soft threshold sign(y) max(|y| - tau, 0).
Denoiser soft_threshold(double tau);

} // namespace denoisers

/// Circular convolution of `y` with `kernel`. Throws ConfigError when the
/// kernel does not fit inside the image.
Image circular_convolve(const Image& y, const ConvKernel& kernel);

} // namespace rden
