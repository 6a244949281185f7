#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rden {

/// Single-channel image on the unit interval, row-major.
/// Values are not clamped: noisy observations may leave [0,1].
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> data;

    Image() = default;
    Image(std::size_t w, std::size_t h, double fill = 0.0);
    Image(std::size_t w, std::size_t h, std::vector<double> values);

    std::size_t size() const noexcept { return data.size(); }
    double& at(std::size_t row, std::size_t col) { return data[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return data[row * width + col]; }

    std::span<double> pixels() noexcept { return data; }
    std::span<const double> pixels() const noexcept { return data; }

    bool same_shape(const Image& other) const noexcept
    {
        return width == other.width && height == other.height;
    }

    bool operator==(const Image&) const = default;
};

/// Throws ConfigError naming `what` when the shapes differ.
void require_same_shape(const Image& a, const Image& b, const std::string& what);

/// Throws ConfigError when any pixel is NaN or infinite.
void require_finite(const Image& img, const std::string& what);

double sum(std::span<const double> values);
double squared_distance(const Image& a, const Image& b);

/// Order-deterministic pairwise summation. Blocks of 8 are summed
/// sequentially, larger ranges are split at the midpoint.
double pairwise_sum(std::span<const double> values);

struct MeanAndError {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error of the mean (n - 1 denominator).
MeanAndError mean_and_stderr(std::span<const double> values);

} // namespace rden
