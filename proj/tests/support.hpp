#pragma once

// Helpers shared by the unit and acceptance tests.

#include "rden/image.hpp"
#include "rden/random.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace rden::test {

inline Image random_image(std::size_t w, std::size_t h, std::uint64_t seed, double lo = 0.0,
                          double hi = 1.0)
{
    SeededStream rng(seed, 0x7e57);
    Image img(w, h);
    for (double& v : img.data)
        v = lo + (hi - lo) * rng.uniform();
    return img;
}

inline double naive_sum(const std::vector<double>& v)
{
    long double s = 0;
    for (double x : v)
        s += x;
    return static_cast<double>(s);
}

inline double naive_mean(const std::vector<double>& v)
{
    return naive_sum(v) / static_cast<double>(v.size());
}

inline double naive_variance(const std::vector<double>& v)
{
    const double m = naive_mean(v);
    long double s = 0;
    for (double x : v)
        s += (x - m) * (x - m);
    return static_cast<double>(s / (v.size() - 1));
}

inline double rel_diff(double a, double b)
{
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

/// Fresh scratch directory under the current working directory.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::current_path() / "scratch" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace rden::test
