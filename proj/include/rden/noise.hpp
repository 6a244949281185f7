#pragma once

#include "rden/image.hpp"
#include "rden/random.hpp"

#include <string>
#include <variant>

namespace rden {

namespace noise {

struct Gaussian {
    double sigma = 0.0;
};

/// y1 = x + n1, y2 = y1 + z with n1 ~ N(0, sigma1^2), z ~ N(0, sigma_z^2).
struct GaussianPair {
    double sigma1 = 0.0;
    double sigma_z = 0.0;
};

struct GaussianIndependentPair {
    double sigma = 0.0;
};

/// y = Poisson(peak * x) / peak.
struct Poisson {
    double peak = 1.0;
};

struct PoissonPair {
    double peak = 1.0;
};

} // namespace noise

using NoiseSpec = std::variant<noise::Gaussian, noise::GaussianPair, noise::GaussianIndependentPair,
                               noise::Poisson, noise::PoissonPair>;

/// Throws ConfigError on a negative sigma or non-positive peak.
void validate(const NoiseSpec& spec);

bool is_gaussian(const NoiseSpec& spec) noexcept;
bool is_pair(const NoiseSpec& spec) noexcept;

/// Short tag: gaussian, gaussian_pair, gaussian_independent_pair, poisson, poisson_pair.
std::string kind_name(const NoiseSpec& spec);
/// Parameters as "key=value" pairs separated by ';', 9 significant digits.
std::string describe(const NoiseSpec& spec);

/// Single-observation model matching the marginal of the network input
/// member of a pair (y2 for correlated pairs, y1 otherwise).
NoiseSpec input_marginal(const NoiseSpec& spec);

struct ImagePair {
    Image first;
    Image second;
};

struct PoissonTriple {
    Image y1;
    Image y2;
    Image z; ///< (y1 + y2) / 2
};

/// y = x + n, n i.i.d. N(0, sigma^2). No clamping.
Image awgn_corrupt(const Image& x, double sigma, SeededStream& rng);

/// Draws y1 exactly as awgn_corrupt(x, sigma1, rng) would, then adds
/// independent z to form y2.
ImagePair awgn_pair_correlated(const Image& x, double sigma1, double sigma_z, SeededStream& rng);

/// Two independent corruptions of x with equal variance.
ImagePair awgn_pair_independent(const Image& x, double sigma, SeededStream& rng);

/// Each pixel k/peak with k ~ Poisson(peak * x_i). Rejects negative pixels.
Image poisson_corrupt(const Image& x, double peak, SeededStream& rng);

PoissonTriple poisson_pair(const Image& x, double peak, SeededStream& rng);

/// Corrupts according to `spec`; pair specs return both members, single
/// specs leave `second` empty.
ImagePair corrupt(const Image& x, const NoiseSpec& spec, SeededStream& rng);

} // namespace rden
