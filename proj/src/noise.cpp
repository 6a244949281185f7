#include "rden/noise.hpp"

#include "rden/error.hpp"

#include <cmath>
#include <cstdio>

namespace rden {

namespace {

void require_sigma(double sigma, const char* name)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw ConfigError(std::string(name) + " must be finite and >= 0");
}

void require_peak(double peak)
{
    if (!(peak > 0.0) || !std::isfinite(peak))
        throw ConfigError("peak scaling T must be finite and > 0");
}

std::string fmt9(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

void validate(const NoiseSpec& spec)
{
    std::visit(overloaded{
                   [](const noise::Gaussian& g) { require_sigma(g.sigma, "sigma"); },
                   [](const noise::GaussianPair& g) {
                       require_sigma(g.sigma1, "sigma1");
                       require_sigma(g.sigma_z, "sigma_z");
                   },
                   [](const noise::GaussianIndependentPair& g) { require_sigma(g.sigma, "sigma"); },
                   [](const noise::Poisson& p) { require_peak(p.peak); },
                   [](const noise::PoissonPair& p) { require_peak(p.peak); },
               },
               spec);
}

bool is_gaussian(const NoiseSpec& spec) noexcept
{
    return std::holds_alternative<noise::Gaussian>(spec)
           || std::holds_alternative<noise::GaussianPair>(spec)
           || std::holds_alternative<noise::GaussianIndependentPair>(spec);
}

bool is_pair(const NoiseSpec& spec) noexcept
{
    return !std::holds_alternative<noise::Gaussian>(spec)
           && !std::holds_alternative<noise::Poisson>(spec);
}

std::string kind_name(const NoiseSpec& spec)
{
    return std::visit(overloaded{
                          [](const noise::Gaussian&) { return std::string("gaussian"); },
                          [](const noise::GaussianPair&) { return std::string("gaussian_pair"); },
                          [](const noise::GaussianIndependentPair&) {
                              return std::string("gaussian_independent_pair");
                          },
                          [](const noise::Poisson&) { return std::string("poisson"); },
                          [](const noise::PoissonPair&) { return std::string("poisson_pair"); },
                      },
                      spec);
}

std::string describe(const NoiseSpec& spec)
{
    return std::visit(
        overloaded{
            [](const noise::Gaussian& g) { return "sigma=" + fmt9(g.sigma); },
            [](const noise::GaussianPair& g) {
                return "sigma1=" + fmt9(g.sigma1) + ";sigma_z=" + fmt9(g.sigma_z);
            },
            [](const noise::GaussianIndependentPair& g) { return "sigma=" + fmt9(g.sigma); },
            [](const noise::Poisson& p) { return "peak=" + fmt9(p.peak); },
            [](const noise::PoissonPair& p) { return "peak=" + fmt9(p.peak); },
        },
        spec);
}

NoiseSpec input_marginal(const NoiseSpec& spec)
{
    return std::visit(overloaded{
                          [](const noise::Gaussian& g) -> NoiseSpec { return g; },
                          [](const noise::GaussianPair& g) -> NoiseSpec {
                              return noise::Gaussian{std::sqrt(g.sigma1 * g.sigma1
                                                               + g.sigma_z * g.sigma_z)};
                          },
                          [](const noise::GaussianIndependentPair& g) -> NoiseSpec {
                              return noise::Gaussian{g.sigma};
                          },
                          [](const noise::Poisson& p) -> NoiseSpec { return p; },
                          [](const noise::PoissonPair& p) -> NoiseSpec {
                              return noise::Poisson{p.peak};
                          },
                      },
                      spec);
}

Image awgn_corrupt(const Image& x, double sigma, SeededStream& rng)
{
    require_sigma(sigma, "sigma");
    require_finite(x, "awgn_corrupt");
    Image y = x;
    for (double& v : y.data)
        v += sigma * rng.normal();
    return y;
}

ImagePair awgn_pair_correlated(const Image& x, double sigma1, double sigma_z, SeededStream& rng)
{
    require_sigma(sigma_z, "sigma_z");
    ImagePair out;
    out.first = awgn_corrupt(x, sigma1, rng);
    out.second = out.first;
    for (double& v : out.second.data)
        v += sigma_z * rng.normal();
    return out;
}

ImagePair awgn_pair_independent(const Image& x, double sigma, SeededStream& rng)
{
    ImagePair out;
    out.first = awgn_corrupt(x, sigma, rng);
    out.second = awgn_corrupt(x, sigma, rng);
    return out;
}

Image poisson_corrupt(const Image& x, double peak, SeededStream& rng)
{
    require_peak(peak);
    require_finite(x, "poisson_corrupt");
    Image y = x;
    for (double& v : y.data) {
        if (v < 0.0)
            throw ConfigError("poisson_corrupt: negative input pixel");
        v = static_cast<double>(rng.poisson(peak * v)) / peak;
    }
    return y;
}

PoissonTriple poisson_pair(const Image& x, double peak, SeededStream& rng)
{
    PoissonTriple out;
    out.y1 = poisson_corrupt(x, peak, rng);
    out.y2 = poisson_corrupt(x, peak, rng);
    out.z = out.y1;
    for (std::size_t i = 0; i < out.z.size(); ++i)
        out.z.data[i] = (out.y1.data[i] + out.y2.data[i]) / 2.0;
    return out;
}

ImagePair corrupt(const Image& x, const NoiseSpec& spec, SeededStream& rng)
{
    validate(spec);
    return std::visit(overloaded{
                          [&](const noise::Gaussian& g) {
                              return ImagePair{awgn_corrupt(x, g.sigma, rng), {}};
                          },
                          [&](const noise::GaussianPair& g) {
                              return awgn_pair_correlated(x, g.sigma1, g.sigma_z, rng);
                          },
                          [&](const noise::GaussianIndependentPair& g) {
                              return awgn_pair_independent(x, g.sigma, rng);
                          },
                          [&](const noise::Poisson& p) {
                              return ImagePair{poisson_corrupt(x, p.peak, rng), {}};
                          },
                          [&](const noise::PoissonPair& p) {
                              auto t = poisson_pair(x, p.peak, rng);
                              return ImagePair{std::move(t.y1), std::move(t.y2)};
                          },
                      },
                      spec);
}

} // namespace rden
