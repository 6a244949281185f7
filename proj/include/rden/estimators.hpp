#pragma once

#include "rden/denoisers.hpp"
#include "rden/image.hpp"
#include "rden/noise.hpp"
#include "rden/random.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace rden {

/// Per-pixel risk with its additive breakdown.
/// total == fidelity_term + constant_term + divergence_term.
struct RiskValue {
    double total = 0.0;
    double fidelity_term = 0.0;
    double constant_term = 0.0;
    double divergence_term = 0.0;

    static RiskValue from_terms(double fidelity, double constant, double divergence) noexcept
    {
        return {fidelity + constant + divergence, fidelity, constant, divergence};
    }
};

struct DivergenceEstimate {
    enum class Method { Analytic, MonteCarlo };

    double value = 0.0; ///< (1/N) sum_i dh_i/dy_i
    Method method = Method::Analytic;
    double epsilon = 0.0;
    std::size_t draws = 0;

    static DivergenceEstimate analytic(double value) noexcept
    {
        return {value, Method::Analytic, 0.0, 0};
    }
};

/// Perturbation used by the Poisson estimators' divergence term.
enum class ProbeKind { Rademacher, Gaussian };

inline constexpr double kDefaultEpsilon = 1e-3;

RiskValue mse(const Image& x, const Image& xhat);

/// ||z - h(y)||^2 / N; the same functional as mse() with a noisy target.
RiskValue n2n_loss(const Image& z, const Image& h_y);

/// ||y - h(y)||^2/N - sigma^2 + 2 sigma^2 div.
RiskValue sure_analytic(const Image& y, const Image& h_y, const DivergenceEstimate& div,
                        double sigma);

/// Average over `draws` Gaussian probes b of b^T (h(y + eps b) - h(y)) / (eps N).
DivergenceEstimate mc_divergence(const Denoiser& h, const Image& y, double epsilon,
                                 SeededStream& rng, std::size_t draws = 1);

/// Batch MC-SURE: one fresh probe per image, averaged per pixel and per image.
RiskValue mc_sure_batch(const Denoiser& h, std::span<const Image> batch, double sigma,
                        double epsilon, SeededStream& rng);

/// eSURE for y2 = y1 + z: ||y1 - h(y2)||^2/N - sigma1^2 + 2 sigma1^2 div_y2.
/// The divergence is taken with respect to y2.
RiskValue esure(const Image& y1, const Image& y2, const Image& h_y2,
                const DivergenceEstimate& div_y2, double sigma1);

/// eSURE with a single-probe Monte-Carlo divergence at y2.
RiskValue esure_mc(const Image& y1, const Image& y2, const Denoiser& h, double sigma1,
                   double epsilon, SeededStream& rng);

/// ePURE for a Poisson pair, h applied to y1, target z = (y1 + y2)/2:
///
///   (1/N) [ ||h(y1) - z||^2 - (1/T) sum z + 2/(eps T) (n . z)^T (h(y1 + eps n) - h(y1)) ]
///
/// `target_peak` is the Poisson scaling T of z itself. When z averages two
/// independent observations at peak T_obs, T z ~ Poisson(2 T_obs x) and the
/// caller passes averaged_pair_peak(T_obs). With y2 == y1 the target is the
/// observation and T_obs is passed directly (see pure_single).
RiskValue epure_pair(const Image& y1, const Image& y2, const Denoiser& h, double target_peak,
                     double epsilon, SeededStream& rng, ProbeKind probe = ProbeKind::Rademacher);

/// PURE for a single observation: epure_pair(y, y, ...).
RiskValue pure_single(const Image& y, const Denoiser& h, double peak, double epsilon,
                      SeededStream& rng, ProbeKind probe = ProbeKind::Rademacher);

/// Peak scaling of the average of two independent observations at `peak`.
constexpr double averaged_pair_peak(double peak) noexcept { return 2.0 * peak; }

// ---------------------------------------------------------------------------
// Monte-Carlo unbiasedness studies

enum class Estimator { Sure, McSure, Esure, EsureMc, Pure, Epure };

std::string estimator_name(Estimator e);
/// Accepts sure, mc-sure, esure, esure-mc, pure, epure.
Estimator parse_estimator(const std::string& name);
/// True when `spec` is the observation model `e` assumes.
bool estimator_accepts(Estimator e, const NoiseSpec& spec) noexcept;

struct EstimatorSpec {
    Estimator kind = Estimator::Sure;
    double epsilon = kDefaultEpsilon;
    ProbeKind probe = ProbeKind::Rademacher;
};

struct StudyReport {
    std::string estimator_name;
    std::string denoiser_name;
    std::string noise_kind;
    std::string noise_params;
    std::size_t draws = 0;
    double estimator_mean = 0.0;
    double estimator_stderr = 0.0;
    double true_mse_mean = 0.0;
    double true_mse_stderr = 0.0;
    /// (estimator_mean - true_mse_mean) / sqrt(estimator_stderr^2 + true_mse_stderr^2)
    double bias_in_stderr_units = 0.0;
};

inline constexpr std::size_t kMinStudyDraws = 100;

/// Runs `draws` corruption + estimation rounds against the known clean
/// image `x`. Draw d uses the sub-stream rng.split(d), so results do not
/// depend on evaluation order.
StudyReport unbiasedness_study(const EstimatorSpec& estimator, const Denoiser& h, const Image& x,
                               const NoiseSpec& noise, std::size_t draws, SeededStream& rng);

std::string study_csv_header();
std::string study_csv_row(const StudyReport& report);

} // namespace rden
