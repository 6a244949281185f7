#include "rden/estimators.hpp"

#include "rden/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace rden {

namespace {

double per_pixel(double total, const Image& img)
{
    return total / static_cast<double>(img.size());
}

void require_epsilon(double epsilon)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ConfigError("perturbation epsilon must be finite and > 0");
}

DivergenceEstimate mc_divergence_at(const Denoiser& h, const Image& y, const Image& h_y,
                                    double epsilon, SeededStream& rng, std::size_t draws)
{
    require_epsilon(epsilon);
    if (draws < 1)
        throw ConfigError("mc_divergence needs at least one draw");
    const std::size_t n = y.size();
    std::vector<double> probe(n);
    std::vector<double> products(n);
    std::vector<double> per_draw(draws);
    Image shifted = y;
    for (std::size_t d = 0; d < draws; ++d) {
        for (std::size_t i = 0; i < n; ++i) {
            probe[i] = rng.normal();
            shifted.data[i] = y.data[i] + epsilon * probe[i];
        }
        const Image h_shifted = h(shifted);
        for (std::size_t i = 0; i < n; ++i)
            products[i] = probe[i] * (h_shifted.data[i] - h_y.data[i]);
        per_draw[d] = pairwise_sum(products) / (epsilon * static_cast<double>(n));
    }
    DivergenceEstimate out;
    out.value = pairwise_sum(per_draw) / static_cast<double>(draws);
    out.method = DivergenceEstimate::Method::MonteCarlo;
    out.epsilon = epsilon;
    out.draws = draws;
    return out;
}

void require_sigma(double sigma, const char* name)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw ConfigError(std::string(name) + " must be finite and >= 0");
}

void require_divergence(const DivergenceEstimate& div)
{
    if (!std::isfinite(div.value))
        throw NumericalError("divergence estimate is not finite");
}

} // namespace

RiskValue mse(const Image& x, const Image& xhat)
{
    require_same_shape(x, xhat, "mse");
    return RiskValue::from_terms(per_pixel(squared_distance(x, xhat), x), 0.0, 0.0);
}

RiskValue n2n_loss(const Image& z, const Image& h_y)
{
    return mse(z, h_y);
}

RiskValue sure_analytic(const Image& y, const Image& h_y, const DivergenceEstimate& div,
                        double sigma)
{
    require_same_shape(y, h_y, "sure");
    require_sigma(sigma, "sigma");
    require_divergence(div);
    const double var = sigma * sigma;
    return RiskValue::from_terms(per_pixel(squared_distance(y, h_y), y), -var,
                                 2.0 * var * div.value);
}

DivergenceEstimate mc_divergence(const Denoiser& h, const Image& y, double epsilon,
                                 SeededStream& rng, std::size_t draws)
{
    require_epsilon(epsilon);
    return mc_divergence_at(h, y, h(y), epsilon, rng, draws);
}

RiskValue mc_sure_batch(const Denoiser& h, std::span<const Image> batch, double sigma,
                        double epsilon, SeededStream& rng)
{
    if (batch.empty())
        throw ConfigError("mc_sure_batch: empty batch");
    std::vector<double> fid, cst, dvg;
    for (const Image& y : batch) {
        require_same_shape(batch.front(), y, "mc_sure_batch");
        const Image h_y = h(y);
        const DivergenceEstimate div = mc_divergence_at(h, y, h_y, epsilon, rng, 1);
        const RiskValue r = sure_analytic(y, h_y, div, sigma);
        fid.push_back(r.fidelity_term);
        cst.push_back(r.constant_term);
        dvg.push_back(r.divergence_term);
    }
    const double m = static_cast<double>(batch.size());
    return RiskValue::from_terms(pairwise_sum(fid) / m, pairwise_sum(cst) / m,
                                 pairwise_sum(dvg) / m);
}

RiskValue esure(const Image& y1, const Image& y2, const Image& h_y2,
                const DivergenceEstimate& div_y2, double sigma1)
{
    require_same_shape(y1, y2, "esure");
    require_same_shape(y1, h_y2, "esure");
    require_sigma(sigma1, "sigma1");
    require_divergence(div_y2);
    const double var = sigma1 * sigma1;
    return RiskValue::from_terms(per_pixel(squared_distance(y1, h_y2), y1), -var,
                                 2.0 * var * div_y2.value);
}

RiskValue esure_mc(const Image& y1, const Image& y2, const Denoiser& h, double sigma1,
                   double epsilon, SeededStream& rng)
{
    require_same_shape(y1, y2, "esure_mc");
    const Image h_y2 = h(y2);
    const DivergenceEstimate div = mc_divergence_at(h, y2, h_y2, epsilon, rng, 1);
    return esure(y1, y2, h_y2, div, sigma1);
}

RiskValue epure_pair(const Image& y1, const Image& y2, const Denoiser& h, double target_peak,
                     double epsilon, SeededStream& rng, ProbeKind probe)
{
    require_same_shape(y1, y2, "epure_pair");
    if (!(target_peak > 0.0) || !std::isfinite(target_peak))
        throw ConfigError("epure_pair: peak scaling T must be finite and > 0");
    require_epsilon(epsilon);

    const std::size_t n = y1.size();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i)
        z[i] = (y1.data[i] + y2.data[i]) / 2.0;

    const Image h_y1 = h(y1);
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = h_y1.data[i] - z[i];
        residual[i] = d * d;
    }

    std::vector<double> perturbation(n);
    Image shifted = y1;
    for (std::size_t i = 0; i < n; ++i) {
        perturbation[i] = probe == ProbeKind::Rademacher ? rng.rademacher() : rng.normal();
        shifted.data[i] = y1.data[i] + epsilon * perturbation[i];
    }
    const Image h_shifted = h(shifted);
    std::vector<double> products(n);
    for (std::size_t i = 0; i < n; ++i)
        products[i] = perturbation[i] * z[i] * (h_shifted.data[i] - h_y1.data[i]);

    const double count = static_cast<double>(n);
    const double fidelity = pairwise_sum(residual) / count;
    const double constant = -pairwise_sum(z) / (target_peak * count);
    const double divergence = 2.0 * pairwise_sum(products) / (epsilon * target_peak * count);
    return RiskValue::from_terms(fidelity, constant, divergence);
}

RiskValue pure_single(const Image& y, const Denoiser& h, double peak, double epsilon,
                      SeededStream& rng, ProbeKind probe)
{
    return epure_pair(y, y, h, peak, epsilon, rng, probe);
}

std::string estimator_name(Estimator e)
{
    switch (e) {
    case Estimator::Sure: return "sure";
    case Estimator::McSure: return "mc-sure";
    case Estimator::Esure: return "esure";
    case Estimator::EsureMc: return "esure-mc";
    case Estimator::Pure: return "pure";
    case Estimator::Epure: return "epure";
    }
    return "unknown";
}

Estimator parse_estimator(const std::string& name)
{
    for (Estimator e : {Estimator::Sure, Estimator::McSure, Estimator::Esure, Estimator::EsureMc,
                        Estimator::Pure, Estimator::Epure})
        if (estimator_name(e) == name)
            return e;
    throw ConfigError("unknown estimator '" + name + "'");
}

bool estimator_accepts(Estimator e, const NoiseSpec& spec) noexcept
{
    switch (e) {
    case Estimator::Sure:
    case Estimator::McSure: return std::holds_alternative<noise::Gaussian>(spec);
    case Estimator::Esure:
    case Estimator::EsureMc: return std::holds_alternative<noise::GaussianPair>(spec);
    case Estimator::Pure: return std::holds_alternative<noise::Poisson>(spec);
    case Estimator::Epure: return std::holds_alternative<noise::PoissonPair>(spec);
    }
    return false;
}

StudyReport unbiasedness_study(const EstimatorSpec& estimator, const Denoiser& h, const Image& x,
                               const NoiseSpec& noise, std::size_t draws, SeededStream& rng)
{
    if (draws < kMinStudyDraws)
        throw ConfigError("unbiasedness study needs at least " + std::to_string(kMinStudyDraws)
                          + " draws, got " + std::to_string(draws));
    validate(noise);
    if (!estimator_accepts(estimator.kind, noise))
        throw ConfigError("estimator " + estimator_name(estimator.kind)
                          + " does not accept noise model " + kind_name(noise));
    if ((estimator.kind == Estimator::Sure || estimator.kind == Estimator::Esure)
        && !h.has_analytic_divergence())
        throw ConfigError("estimator " + estimator_name(estimator.kind) + " needs denoiser '"
                          + h.name() + "' to provide an analytic divergence");
    require_epsilon(estimator.epsilon);

    std::vector<double> est(draws), truth(draws);
    for (std::size_t d = 0; d < draws; ++d) {
        SeededStream local = rng.split(d);
        RiskValue r;
        Image estimate;
        switch (estimator.kind) {
        case Estimator::Sure: {
            const auto& g = std::get<noise::Gaussian>(noise);
            const Image y = awgn_corrupt(x, g.sigma, local);
            estimate = h(y);
            r = sure_analytic(y, estimate, DivergenceEstimate::analytic(h.analytic_divergence(y)),
                              g.sigma);
            break;
        }
        case Estimator::McSure: {
            const auto& g = std::get<noise::Gaussian>(noise);
            const Image y = awgn_corrupt(x, g.sigma, local);
            estimate = h(y);
            r = sure_analytic(y, estimate,
                              mc_divergence_at(h, y, estimate, estimator.epsilon, local, 1),
                              g.sigma);
            break;
        }
        case Estimator::Esure:
        case Estimator::EsureMc: {
            const auto& g = std::get<noise::GaussianPair>(noise);
            const ImagePair pair = awgn_pair_correlated(x, g.sigma1, g.sigma_z, local);
            estimate = h(pair.second);
            const DivergenceEstimate div =
                estimator.kind == Estimator::Esure
                    ? DivergenceEstimate::analytic(h.analytic_divergence(pair.second))
                    : mc_divergence_at(h, pair.second, estimate, estimator.epsilon, local, 1);
            r = esure(pair.first, pair.second, estimate, div, g.sigma1);
            break;
        }
        case Estimator::Pure: {
            const auto& p = std::get<noise::Poisson>(noise);
            const Image y = poisson_corrupt(x, p.peak, local);
            estimate = h(y);
            r = pure_single(y, h, p.peak, estimator.epsilon, local, estimator.probe);
            break;
        }
        case Estimator::Epure: {
            const auto& p = std::get<noise::PoissonPair>(noise);
            const PoissonTriple t = poisson_pair(x, p.peak, local);
            estimate = h(t.y1);
            r = epure_pair(t.y1, t.y2, h, averaged_pair_peak(p.peak), estimator.epsilon, local,
                           estimator.probe);
            break;
        }
        }
        if (!std::isfinite(r.total))
            throw NumericalError("non-finite estimator value at draw " + std::to_string(d));
        est[d] = r.total;
        truth[d] = mse(x, estimate).total;
    }

    const MeanAndError e = mean_and_stderr(est);
    const MeanAndError t = mean_and_stderr(truth);
    StudyReport report;
    report.estimator_name = estimator_name(estimator.kind);
    report.denoiser_name = h.name();
    report.noise_kind = kind_name(noise);
    report.noise_params = describe(noise);
    report.draws = draws;
    report.estimator_mean = e.mean;
    report.estimator_stderr = e.std_error;
    report.true_mse_mean = t.mean;
    report.true_mse_stderr = t.std_error;
    const double combined = std::hypot(e.std_error, t.std_error);
    const double diff = e.mean - t.mean;
    if (combined > 0.0)
        report.bias_in_stderr_units = diff / combined;
    else
        report.bias_in_stderr_units =
            diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    return report;
}

std::string study_csv_header()
{
    return "estimator,denoiser,noise,noise_params,draws,estimator_mean,estimator_stderr,"
           "true_mse_mean,true_mse_stderr,bias_in_stderr_units";
}

std::string study_csv_row(const StudyReport& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%zu,%.9g,%.9g,%.9g,%.9g,%.9g",
                  r.estimator_name.c_str(), r.denoiser_name.c_str(), r.noise_kind.c_str(),
                  r.noise_params.c_str(), r.draws, r.estimator_mean, r.estimator_stderr,
                  r.true_mse_mean, r.true_mse_stderr, r.bias_in_stderr_units);
    return buf;
}

} // namespace rden
