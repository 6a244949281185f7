#include "rden/training.hpp"

#include "rden/error.hpp"
#include "rden/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace rden {

namespace {

void require_pixels(const Image& a, const Image& b, const char* what)
{
    if (b.size() == 0)
        throw ConfigError(std::string(what) + " loss needs a reference image for every sample");
    require_same_shape(a, b, what);
}

template <class Fn>
void for_each_param(NetParams& params, const ParamGradients& grads, Fn&& fn)
{
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        ConvLayer& p = params.layers[l];
        const ConvLayer& g = grads[l];
        for (std::size_t i = 0; i < p.weights.size(); ++i)
            fn(p.weights[i], g.weights[i], l, false, i);
        for (std::size_t i = 0; i < p.bias.size(); ++i)
            fn(p.bias[i], g.bias[i], l, true, i);
    }
}

void require_finite_grads(const NetParams& params, const ParamGradients& grads)
{
    if (grads.size() != params.layers.size())
        throw ConfigError("gradient layer count does not match the parameters");
    for (std::size_t l = 0; l < grads.size(); ++l) {
        if (grads[l].weights.size() != params.layers[l].weights.size()
            || grads[l].bias.size() != params.layers[l].bias.size())
            throw ConfigError("gradient shape does not match layer " + std::to_string(l));
        for (double v : grads[l].weights)
            if (!std::isfinite(v))
                throw NumericalError("non-finite weight gradient in layer " + std::to_string(l)
                                     + "; step rejected");
        for (double v : grads[l].bias)
            if (!std::isfinite(v))
                throw NumericalError("non-finite bias gradient in layer " + std::to_string(l)
                                     + "; step rejected");
    }
}

} // namespace

std::string loss_name(LossKind kind)
{
    switch (kind) {
    case LossKind::Mse: return "mse";
    case LossKind::N2n: return "n2n";
    case LossKind::McSure: return "sure";
    case LossKind::Esure: return "esure";
    case LossKind::Epure: return "epure";
    }
    return "unknown";
}

LossKind parse_loss(const std::string& name)
{
    if (name == "mc-sure")
        return LossKind::McSure;
    for (LossKind k : {LossKind::Mse, LossKind::N2n, LossKind::McSure, LossKind::Esure,
                       LossKind::Epure})
        if (loss_name(k) == name)
            return k;
    throw ConfigError("unknown loss '" + name + "'");
}

bool loss_accepts(LossKind kind, const NoiseSpec& noise) noexcept
{
    switch (kind) {
    case LossKind::Mse:
        return std::holds_alternative<noise::Gaussian>(noise)
               || std::holds_alternative<noise::Poisson>(noise);
    case LossKind::N2n:
        return std::holds_alternative<noise::GaussianIndependentPair>(noise)
               || std::holds_alternative<noise::PoissonPair>(noise);
    case LossKind::McSure: return std::holds_alternative<noise::Gaussian>(noise);
    case LossKind::Esure: return std::holds_alternative<noise::GaussianPair>(noise);
    case LossKind::Epure: return std::holds_alternative<noise::PoissonPair>(noise);
    }
    return false;
}

LossParams loss_params_for(LossKind kind, const NoiseSpec& noise, double epsilon, ProbeKind probe)
{
    validate(noise);
    if (!loss_accepts(kind, noise))
        throw ConfigError("loss " + loss_name(kind) + " cannot train on noise model "
                          + kind_name(noise));
    LossParams p;
    p.kind = kind;
    p.epsilon = epsilon;
    p.probe = probe;
    if (const auto* g = std::get_if<noise::Gaussian>(&noise))
        p.sigma = g->sigma;
    else if (const auto* gp = std::get_if<noise::GaussianPair>(&noise))
        p.sigma = gp->sigma1;
    else if (const auto* pp = std::get_if<noise::PoissonPair>(&noise))
        p.peak = averaged_pair_peak(pp->peak);
    else if (const auto* ps = std::get_if<noise::Poisson>(&noise))
        p.peak = ps->peak;
    return p;
}

LossResult loss_and_grad(const NetParams& params, std::span<const TrainingSample> batch,
                         const LossParams& loss, SeededStream& rng)
{
    if (batch.empty())
        throw ConfigError("loss_and_grad: empty batch");
    if (loss.kind == LossKind::McSure || loss.kind == LossKind::Esure
        || loss.kind == LossKind::Epure) {
        if (!(loss.epsilon > 0.0))
            throw ConfigError("Monte-Carlo losses need epsilon > 0");
    }
    if (loss.kind == LossKind::Epure && !(loss.peak > 0.0))
        throw ConfigError("ePURE loss needs a positive peak scaling");

    LossResult result{{}, zeros_like(params)};
    std::vector<double> fid(batch.size()), cst(batch.size()), dvg(batch.size());

    for (std::size_t j = 0; j < batch.size(); ++j) {
        const TrainingSample& s = batch[j];
        const Image& y = s.input;
        const std::size_t n = y.size();
        const double count = static_cast<double>(n);
        const NetPass base(params, y);
        const Image& h = base.output();
        Image g_base(y.width, y.height, 0.0);

        switch (loss.kind) {
        case LossKind::Mse:
        case LossKind::N2n: {
            require_pixels(y, s.reference, loss_name(loss.kind).c_str());
            std::vector<double> sq(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = h.data[i] - s.reference.data[i];
                sq[i] = d * d;
                g_base.data[i] = 2.0 * d / count;
            }
            fid[j] = pairwise_sum(sq) / count;
            base.backward(g_base, result.grads);
            break;
        }
        case LossKind::McSure:
        case LossKind::Esure: {
            const Image& target = loss.kind == LossKind::McSure ? y : s.reference;
            if (loss.kind == LossKind::Esure)
                require_pixels(y, target, "esure");
            const double var = loss.sigma * loss.sigma;
            std::vector<double> probe(n);
            Image shifted = y;
            for (std::size_t i = 0; i < n; ++i) {
                probe[i] = rng.normal();
                shifted.data[i] = y.data[i] + loss.epsilon * probe[i];
            }
            const NetPass moved(params, shifted);
            const Image& h_moved = moved.output();
            const double coeff = 2.0 * var / (loss.epsilon * count);
            std::vector<double> sq(n), dot(n);
            Image g_moved(y.width, y.height, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = h.data[i] - target.data[i];
                sq[i] = d * d;
                dot[i] = probe[i] * (h_moved.data[i] - h.data[i]);
                g_base.data[i] = 2.0 * d / count - coeff * probe[i];
                g_moved.data[i] = coeff * probe[i];
            }
            fid[j] = pairwise_sum(sq) / count;
            cst[j] = -var;
            dvg[j] = 2.0 * var * (pairwise_sum(dot) / (loss.epsilon * count));
            base.backward(g_base, result.grads);
            moved.backward(g_moved, result.grads);
            break;
        }
        case LossKind::Epure: {
            require_pixels(y, s.reference, "epure");
            std::vector<double> z(n), probe(n);
            Image shifted = y;
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = (y.data[i] + s.reference.data[i]) / 2.0;
                probe[i] = loss.probe == ProbeKind::Rademacher ? rng.rademacher() : rng.normal();
                shifted.data[i] = y.data[i] + loss.epsilon * probe[i];
            }
            const NetPass moved(params, shifted);
            const Image& h_moved = moved.output();
            const double coeff = 2.0 / (loss.epsilon * loss.peak * count);
            std::vector<double> sq(n), dot(n);
            Image g_moved(y.width, y.height, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = h.data[i] - z[i];
                const double weight = probe[i] * z[i];
                sq[i] = d * d;
                dot[i] = weight * (h_moved.data[i] - h.data[i]);
                g_base.data[i] = 2.0 * d / count - coeff * weight;
                g_moved.data[i] = coeff * weight;
            }
            fid[j] = pairwise_sum(sq) / count;
            cst[j] = -pairwise_sum(z) / (loss.peak * count);
            dvg[j] = coeff * pairwise_sum(dot);
            base.backward(g_base, result.grads);
            moved.backward(g_moved, result.grads);
            break;
        }
        }
    }

    const double m = static_cast<double>(batch.size());
    result.risk = RiskValue::from_terms(pairwise_sum(fid) / m, pairwise_sum(cst) / m,
                                        pairwise_sum(dvg) / m);
    if (batch.size() > 1)
        for (ConvLayer& g : result.grads) {
            for (double& v : g.weights)
                v /= m;
            for (double& v : g.bias)
                v /= m;
        }
    return result;
}

AdamState AdamState::for_params(const NetParams& params)
{
    return {zeros_like(params), zeros_like(params), 0};
}

void adam_step(NetParams& params, const ParamGradients& grads, AdamState& state,
               double learning_rate)
{
    require_finite_grads(params, grads);
    if (state.first_moment.size() != params.layers.size())
        state = AdamState::for_params(params);
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(kAdamBeta1, t);
    const double correction2 = 1.0 - std::pow(kAdamBeta2, t);
    for_each_param(params, grads,
                   [&](double& p, double g, std::size_t l, bool is_bias, std::size_t i) {
                       double& m = is_bias ? state.first_moment[l].bias[i]
                                           : state.first_moment[l].weights[i];
                       double& v = is_bias ? state.second_moment[l].bias[i]
                                           : state.second_moment[l].weights[i];
                       m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
                       v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
                       const double m_hat = m / correction1;
                       const double v_hat = v / correction2;
                       p -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
                   });
}

void sgd_step(NetParams& params, const ParamGradients& grads, double learning_rate)
{
    require_finite_grads(params, grads);
    for_each_param(params, grads, [&](double& p, double g, std::size_t, bool, std::size_t) {
        p -= learning_rate * g;
    });
}

void TrainConfig::validate() const
{
    if (batch_size < 1)
        throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0))
        throw ConfigError("learning_rate must be > 0");
    if (!(lr_drop_factor > 0.0))
        throw ConfigError("lr_drop_factor must be > 0");
    if (!(epsilon > 0.0))
        throw ConfigError("epsilon must be > 0");
}

double TrainConfig::learning_rate_at(std::size_t epoch) const
{
    const std::size_t drop =
        lr_drop_epoch.value_or(static_cast<std::size_t>(std::floor(0.6 * static_cast<double>(epochs))));
    return epoch >= drop ? learning_rate * lr_drop_factor : learning_rate;
}

std::vector<TrainingSample> make_training_samples(std::span<const Image> clean, LossKind loss,
                                                  const NoiseSpec& noise, const SeededStream& rng)
{
    loss_params_for(loss, noise, kDefaultEpsilon);
    std::vector<TrainingSample> samples;
    samples.reserve(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        SeededStream local = rng.split(i);
        ImagePair obs = corrupt(clean[i], noise, local);
        switch (loss) {
        case LossKind::Mse: samples.push_back({std::move(obs.first), clean[i]}); break;
        case LossKind::McSure: samples.push_back({std::move(obs.first), {}}); break;
        case LossKind::N2n:
        case LossKind::Epure:
            samples.push_back({std::move(obs.first), std::move(obs.second)});
            break;
        case LossKind::Esure:
            samples.push_back({std::move(obs.second), std::move(obs.first)});
            break;
        }
    }
    return samples;
}

TrainResult train(const NetConfig& net, const TrainConfig& tc, std::span<const Image> clean,
                  const NoiseSpec& noise, const SeededStream& rng, std::span<const Image> validation)
{
    tc.validate();
    const LossParams loss = loss_params_for(tc.loss, noise, tc.epsilon, tc.probe);
    if (clean.empty())
        throw ConfigError("training dataset is empty");

    TrainResult result{net_init(net, tc.init_seed), {}};
    if (tc.epochs == 0)
        return result;

    const std::vector<TrainingSample> samples =
        make_training_samples(clean, tc.loss, noise, rng.split(0));
    SeededStream train_rng = rng.split(1);

    std::vector<Image> val_noisy;
    const SeededStream val_rng = rng.split(2);
    const NoiseSpec val_noise = input_marginal(noise);
    for (std::size_t i = 0; i < validation.size(); ++i) {
        SeededStream local = val_rng.split(i);
        val_noisy.push_back(corrupt(validation[i], val_noise, local).first);
    }

    AdamState adam = AdamState::for_params(result.params);
    std::vector<std::size_t> order(samples.size());
    std::size_t global_batch = 0;
    for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[train_rng.below(i)]);

        const double lr = tc.learning_rate_at(epoch);
        std::vector<double> weighted;
        for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
            const std::size_t stop = std::min(order.size(), start + tc.batch_size);
            std::vector<TrainingSample> batch;
            for (std::size_t k = start; k < stop; ++k)
                batch.push_back(samples[order[k]]);
            const LossResult r = loss_and_grad(result.params, batch, loss, train_rng);
            if (!std::isfinite(r.risk.total))
                throw NumericalError("non-finite loss at batch " + std::to_string(global_batch)
                                     + " (epoch " + std::to_string(epoch) + ")");
            if (tc.optimizer == OptimizerKind::Adam)
                adam_step(result.params, r.grads, adam, lr);
            else
                sgd_step(result.params, r.grads, lr);
            result.log.step_losses.push_back(r.risk.total);
            weighted.push_back(r.risk.total * static_cast<double>(stop - start));
            ++global_batch;
        }

        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.learning_rate = lr;
        rec.mean_loss = pairwise_sum(weighted) / static_cast<double>(samples.size());
        rec.validation_psnr = std::numeric_limits<double>::quiet_NaN();
        if (!validation.empty()) {
            std::vector<double> scores;
            for (std::size_t i = 0; i < validation.size(); ++i)
                scores.push_back(psnr(validation[i], NetPass(result.params, val_noisy[i]).output()));
            rec.validation_psnr = pairwise_sum(scores) / static_cast<double>(scores.size());
        }
        result.log.epochs.push_back(rec);
    }
    round_to_float(result.params);
    return result;
}

std::string training_log_csv(const TrainingLog& log)
{
    std::string out = "epoch,learning_rate,mean_loss,validation_psnr\n";
    char buf[160];
    for (const EpochRecord& r : log.epochs) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g\n", r.epoch, r.learning_rate,
                      r.mean_loss, r.validation_psnr);
        out += buf;
    }
    return out;
}

} // namespace rden
