#pragma once

#include "rden/estimators.hpp"
#include "rden/network.hpp"
#include "rden/noise.hpp"
#include "rden/random.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rden {

enum class LossKind { Mse, N2n, McSure, Esure, Epure };

std::string loss_name(LossKind kind);
/// Accepts mse, n2n, sure (alias mc-sure), esure, epure.
LossKind parse_loss(const std::string& name);
/// True when `noise` supplies the observations `kind` trains on.
bool loss_accepts(LossKind kind, const NoiseSpec& noise) noexcept;

/// One training example. What the two images mean depends on the loss:
///
///   loss     input   reference
///   mse      y       clean x
///   n2n      y       second independent realization
///   mc-sure  y       (unused)
///   esure    y2      y1
///   epure    y1      y2
struct TrainingSample {
    Image input;
    Image reference;
};

struct LossParams {
    LossKind kind = LossKind::Mse;
    double sigma = 0.0;     ///< sigma for mc-sure, sigma1 for esure
    double peak = 1.0;      ///< peak scaling of the ePURE target z
    double epsilon = kDefaultEpsilon;
    ProbeKind probe = ProbeKind::Rademacher;
};

/// Loss parameters implied by a noise model (validates compatibility).
LossParams loss_params_for(LossKind kind, const NoiseSpec& noise, double epsilon,
                           ProbeKind probe = ProbeKind::Rademacher);

struct LossResult {
    RiskValue risk;
    ParamGradients grads;
};

/// Batch-mean per-pixel loss and its exact parameter gradient. The Monte-Carlo
/// losses draw one probe per sample from `rng`, in batch order, and
/// differentiate through both h(y) and h(y + eps b).
LossResult loss_and_grad(const NetParams& params, std::span<const TrainingSample> batch,
                         const LossParams& loss, SeededStream& rng);

struct AdamState {
    ParamGradients first_moment;
    ParamGradients second_moment;
    std::size_t step = 0;

    static AdamState for_params(const NetParams& params);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// Bias-corrected Adam update. Throws NumericalError (parameters and state
/// untouched) if any gradient is non-finite.
void adam_step(NetParams& params, const ParamGradients& grads, AdamState& state,
               double learning_rate);

/// Plain gradient descent, same non-finite guard.
void sgd_step(NetParams& params, const ParamGradients& grads, double learning_rate);

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
    LossKind loss = LossKind::Mse;
    std::size_t epochs = 40;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double lr_drop_factor = 0.1;
    /// Epoch (0-based) from which the dropped rate applies; defaults to 60%
    /// of the run.
    std::optional<std::size_t> lr_drop_epoch;
    double epsilon = kDefaultEpsilon;
    ProbeKind probe = ProbeKind::Rademacher;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::uint64_t init_seed = 1;

    void validate() const;
    double learning_rate_at(std::size_t epoch) const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double learning_rate = 0.0;
    double mean_loss = 0.0;
    /// NaN when no validation set was given.
    double validation_psnr = 0.0;
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;
    std::vector<double> step_losses;
};

struct TrainResult {
    NetParams params;
    TrainingLog log;
};

/// Draws one fixed set of noisy observations of `clean` (image i uses
/// rng.split(i)) and arranges them as the loss expects.
std::vector<TrainingSample> make_training_samples(std::span<const Image> clean, LossKind loss,
                                                  const NoiseSpec& noise, const SeededStream& rng);

/// Shuffled mini-batch training. Observations are drawn once from
/// rng.split(0); shuffling and probes use rng.split(1); validation noise
/// uses rng.split(2). Returned parameters are rounded to float precision
/// so they survive the weight file unchanged.
TrainResult train(const NetConfig& net, const TrainConfig& tc, std::span<const Image> clean,
                  const NoiseSpec& noise, const SeededStream& rng,
                  std::span<const Image> validation = {});

std::string training_log_csv(const TrainingLog& log);

} // namespace rden
