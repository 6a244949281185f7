#include "support.hpp"

#include "rden/data.hpp"
#include "rden/error.hpp"
#include "rden/training.hpp"

#include <doctest.h>

#include <cmath>

using namespace rden;

namespace {

const NetConfig kTiny{3, 4, 3, true};

NetParams tiny_params(std::uint64_t seed)
{
    NetParams p = net_init(kTiny, seed);
    SeededStream rng(seed, 5);
    for (ConvLayer& l : p.layers)
        for (double& b : l.bias)
            b = 0.05 * rng.normal();
    return p;
}

std::vector<TrainingSample> tiny_batch(LossKind kind, const NoiseSpec& noise, std::uint64_t seed)
{
    std::vector<Image> clean;
    for (std::uint64_t i = 0; i < 2; ++i)
        clean.push_back(test::random_image(8, 8, seed + i, 0.1, 0.9));
    return make_training_samples(clean, kind, noise, SeededStream(seed));
}

double loss_at(const NetParams& p, const std::vector<TrainingSample>& batch, const LossParams& lp,
               const SeededStream& frozen)
{
    SeededStream rng = frozen;
    return loss_and_grad(p, batch, lp, rng).risk.total;
}

double max_fd_error(LossKind kind, const NoiseSpec& noise)
{
    const NetParams p = tiny_params(3);
    const auto batch = tiny_batch(kind, noise, 17);
    const LossParams lp = loss_params_for(kind, noise, 1e-3);
    const SeededStream frozen(99);
    SeededStream rng = frozen;
    const LossResult r = loss_and_grad(p, batch, lp, rng);

    const double step = 1e-4;
    double worst = 0.0;
    for (std::size_t l = 0; l < p.layers.size(); ++l)
        for (int is_bias = 0; is_bias < 2; ++is_bias) {
            const std::size_t count = is_bias ? p.layers[l].bias.size() : p.layers[l].weights.size();
            for (std::size_t i = 0; i < count; ++i) {
                NetParams plus = p, minus = p;
                (is_bias ? plus.layers[l].bias : plus.layers[l].weights)[i] += step;
                (is_bias ? minus.layers[l].bias : minus.layers[l].weights)[i] -= step;
                const double numeric = (loss_at(plus, batch, lp, frozen) - loss_at(minus, batch, lp, frozen)) / (2 * step);
                const double analytic = (is_bias ? r.grads[l].bias : r.grads[l].weights)[i];
                worst = std::max(worst, std::abs(analytic - numeric)
                                            / std::max({std::abs(analytic), std::abs(numeric), 1e-4}));
            }
        }
    return worst;
}

} // namespace

TEST_CASE("loss names and compatibility")
{
    CHECK(parse_loss("mc-sure") == LossKind::McSure);
    CHECK(parse_loss("sure") == LossKind::McSure);
    CHECK(loss_name(LossKind::Epure) == "epure");
    CHECK_THROWS_AS(parse_loss("l1"), ConfigError);
    CHECK(loss_accepts(LossKind::Mse, noise::Poisson{10}));
    CHECK(loss_accepts(LossKind::N2n, noise::GaussianIndependentPair{0.1}));
    CHECK(loss_accepts(LossKind::Esure, noise::GaussianPair{0.1, 0.1}));
    CHECK_FALSE(loss_accepts(LossKind::Epure, noise::Gaussian{0.1}));
    CHECK_FALSE(loss_accepts(LossKind::McSure, noise::GaussianPair{0.1, 0.1}));
    CHECK_THROWS_AS(loss_params_for(LossKind::Epure, noise::Gaussian{0.1}, 1e-3), ConfigError);
    CHECK(loss_params_for(LossKind::Epure, noise::PoissonPair{100}, 1e-3).peak == 200);
    CHECK(loss_params_for(LossKind::Esure, noise::GaussianPair{0.1, 0.3}, 1e-3).sigma == 0.1);
}

TEST_CASE("loss gradients match central finite differences")
{
    const double s = 25.0 / 255;
    CHECK(max_fd_error(LossKind::Mse, noise::Gaussian{s}) <= 1e-3);
    CHECK(max_fd_error(LossKind::N2n, noise::GaussianIndependentPair{s}) <= 1e-3);
    CHECK(max_fd_error(LossKind::McSure, noise::Gaussian{s}) <= 1e-3);
    CHECK(max_fd_error(LossKind::Esure, noise::GaussianPair{s, s}) <= 1e-3);
    CHECK(max_fd_error(LossKind::Epure, noise::PoissonPair{255}) <= 1e-3);
}

TEST_CASE("loss values agree with the estimator functions")
{
    const NetParams p = tiny_params(4);
    const Denoiser h = as_denoiser(p);
    const double s = 0.1;
    SUBCASE("mc-sure")
    {
        const auto batch = tiny_batch(LossKind::McSure, noise::Gaussian{s}, 5);
        SeededStream a(1), b(1);
        const double loss = loss_and_grad(p, batch, loss_params_for(LossKind::McSure, noise::Gaussian{s}, 1e-3), a).risk.total;
        const std::vector<Image> ys = {batch[0].input, batch[1].input};
        CHECK(test::rel_diff(loss, mc_sure_batch(h, ys, s, 1e-3, b).total) < 1e-12);
    }
    SUBCASE("esure")
    {
        const NoiseSpec n = noise::GaussianPair{s, 0.05};
        const auto batch = tiny_batch(LossKind::Esure, n, 6);
        SeededStream a(2), b(2);
        const double loss = loss_and_grad(p, batch, loss_params_for(LossKind::Esure, n, 1e-3), a).risk.total;
        double manual = 0;
        for (const TrainingSample& t : batch)
            manual += esure_mc(t.reference, t.input, h, s, 1e-3, b).total;
        CHECK(test::rel_diff(loss, manual / 2) < 1e-12);
    }
    SUBCASE("epure")
    {
        const NoiseSpec n = noise::PoissonPair{50};
        const auto batch = tiny_batch(LossKind::Epure, n, 7);
        SeededStream a(3), b(3);
        const double loss = loss_and_grad(p, batch, loss_params_for(LossKind::Epure, n, 1e-3), a).risk.total;
        double manual = 0;
        for (const TrainingSample& t : batch)
            manual += epure_pair(t.input, t.reference, h, averaged_pair_peak(50), 1e-3, b).total;
        CHECK(test::rel_diff(loss, manual / 2) < 1e-12);
    }
}

TEST_CASE("n2n with a degenerate pair is mse against the input")
{
    const NetParams p = tiny_params(5);
    const Image y = test::random_image(8, 8, 3);
    const std::vector<TrainingSample> batch = {{y, y}};
    SeededStream a(1), b(1);
    const LossResult n2n = loss_and_grad(p, batch, LossParams{LossKind::N2n}, a);
    const LossResult m = loss_and_grad(p, batch, LossParams{LossKind::Mse}, b);
    CHECK(n2n.risk.total == m.risk.total);
    CHECK(n2n.grads == m.grads);
}

TEST_CASE("adam")
{
    NetParams p = tiny_params(6);
    SUBCASE("zero gradients leave fresh parameters alone")
    {
        const NetParams before = p;
        AdamState st = AdamState::for_params(p);
        adam_step(p, zeros_like(p), st, 1e-3);
        CHECK(p.layers == before.layers);
        CHECK(st.step == 1);
    }
    SUBCASE("zero gradients decay the moments")
    {
        AdamState st = AdamState::for_params(p);
        st.first_moment[0].weights[0] = 1.0;
        st.second_moment[0].weights[0] = 1.0;
        adam_step(p, zeros_like(p), st, 1e-3);
        CHECK(st.first_moment[0].weights[0] == doctest::Approx(kAdamBeta1));
        CHECK(st.second_moment[0].weights[0] == doctest::Approx(kAdamBeta2));
    }
    SUBCASE("first step moves each parameter by about the learning rate")
    {
        const NetParams before = p;
        ParamGradients g = zeros_like(p);
        SeededStream rng(2);
        for (ConvLayer& l : g)
            for (double& v : l.weights)
                v = rng.normal();
        AdamState st = AdamState::for_params(p);
        const double lr = 1e-3;
        adam_step(p, g, st, lr);
        for (std::size_t l = 0; l < g.size(); ++l)
            for (std::size_t i = 0; i < g[l].weights.size(); ++i) {
                const double gi = g[l].weights[i];
                const double expect = -lr * gi / (std::abs(gi) + kAdamEpsilon);
                CHECK(p.layers[l].weights[i] - before.layers[l].weights[i]
                      == doctest::Approx(expect).epsilon(1e-9));
            }
    }
    SUBCASE("non-finite gradients are rejected without side effects")
    {
        const NetParams before = p;
        ParamGradients g = zeros_like(p);
        g[1].bias[2] = NAN;
        AdamState st = AdamState::for_params(p);
        CHECK_THROWS_AS(adam_step(p, g, st, 1e-3), NumericalError);
        CHECK(p.layers == before.layers);
        CHECK(st.step == 0);
        CHECK_THROWS_AS(sgd_step(p, g, 1e-3), NumericalError);
    }
    SUBCASE("sgd")
    {
        const NetParams before = p;
        ParamGradients g = zeros_like(p);
        g[0].weights[3] = 2.0;
        sgd_step(p, g, 0.1);
        CHECK(p.layers[0].weights[3] == doctest::Approx(before.layers[0].weights[3] - 0.2));
    }
}

TEST_CASE("learning rate schedule")
{
    TrainConfig tc;
    tc.epochs = 10;
    CHECK(tc.learning_rate_at(5) == 1e-3);
    CHECK(tc.learning_rate_at(6) == doctest::Approx(1e-4));
    tc.lr_drop_epoch = 2;
    CHECK(tc.learning_rate_at(1) == 1e-3);
    CHECK(tc.learning_rate_at(2) == doctest::Approx(1e-4));
    tc.batch_size = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
}

namespace {

std::vector<Image> toy_set(std::size_t n, std::size_t size = 16)
{
    PhantomSpec spec;
    spec.size = size;
    return phantom_generate(spec, n).images;
}

TrainConfig quick_config(LossKind kind, std::size_t epochs)
{
    TrainConfig tc;
    tc.loss = kind;
    tc.epochs = epochs;
    tc.batch_size = 4;
    tc.learning_rate = 3e-3;
    return tc;
}

} // namespace

TEST_CASE("training")
{
    const NetConfig net{3, 8, 3, true};
    const auto clean = toy_set(10);
    const NoiseSpec g = noise::Gaussian{25.0 / 255};

    SUBCASE("zero epochs returns the initialization")
    {
        const TrainResult r = train(net, quick_config(LossKind::Mse, 0), clean, g, SeededStream(1));
        CHECK(r.params.layers == net_init(net, 1).layers);
        CHECK(r.log.epochs.empty());
    }
    SUBCASE("mse loss decreases and runs are reproducible")
    {
        const TrainResult a = train(net, quick_config(LossKind::Mse, 6), clean, g, SeededStream(2));
        const TrainResult b = train(net, quick_config(LossKind::Mse, 6), clean, g, SeededStream(2));
        REQUIRE(a.log.epochs.size() == 6);
        CHECK(a.log.epochs.back().mean_loss < a.log.epochs.front().mean_loss);
        CHECK(a.params.layers == b.params.layers);
        CHECK(a.log.step_losses == b.log.step_losses);
        CHECK(a.log.step_losses.size() == 6 * 3);
        CHECK(std::isnan(a.log.epochs[0].validation_psnr));
        for (const ConvLayer& l : a.params.layers)
            for (double w : l.weights)
                CHECK(static_cast<double>(static_cast<float>(w)) == w);
    }
    SUBCASE("esure with sigma_z = 0 reproduces mc-sure step by step")
    {
        const double s = 25.0 / 255;
        const TrainResult m = train(net, quick_config(LossKind::McSure, 3), clean, noise::Gaussian{s}, SeededStream(3));
        const TrainResult e = train(net, quick_config(LossKind::Esure, 3), clean, noise::GaussianPair{s, 0.0}, SeededStream(3));
        REQUIRE(m.log.step_losses.size() == e.log.step_losses.size());
        for (std::size_t i = 0; i < m.log.step_losses.size(); ++i)
            CHECK(test::rel_diff(m.log.step_losses[i], e.log.step_losses[i]) <= 1e-12);
    }
    SUBCASE("validation psnr is logged")
    {
        const auto val = toy_set(3);
        const TrainResult r = train(net, quick_config(LossKind::Mse, 2), clean, g, SeededStream(4), val);
        CHECK(std::isfinite(r.log.epochs[1].validation_psnr));
        const std::string csv = training_log_csv(r.log);
        CHECK(csv.rfind("epoch,learning_rate,mean_loss,validation_psnr\n1,", 0) == 0);
    }
    SUBCASE("incompatible loss and noise are rejected before training")
    {
        CHECK_THROWS_AS(train(net, quick_config(LossKind::Epure, 2), clean, g, SeededStream(5)), ConfigError);
        CHECK_THROWS_AS(train(net, quick_config(LossKind::N2n, 2), clean, g, SeededStream(5)), ConfigError);
        CHECK_THROWS_AS(train(net, quick_config(LossKind::Mse, 2), {}, g, SeededStream(5)), ConfigError);
    }
    SUBCASE("divergence aborts with a numerical error")
    {
        TrainConfig tc = quick_config(LossKind::Mse, 5);
        tc.optimizer = OptimizerKind::Sgd;
        tc.learning_rate = 1e200;
        CHECK_THROWS_AS(train(net, tc, clean, g, SeededStream(6)), NumericalError);
    }
    SUBCASE("every loss trains on its noise model")
    {
        const std::pair<LossKind, NoiseSpec> cases[] = {
            {LossKind::N2n, noise::GaussianIndependentPair{0.1}},
            {LossKind::Esure, noise::GaussianPair{0.07, 0.07}},
            {LossKind::Epure, noise::PoissonPair{100}},
            {LossKind::Mse, noise::Poisson{100}},
        };
        for (const auto& [kind, spec] : cases) {
            const TrainResult r = train(net, quick_config(kind, 2), clean, spec, SeededStream(7));
            CHECK(r.log.epochs.size() == 2);
            CHECK(std::isfinite(r.log.epochs.back().mean_loss));
        }
    }
}

TEST_CASE("training samples follow the loss conventions")
{
    const auto clean = toy_set(2);
    const SeededStream rng(8);
    const auto mse_samples = make_training_samples(clean, LossKind::Mse, noise::Gaussian{0.1}, rng);
    CHECK(mse_samples[0].reference == clean[0]);
    const auto pair = make_training_samples(clean, LossKind::Esure, noise::GaussianPair{0.1, 0.2}, rng);
    SeededStream local = rng.split(1);
    const ImagePair p = awgn_pair_correlated(clean[1], 0.1, 0.2, local);
    CHECK(pair[1].input == p.second);
    CHECK(pair[1].reference == p.first);
}
