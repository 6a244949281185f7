// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include "support.hpp"

#include "rden/data.hpp"
#include "rden/denoisers.hpp"
#include "rden/estimators.hpp"
#include "rden/metrics.hpp"
#include "rden/network.hpp"
#include "rden/noise.hpp"
#include "rden/training.hpp"
#include "rden/weights_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using namespace rden;

namespace {

// Tolerances.
constexpr double kBiasLimit = 3.0;                 // combined standard errors
constexpr double kGridSeconds = 600.0;
constexpr double kDivergenceLimit = 3.0;           // standard errors
constexpr double kEpsilonInvariance = 1e-6;
constexpr double kRoundingTolerance = 1e-10;       // relative, for the PURE identity
constexpr double kFdStep = 1e-4;
constexpr double kFdLimit = 1e-3;
constexpr double kFdSeconds = 60.0;
constexpr double kMinGainDb = 3.0;
constexpr double kMcSureGapDb = 0.5;
constexpr double kEsureSlackDb = 0.2;
constexpr double kTrainSeconds = 1800.0;
constexpr double kEpureGainDb = 2.0;
constexpr double kAlphaStep = 0.01;
constexpr std::size_t kN2nPairs = 5000;
constexpr double kPsnrExampleTol = 1e-9;
constexpr double kPsnrShiftTol = 1e-4;
constexpr double kSsimExampleTol = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool report(int id, bool ok, const std::string& what)
{
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    return ok;
}

void detail(const std::string& line)
{
    std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Image phantom64()
{
    PhantomSpec spec;
    spec.size = 64;
    return phantom_image(spec, 0);
}

struct Reference {
    std::string name;
    Denoiser h;
    bool gaussian_only = false;
};

std::vector<Reference> reference_denoisers()
{
    return {{"identity", denoisers::identity()},
            {"constant", denoisers::constant(0.5)},
            {"box3", denoisers::conv_filter(ConvKernel::box(3))},
            {"soft", denoisers::soft_threshold(0.1), true}};
}

// ---------------------------------------------------------------------------

bool criterion1()
{
    const auto t0 = Clock::now();
    const Image x = phantom64();
    const SeededStream root(20240601);
    std::uint64_t combo = 0;
    double worst = 0.0;
    std::size_t runs = 0;
    bool ok = true;

    struct Row {
        Estimator e;
        bool gaussian;
    };
    const std::vector<Row> rows = {{Estimator::Sure, true}, {Estimator::McSure, true},
                                   {Estimator::Esure, true}, {Estimator::EsureMc, true},
                                   {Estimator::Pure, false}, {Estimator::Epure, false}};
    for (const Row& row : rows)
        for (const Reference& ref : reference_denoisers()) {
            if (!row.gaussian && ref.gaussian_only)
                continue;
            for (int level = 0; level < 2; ++level) {
                NoiseSpec spec;
                std::size_t draws = 2000;
                if (row.gaussian) {
                    const double sigma = (level == 0 ? 25.0 : 50.0) / 255.0;
                    if (row.e == Estimator::Esure || row.e == Estimator::EsureMc)
                        spec = noise::GaussianPair{sigma, sigma};
                    else
                        spec = noise::Gaussian{sigma};
                } else {
                    spec = level == 0 ? NoiseSpec(noise::Poisson{0.5 * 255}) : NoiseSpec(noise::Poisson{255});
                    if (row.e == Estimator::Epure)
                        spec = noise::PoissonPair{std::get<noise::Poisson>(spec).peak};
                    draws = 5000;
                }
                SeededStream rng = root.split(combo++);
                const StudyReport r = unbiasedness_study(EstimatorSpec{row.e}, ref.h, x, spec, draws, rng);
                ++runs;
                worst = std::max(worst, std::abs(r.bias_in_stderr_units));
                const bool pass = std::abs(r.bias_in_stderr_units) <= kBiasLimit;
                ok = ok && pass;
                detail(study_csv_row(r) + (pass ? "" : "  <-- exceeds limit"));
            }
        }
    const double secs = seconds_since(t0);
    ok = ok && secs <= kGridSeconds;
    return report(1, ok, "unbiasedness grid, " + std::to_string(runs) + " studies, max |bias| "
                             + fmt("%.3f", worst) + " stderr (limit 3), " + fmt("%.1f", secs)
                             + " s (limit 600)");
}

// ---------------------------------------------------------------------------

bool criterion2()
{
    const Image x = phantom64();
    SeededStream noise_rng(77);
    const Image y = awgn_corrupt(x, 25.0 / 255.0, noise_rng);
    const SeededStream root(4242);
    bool ok = true;
    double worst_units = 0.0, worst_invariance = 0.0;
    std::uint64_t stream = 0;
    const std::vector<double> epsilons = {1e-2, 1e-3, 1e-4};

    for (const Reference& ref : reference_denoisers()) {
        const double analytic = ref.h.analytic_divergence(y);
        for (double eps : epsilons) {
            const SeededStream probes = root.split(stream++);
            std::vector<double> values;
            for (std::size_t d = 0; d < 200; ++d) {
                SeededStream rng = probes.split(d);
                values.push_back(mc_divergence(ref.h, y, eps, rng, 1).value);
            }
            const MeanAndError me = mean_and_stderr(values);
            const double gap = std::abs(me.mean - analytic);
            const bool pass = gap <= kDivergenceLimit * me.std_error || gap <= 1e-12;
            if (me.std_error > 0)
                worst_units = std::max(worst_units, gap / me.std_error);
            ok = ok && pass;
            detail(ref.name + " eps=" + fmt("%g", eps) + " analytic=" + fmt("%.6f", analytic) + " mc="
                   + fmt("%.6f", me.mean) + " se=" + fmt("%.2e", me.std_error) + (pass ? "" : "  <-- FAIL"));
        }
        if (ref.name == "soft")
            continue;
        // Same probe at every epsilon: a linear map gives the same quotient.
        for (std::size_t d = 0; d < 200; ++d) {
            SeededStream a = root.split(1000).split(d), b = a;
            const double coarse = mc_divergence(ref.h, y, 1e-2, a, 1).value;
            const double fine = mc_divergence(ref.h, y, 1e-4, b, 1).value;
            worst_invariance = std::max(worst_invariance, std::abs(coarse - fine));
        }
    }
    ok = ok && worst_invariance <= kEpsilonInvariance;
    return report(2, ok, "MC divergence vs analytic, max gap " + fmt("%.2f", worst_units)
                             + " stderr (limit 3); linear eps-invariance " + fmt("%.2e", worst_invariance)
                             + " (limit 1e-6)");
}

// ---------------------------------------------------------------------------

bool criterion3()
{
    const Image x = phantom64();
    const double sigma = 25.0 / 255.0;
    const double peak = 255.0;
    bool ok = true;
    std::vector<std::string> failures;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond)
            failures.push_back(what);
        ok = ok && cond;
    };

    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        SeededStream rng(500 + trial);
        for (const Reference& ref : reference_denoisers()) {
            const Image y1 = awgn_corrupt(x, sigma, rng);
            const Image h1 = ref.h(y1);
            const DivergenceEstimate div = DivergenceEstimate::analytic(ref.h.analytic_divergence(y1));

            const RiskValue s = sure_analytic(y1, h1, div, sigma);
            const RiskValue e = esure(y1, y1, h1, div, sigma);
            expect(s.total == e.total && s.fidelity_term == e.fidelity_term
                       && s.divergence_term == e.divergence_term,
                   "esure(y1, y1) == sure for " + ref.name);

            const ImagePair pair = awgn_pair_correlated(x, sigma, sigma, rng);
            const Image h2 = ref.h(pair.second);
            const RiskValue e0 = esure(pair.first, pair.second, h2,
                                       DivergenceEstimate::analytic(ref.h.analytic_divergence(pair.second)), 0.0);
            expect(e0.total == mse(pair.first, h2).total, "esure(sigma1 = 0) == mse for " + ref.name);

            const Image z = awgn_corrupt(x, sigma, rng);
            expect(n2n_loss(z, h1).total == mse(z, h1).total, "n2n == mse functional for " + ref.name);

            if (ref.gaussian_only)
                continue;
            const Image yp = poisson_corrupt(x, peak, rng);
            for (ProbeKind probe : {ProbeKind::Rademacher, ProbeKind::Gaussian}) {
                SeededStream a(900 + trial), b = a;
                const RiskValue p = pure_single(yp, ref.h, peak, kDefaultEpsilon, a, probe);
                const RiskValue q = epure_pair(yp, yp, ref.h, peak, kDefaultEpsilon, b, probe);
                expect(p.total == q.total, "pure == epure(y, y) for " + ref.name);
            }
        }

        const Denoiser id = denoisers::identity();
        const Image y = awgn_corrupt(x, sigma, rng);
        expect(sure_analytic(y, y, DivergenceEstimate::analytic(1.0), sigma).total == sigma * sigma,
               "sure(identity) == sigma^2");

        const Image yp = poisson_corrupt(x, peak, rng);
        SeededStream probe_rng(1300 + trial);
        const RiskValue r = epure_pair(yp, yp, id, peak, kDefaultEpsilon, probe_rng);
        const double expected = pairwise_sum(yp.pixels()) / static_cast<double>(yp.size()) / peak;
        expect(test::rel_diff(r.total, expected) <= kRoundingTolerance, "epure(identity) == mean(z)/T");
    }
    for (const auto& f : failures)
        detail("failed: " + f);
    return report(3, ok, "reduction identities over 20 realizations x 4 denoisers"
                         + std::string(failures.empty() ? "" : ", " + std::to_string(failures.size()) + " failures"));
}

// ---------------------------------------------------------------------------

const NetConfig kFdNet{3, 4, 3, true};

NetParams fd_params(std::uint64_t seed)
{
    NetParams p = net_init(kFdNet, seed);
    SeededStream rng(seed, 5);
    for (ConvLayer& l : p.layers)
        for (double& b : l.bias)
            b = 0.05 * rng.normal();
    return p;
}

double fd_rel(double analytic, double numeric)
{
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-4});
}

// Walks every parameter and returns the worst relative error of `grads`
// against central differences of `f`.
double param_fd(const NetParams& p, const ParamGradients& grads, const std::function<double(const NetParams&)>& f)
{
    double worst = 0.0;
    for (std::size_t l = 0; l < p.layers.size(); ++l)
        for (int is_bias = 0; is_bias < 2; ++is_bias) {
            const std::size_t count = is_bias ? p.layers[l].bias.size() : p.layers[l].weights.size();
            for (std::size_t i = 0; i < count; ++i) {
                NetParams plus = p, minus = p;
                (is_bias ? plus.layers[l].bias : plus.layers[l].weights)[i] += kFdStep;
                (is_bias ? minus.layers[l].bias : minus.layers[l].weights)[i] -= kFdStep;
                const double numeric = (f(plus) - f(minus)) / (2 * kFdStep);
                worst = std::max(worst, fd_rel((is_bias ? grads[l].bias : grads[l].weights)[i], numeric));
            }
        }
    return worst;
}

bool criterion4()
{
    const auto t0 = Clock::now();
    const NetParams p = fd_params(3);
    const Image x = test::random_image(8, 8, 7);
    const Image u = test::random_image(8, 8, 8, -1, 1);
    auto weighted = [&](const NetParams& q, const Image& in) {
        const Image out = NetPass(q, in).output();
        double s = 0;
        for (std::size_t i = 0; i < out.size(); ++i)
            s += out.data[i] * u.data[i];
        return s;
    };

    ParamGradients grads = zeros_like(p);
    const Image d_input = NetPass(p, x).backward(u, grads);
    const double layer_worst = param_fd(p, grads, [&](const NetParams& q) { return weighted(q, x); });
    double input_worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Image plus = x, minus = x;
        plus.data[i] += kFdStep;
        minus.data[i] -= kFdStep;
        input_worst = std::max(input_worst, fd_rel(d_input.data[i], (weighted(p, plus) - weighted(p, minus)) / (2 * kFdStep)));
    }
    detail("layers: params " + fmt("%.2e", layer_worst) + ", input " + fmt("%.2e", input_worst));
    bool ok = layer_worst <= kFdLimit && input_worst <= kFdLimit;

    const double s = 25.0 / 255.0;
    const std::vector<std::pair<LossKind, NoiseSpec>> losses = {
        {LossKind::Mse, noise::Gaussian{s}},
        {LossKind::N2n, noise::GaussianIndependentPair{s}},
        {LossKind::McSure, noise::Gaussian{s}},
        {LossKind::Esure, noise::GaussianPair{s, s}},
        {LossKind::Epure, noise::PoissonPair{255}}};
    for (const auto& [kind, spec] : losses) {
        std::vector<Image> clean = {test::random_image(8, 8, 17, 0.1, 0.9), test::random_image(8, 8, 18, 0.1, 0.9)};
        const auto batch = make_training_samples(clean, kind, spec, SeededStream(17));
        const LossParams lp = loss_params_for(kind, spec, 1e-3);
        const SeededStream frozen(99);
        auto value = [&](const NetParams& q) {
            SeededStream rng = frozen;
            return loss_and_grad(q, batch, lp, rng).risk.total;
        };
        SeededStream rng = frozen;
        const LossResult r = loss_and_grad(p, batch, lp, rng);
        const double worst = param_fd(p, r.grads, value);
        detail(loss_name(kind) + ": " + fmt("%.2e", worst));
        ok = ok && worst <= kFdLimit;
    }
    const double secs = seconds_since(t0);
    ok = ok && secs <= kFdSeconds;
    return report(4, ok, "gradients vs central differences (limit 1e-3), " + fmt("%.1f", secs) + " s (limit 60)");
}

// ---------------------------------------------------------------------------

struct TrainingSetup {
    std::vector<Image> patches;
    std::vector<Image> held_out;
};

TrainingSetup training_setup()
{
    PhantomSpec spec;
    spec.size = 64;
    spec.seed = 11;
    const Dataset train = phantom_generate(spec, 50);
    TrainingSetup s;
    SeededStream rng(spec.seed, 3);
    s.patches = extract_patches(train, 32, 32, std::nullopt, rng).images;
    for (std::size_t i = 0; i < 20; ++i)
        s.held_out.push_back(phantom_image(spec, 1000 + i));
    return s;
}

double mean_psnr(const std::vector<Image>& clean, const std::vector<Image>& test)
{
    std::vector<double> v;
    for (std::size_t i = 0; i < clean.size(); ++i)
        v.push_back(psnr(clean[i], test[i]));
    return pairwise_sum(v) / static_cast<double>(v.size());
}

std::vector<Image> noisy_held_out(const std::vector<Image>& clean, const NoiseSpec& spec, std::uint64_t seed)
{
    const SeededStream root(seed);
    std::vector<Image> out;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        SeededStream rng = root.split(i);
        out.push_back(corrupt(clean[i], spec, rng).first);
    }
    return out;
}

double trained_psnr(const TrainingSetup& s, LossKind loss, const NoiseSpec& train_noise,
                    const std::vector<Image>& noisy)
{
    const auto t0 = Clock::now();
    TrainConfig tc;
    tc.loss = loss;
    tc.epochs = 40;
    tc.batch_size = 4;
    tc.learning_rate = 3e-3;
    tc.init_seed = 7;
    const TrainResult r = train(NetConfig{5, 16, 3, true}, tc, s.patches, train_noise, SeededStream(31));
    const Denoiser h = as_denoiser(r.params);
    std::vector<Image> out;
    for (const Image& y : noisy)
        out.push_back(h(y));
    const double value = mean_psnr(s.held_out, out);
    detail(loss_name(loss) + " on " + describe(train_noise) + ": " + fmt("%.3f", value) + " dB, final loss "
           + fmt("%.6g", r.log.epochs.back().mean_loss) + ", " + fmt("%.1f", seconds_since(t0)) + " s");
    return value;
}

bool criterion5()
{
    const auto t0 = Clock::now();
    const TrainingSetup s = training_setup();
    const double sigma = 25.0 / 255.0;
    const auto noisy = noisy_held_out(s.held_out, noise::Gaussian{sigma}, 555);
    const double base = mean_psnr(s.held_out, noisy);
    detail(std::to_string(s.patches.size()) + " training patches, noisy input " + fmt("%.3f", base) + " dB");

    const double p_mse = trained_psnr(s, LossKind::Mse, noise::Gaussian{sigma}, noisy);
    const double p_sure = trained_psnr(s, LossKind::McSure, noise::Gaussian{sigma}, noisy);
    const double half = sigma / std::sqrt(2.0);
    const double p_esure = trained_psnr(s, LossKind::Esure, noise::GaussianPair{half, half}, noisy);
    const double p_n2n = trained_psnr(s, LossKind::N2n, noise::GaussianIndependentPair{sigma}, noisy);
    const double secs = seconds_since(t0);

    const bool a = std::min({p_mse, p_sure, p_esure, p_n2n}) - base >= kMinGainDb;
    const bool b = std::abs(p_sure - p_mse) <= kMcSureGapDb;
    const bool c = p_esure >= p_sure - kEsureSlackDb;
    detail(std::string("(a) gains >= 3 dB: ") + (a ? "yes" : "no") + ", (b) |mc-sure - mse| = "
           + fmt("%.3f", std::abs(p_sure - p_mse)) + " dB, (c) esure - mc-sure = " + fmt("%.3f", p_esure - p_sure)
           + " dB");
    return report(5, a && b && c && secs <= kTrainSeconds,
                  "training trend (a) " + std::string(a ? "ok" : "failed") + " (b) " + (b ? "ok" : "failed") + " (c) "
                      + (c ? "ok" : "failed") + ", " + fmt("%.0f", secs) + " s (limit 1800)");
}

bool criterion6()
{
    const auto t0 = Clock::now();
    const TrainingSetup s = training_setup();
    const auto noisy = noisy_held_out(s.held_out, noise::Poisson{255}, 556);
    const double base = mean_psnr(s.held_out, noisy);
    detail("noisy input " + fmt("%.3f", base) + " dB");
    const double p = trained_psnr(s, LossKind::Epure, noise::PoissonPair{255}, noisy);
    const double secs = seconds_since(t0);
    return report(6, p - base >= kEpureGainDb && secs <= kTrainSeconds,
                  "epure training gain " + fmt("%.3f", p - base) + " dB (limit 2)");
}

// ---------------------------------------------------------------------------

bool criterion7()
{
    PhantomSpec spec;
    spec.size = 16;
    const Image x = phantom_image(spec, 3);
    bool ok = true;
    for (double sigma : {25.0 / 255.0, 100.0 / 255.0}) {
        SeededStream root(7070);
        std::vector<ImagePair> pairs;
        for (std::size_t i = 0; i < kN2nPairs; ++i) {
            SeededStream rng = root.split(i);
            pairs.push_back(awgn_pair_independent(x, sigma, rng));
        }
        double best_n2n = 0, best_mse = 0, min_n2n = INFINITY, min_mse = INFINITY;
        for (int k = 0; k <= 150; ++k) {
            const double alpha = k * kAlphaStep;
            const Denoiser h("scale", [alpha](const Image& y) {
                Image out = y;
                for (double& v : out.data)
                    v *= alpha;
                return out;
            });
            std::vector<double> n2n, truth;
            for (const ImagePair& p : pairs) {
                const Image hy = h(p.first);
                n2n.push_back(n2n_loss(p.second, hy).total);
                truth.push_back(mse(x, hy).total);
            }
            const double ln = pairwise_sum(n2n), lt = pairwise_sum(truth);
            if (ln < min_n2n) {
                min_n2n = ln;
                best_n2n = alpha;
            }
            if (lt < min_mse) {
                min_mse = lt;
                best_mse = alpha;
            }
        }
        const bool pass = std::abs(best_n2n - best_mse) <= kAlphaStep + 1e-12;
        ok = ok && pass;
        detail("sigma=" + fmt("%.4f", sigma) + ": n2n argmin " + fmt("%.2f", best_n2n) + ", mse argmin "
               + fmt("%.2f", best_mse));
    }
    return report(7, ok, "n2n argmin over alpha*y matches the mse argmin within 0.01");
}

// ---------------------------------------------------------------------------

std::map<std::string, std::vector<std::uint8_t>> tree(const fs::path& dir)
{
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            out[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
    return out;
}

int cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + RDEN_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool cli_pipeline(const fs::path& dir)
{
    const std::string d = dir.string();
    bool ok = true;
    ok &= cli("gen-data --seed 3 --out " + d + "/data --set count=6 --set size=32 --set test_fraction=0.34") == 0;
    ok &= cli("corrupt --seed 4 --out " + d + "/noisy --set manifest=" + d + "/data/manifest.csv") == 0;
    ok &= cli("corrupt --seed 4 --out " + d + "/pair --set manifest=" + d
              + "/data/manifest.csv --set noise=poisson_pair --set peak=127.5")
          == 0;
    ok &= cli("train --seed 5 --out " + d + "/net --set manifest=" + d
              + "/data/manifest.csv --set split=train --set loss=esure --set noise=gaussian_pair"
                " --set epochs=2 --set depth=3 --set channels=4 --set val_manifest="
              + d + "/data/manifest.csv")
          == 0;
    ok &= cli("denoise --out " + d + "/den --set weights=" + d + "/net/weights.rdnw --set depth=3 --set channels=4"
              " --set manifest=" + d + "/noisy/manifest.csv")
          == 0;
    ok &= cli("eval --out " + d + "/eval --set reference=" + d + "/data/manifest.csv --set test=" + d
              + "/den/manifest.csv")
          == 0;
    ok &= cli("validate --seed 6 --out " + d + "/validate --set size=16 --set draws=100 --set poisson_draws=100") == 0;
    return ok;
}

bool criterion8()
{
    bool ok = true;
    const fs::path root = fs::current_path() / "scratch" / "acceptance";
    fs::remove_all(root);
    const bool ran = cli_pipeline(root / "a") && cli_pipeline(root / "b");
    const auto a = tree(root / "a"), b = tree(root / "b");
    const bool same = ran && a == b && !a.empty();
    detail("cli pipeline: " + std::to_string(a.size()) + " files, " + (same ? "byte-identical" : "DIFFERENT"));
    ok = ok && same;

    bool pgm_ok = true;
    for (int depth : {8, 16}) {
        const double levels = depth == 8 ? 255.0 : 65535.0;
        Image img = test::random_image(23, 17, depth);
        for (double& v : img.data)
            v = std::round(v * levels) / levels;
        const auto bytes = pgm_encode(img, depth);
        const Image back = pgm_decode(bytes);
        pgm_ok = pgm_ok && back == img && pgm_encode(back, depth) == bytes;
    }
    detail(std::string("graymap round trip: ") + (pgm_ok ? "bit-exact" : "MISMATCH"));

    NetParams p = net_init(NetConfig{}, 12);
    SeededStream rng(12, 1);
    for (ConvLayer& l : p.layers)
        for (double& bias : l.bias)
            bias = 0.01 * rng.normal();
    round_to_float(p);
    const auto bytes = encode_params(p);
    const NetParams q = decode_params(bytes, NetConfig{});
    const bool weights_ok = q.layers == p.layers && encode_params(q) == bytes;
    detail(std::string("weight round trip: ") + (weights_ok ? "bit-exact" : "MISMATCH"));

    const Image half(32, 32, 0.5), six(32, 32, 0.6), five5(32, 32, 0.55);
    const double p20 = psnr(half, six);
    const double shift = psnr(half, five5) - p20;
    Image binary(32, 32);
    for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t c = 0; c < 32; ++c)
            binary.at(r, c) = ((r / 4 + c / 4) % 2) ? 1.0 : 0.0;
    Image inverted = binary;
    for (double& v : inverted.data)
        v = 1.0 - v;
    const double c1 = (0.01) * (0.01), m1 = 0.4, m2 = 0.6;
    const double closed = (2 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
    const bool metrics_ok = std::isinf(psnr(half, half)) && std::abs(p20 - 20.0) <= kPsnrExampleTol
                            && std::abs(shift - 20.0 * std::log10(2.0)) <= kPsnrShiftTol
                            && ssim(binary, binary) == 1.0 && ssim(binary, inverted) <= 0.0
                            && std::abs(ssim(Image(32, 32, 0.4), Image(32, 32, 0.6)) - closed) <= kSsimExampleTol;
    detail("metrics: psnr " + fmt("%.12f", p20) + ", shift " + fmt("%.6f", shift) + ", inverted ssim "
           + fmt("%.4f", ssim(binary, inverted)));
    ok = ok && pgm_ok && weights_ok && metrics_ok;
    return report(8, ok, "determinism and I/O round trips, metric examples");
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::function<bool()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8};
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id))
            continue;
        try {
            if (!criteria[i]())
                ++failures;
        } catch (const std::exception& e) {
            report(id, false, std::string("threw: ") + e.what());
            ++failures;
        }
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
