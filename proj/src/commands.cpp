#include "rden/commands.hpp"

#include "rden/data.hpp"
#include "rden/denoisers.hpp"
#include "rden/error.hpp"
#include "rden/estimators.hpp"
#include "rden/metrics.hpp"
#include "rden/weights_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

namespace fs = std::filesystem;

namespace rden {

namespace {

std::string fmt(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

int bit_depth(const RunConfig& cfg)
{
    return static_cast<int>(cfg.count("bit_depth"));
}

fs::path required_path(const RunConfig& cfg, const std::string& key)
{
    const std::string p = cfg.text(key);
    if (p.empty())
        throw ConfigError(key + ": a path is required");
    return p;
}

fs::path output_dir(const RunConfig& cfg)
{
    const fs::path out = cfg.text("out");
    fs::create_directories(out);
    return out;
}

std::vector<ManifestEntry> selected_entries(const std::vector<ManifestEntry>& all,
                                            const std::string& split)
{
    if (split == "all")
        return all;
    std::vector<ManifestEntry> out;
    for (const ManifestEntry& e : all)
        if (e.split == split)
            out.push_back(e);
    return out;
}

struct LoadedSet {
    std::vector<ManifestEntry> entries;
    std::vector<Image> images;
};

LoadedSet load_set(const fs::path& manifest, const std::string& split)
{
    LoadedSet s;
    s.entries = selected_entries(read_manifest(manifest), split);
    if (s.entries.empty())
        throw DataError("manifest " + manifest.string() + " has no entries for split '" + split + "'");
    s.images = load_manifest_images(manifest, s.entries);
    return s;
}

std::string stem_without_pair_suffix(const std::string& path)
{
    fs::path p(path);
    std::string stem = p.stem().string();
    for (const char* suffix : {"_y1", "_y2"}) {
        const std::string s(suffix);
        if (stem.size() > s.size() && stem.compare(stem.size() - s.size(), s.size(), s) == 0) {
            stem.erase(stem.size() - s.size());
            break;
        }
    }
    return (p.parent_path() / (stem + p.extension().string())).generic_string();
}

Denoiser study_denoiser(const std::string& name, const RunConfig& cfg)
{
    if (name == "identity")
        return denoisers::identity();
    if (name == "constant")
        return denoisers::constant(cfg.real("constant_value"));
    if (name == "box3")
        return denoisers::conv_filter(ConvKernel::box(3));
    if (name == "gauss5")
        return denoisers::conv_filter(ConvKernel::gaussian(5, 1.0));
    if (name == "soft")
        return denoisers::soft_threshold(cfg.real("soft_tau"));
    throw ConfigError("unknown denoiser '" + name + "' (identity, constant, box3, gauss5, soft)");
}

ProbeKind probe_from_config(const RunConfig& cfg)
{
    return cfg.text("probe") == "gaussian" ? ProbeKind::Gaussian : ProbeKind::Rademacher;
}

PhantomSpec phantom_from_config(const RunConfig& cfg)
{
    PhantomSpec spec;
    spec.size = cfg.count("size");
    spec.ellipses_min = cfg.count("ellipses_min");
    spec.ellipses_max = cfg.count("ellipses_max");
    spec.intensity_min = cfg.real("intensity_min");
    spec.intensity_max = cfg.real("intensity_max");
    spec.seed = cfg.u64("seed");
    spec.validate();
    return spec;
}

} // namespace

NoiseSpec noise_from_config(const RunConfig& cfg)
{
    const std::string kind = cfg.text("noise");
    NoiseSpec spec;
    if (kind == "gaussian")
        spec = noise::Gaussian{cfg.real("sigma")};
    else if (kind == "gaussian_pair")
        spec = noise::GaussianPair{cfg.real("sigma1"), cfg.real("sigma_z")};
    else if (kind == "gaussian_independent_pair")
        spec = noise::GaussianIndependentPair{cfg.real("sigma")};
    else if (kind == "poisson")
        spec = noise::Poisson{cfg.real("peak")};
    else if (kind == "poisson_pair")
        spec = noise::PoissonPair{cfg.real("peak")};
    else
        throw ConfigError("noise: unknown model '" + kind + "'");
    validate(spec);
    return spec;
}

NetConfig net_from_config(const RunConfig& cfg)
{
    NetConfig net;
    net.depth = cfg.count("depth");
    net.channels = cfg.count("channels");
    net.kernel = cfg.count("kernel");
    net.residual = cfg.flag("residual");
    net.validate();
    return net;
}

TrainConfig train_from_config(const RunConfig& cfg)
{
    TrainConfig tc;
    tc.loss = parse_loss(cfg.text("loss"));
    tc.epochs = cfg.count("epochs");
    tc.batch_size = cfg.count("batch_size");
    tc.learning_rate = cfg.real("learning_rate");
    tc.lr_drop_factor = cfg.real("lr_drop_factor");
    const std::string drop = cfg.text("lr_drop_epoch");
    if (drop != "auto") {
        if (drop.empty() || drop.find_first_not_of("0123456789") != std::string::npos)
            throw ConfigError("lr_drop_epoch: expected 'auto' or an epoch index, got '" + drop + "'");
        tc.lr_drop_epoch = static_cast<std::size_t>(std::stoull(drop));
    }
    tc.epsilon = cfg.real("epsilon");
    tc.probe = probe_from_config(cfg);
    tc.optimizer = cfg.text("optimizer") == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
    tc.init_seed = cfg.u64("init_seed");
    tc.validate();
    return tc;
}

void cmd_gen_data(const RunConfig& cfg, std::ostream& log)
{
    const PhantomSpec spec = phantom_from_config(cfg);
    const std::size_t n = cfg.count("count");
    const double test_fraction = cfg.real("test_fraction");
    const fs::path out = output_dir(cfg);
    const int depth = bit_depth(cfg);

    Dataset all = phantom_generate(spec, n);
    std::vector<ManifestEntry> entries;
    auto write_set = [&](const Dataset& ds, const std::string& prefix) {
        for (std::size_t i = 0; i < ds.images.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "%s_%04zu.pgm", prefix.c_str(), i);
            entries.push_back(write_manifest_image(out, name, split_name(ds.split), ds.images[i], depth));
        }
    };
    if (test_fraction > 0.0) {
        SeededStream rng = SeededStream(spec.seed).split(0x5b117);
        auto [train_set, test_set] = split(all, test_fraction, rng);
        write_set(train_set, "train");
        write_set(test_set, "test");
    } else {
        write_set(all, "phantom");
    }
    write_manifest(out / "manifest.csv", entries);
    log << "gen-data: wrote " << entries.size() << " phantoms to " << out.string() << "\n";
}

void cmd_corrupt(const RunConfig& cfg, std::ostream& log)
{
    const NoiseSpec spec = noise_from_config(cfg);
    const fs::path manifest = required_path(cfg, "manifest");
    const LoadedSet set = load_set(manifest, cfg.text("split"));
    const fs::path out = output_dir(cfg);
    const int depth = bit_depth(cfg);
    const SeededStream root(cfg.u64("seed"));

    std::vector<ManifestEntry> all, first, second;
    for (std::size_t i = 0; i < set.images.size(); ++i) {
        SeededStream rng = root.split(i);
        const ImagePair obs = corrupt(set.images[i], spec, rng);
        const fs::path src(set.entries[i].path);
        const std::string stem = src.stem().string();
        const std::string split = set.entries[i].split;
        if (is_pair(spec)) {
            first.push_back(write_manifest_image(out, stem + "_y1.pgm", split, obs.first, depth));
            second.push_back(write_manifest_image(out, stem + "_y2.pgm", split, obs.second, depth));
            all.push_back(first.back());
            all.push_back(second.back());
        } else {
            all.push_back(write_manifest_image(out, src.filename().string(), split, obs.first, depth));
        }
    }
    write_manifest(out / "manifest.csv", all);
    if (is_pair(spec)) {
        write_manifest(out / "manifest_y1.csv", first);
        write_manifest(out / "manifest_y2.csv", second);
    }
    log << "corrupt: " << kind_name(spec) << " (" << describe(spec) << "), " << set.images.size()
        << " images\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log)
{
    const NoiseSpec spec = noise_from_config(cfg);
    const NetConfig net = net_from_config(cfg);
    const TrainConfig tc = train_from_config(cfg);
    if (!loss_accepts(tc.loss, spec))
        throw ConfigError("loss '" + loss_name(tc.loss) + "' cannot train on " + kind_name(spec)
                          + " observations");

    const fs::path manifest = required_path(cfg, "manifest");
    LoadedSet set = load_set(manifest, cfg.text("split"));
    const std::uint64_t seed = cfg.u64("seed");

    std::vector<Image> clean = std::move(set.images);
    if (const std::size_t patch = cfg.count("patch"); patch > 0) {
        Dataset ds{std::move(clean), SplitTag::Train, manifest.string()};
        const std::size_t stride = cfg.count("stride") > 0 ? cfg.count("stride") : patch;
        const std::size_t limit = cfg.count("patch_limit");
        SeededStream patch_rng = SeededStream(seed).split(3);
        Dataset patches = extract_patches(ds, patch, stride,
                                          limit > 0 ? std::optional<std::size_t>(limit) : std::nullopt,
                                          patch_rng);
        clean = std::move(patches.images);
    }

    std::vector<Image> validation;
    if (const std::string val = cfg.text("val_manifest"); !val.empty())
        validation = load_set(val, "all").images;

    log << "train: loss=" << loss_name(tc.loss) << " noise=" << kind_name(spec) << " ("
        << describe(spec) << ") samples=" << clean.size() << " epochs=" << tc.epochs << "\n";
    const TrainResult result = train(net, tc, clean, spec, SeededStream(seed), validation);

    const fs::path out = output_dir(cfg);
    save_params(result.params, out / "weights.rdnw");
    write_text(out / "training_log.csv", training_log_csv(result.log));
    if (!result.log.epochs.empty()) {
        const EpochRecord& last = result.log.epochs.back();
        log << "train: final mean loss " << fmt(last.mean_loss);
        if (!std::isnan(last.validation_psnr))
            log << ", validation PSNR " << fmt(last.validation_psnr) << " dB";
        log << "\n";
    }
}

void cmd_denoise(const RunConfig& cfg, std::ostream& log)
{
    const NetConfig net = net_from_config(cfg);
    const NetParams params = load_params(required_path(cfg, "weights"), net);
    const fs::path manifest = required_path(cfg, "manifest");
    const LoadedSet set = load_set(manifest, cfg.text("split"));
    const fs::path out = output_dir(cfg);
    const int depth = bit_depth(cfg);
    const Denoiser h = as_denoiser(params);

    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < set.images.size(); ++i) {
        const Image estimate = h(set.images[i]);
        require_finite(estimate, "denoised " + set.entries[i].path);
        entries.push_back(write_manifest_image(out, fs::path(set.entries[i].path).filename().string(),
                                               set.entries[i].split, estimate, depth));
    }
    write_manifest(out / "manifest.csv", entries);
    log << "denoise: " << entries.size() << " images\n";
}

void cmd_eval(const RunConfig& cfg, std::ostream& log)
{
    const fs::path ref_manifest = required_path(cfg, "reference");
    const fs::path test_manifest = required_path(cfg, "test");
    const LoadedSet ref = load_set(ref_manifest, cfg.text("split"));
    const auto test_entries = read_manifest(test_manifest);
    const double peak = cfg.real("metric_peak");

    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < test_entries.size(); ++i)
        by_name.emplace(stem_without_pair_suffix(fs::path(test_entries[i].path).filename().string()), i);

    std::string csv = "path,psnr_db,ssim\n";
    std::vector<double> psnrs, ssims;
    for (std::size_t i = 0; i < ref.entries.size(); ++i) {
        const std::string name = fs::path(ref.entries[i].path).filename().string();
        const auto it = by_name.find(name);
        if (it == by_name.end())
            throw DataError("test manifest has no image matching " + ref.entries[i].path);
        const Image test = load_manifest_images(test_manifest, {test_entries[it->second]}).front();
        if (!test.same_shape(ref.images[i]))
            throw DataError("shape mismatch for " + name);
        const QualityScore q = quality(ref.images[i], test, peak);
        psnrs.push_back(q.psnr_db);
        ssims.push_back(q.ssim);
        csv += ref.entries[i].path + "," + fmt(q.psnr_db) + "," + fmt(q.ssim) + "\n";
    }
    const double mean_psnr = pairwise_sum(psnrs) / static_cast<double>(psnrs.size());
    const double mean_ssim = pairwise_sum(ssims) / static_cast<double>(ssims.size());
    csv += "MEAN," + fmt(mean_psnr) + "," + fmt(mean_ssim) + "\n";

    const fs::path out = output_dir(cfg);
    write_text(out / "metrics.csv", csv);
    log << "eval: " << psnrs.size() << " images, mean PSNR " << fmt(mean_psnr) << " dB, mean SSIM "
        << fmt(mean_ssim) << "\n";
}

bool cmd_validate(const RunConfig& cfg, std::ostream& log)
{
    const PhantomSpec spec = phantom_from_config(cfg);
    const Image x = phantom_image(spec, cfg.count("phantom_index"));
    const SeededStream root(cfg.u64("seed"));
    const double epsilon = cfg.real("epsilon");
    const ProbeKind probe = probe_from_config(cfg);

    std::vector<Estimator> estimators;
    for (const std::string& name : cfg.list("estimators"))
        estimators.push_back(parse_estimator(name));
    const auto gaussian_names = cfg.list("gaussian_denoisers");
    const auto poisson_names = cfg.list("poisson_denoisers");
    for (const auto& n : gaussian_names)
        study_denoiser(n, cfg);
    for (const auto& n : poisson_names)
        study_denoiser(n, cfg);

    std::string csv = study_csv_header() + "\n";
    bool complete = true;
    std::uint64_t combo = 0;
    for (const Estimator e : estimators) {
        const bool gaussian = e == Estimator::Sure || e == Estimator::McSure || e == Estimator::Esure
                              || e == Estimator::EsureMc;
        std::vector<NoiseSpec> noises;
        if (gaussian) {
            for (const double s : cfg.real_list("sigmas")) {
                if (e == Estimator::Sure || e == Estimator::McSure)
                    noises.emplace_back(noise::Gaussian{s});
                else
                    noises.emplace_back(noise::GaussianPair{s, s});
            }
        } else {
            for (const double t : cfg.real_list("peaks")) {
                if (e == Estimator::Pure)
                    noises.emplace_back(noise::Poisson{t});
                else
                    noises.emplace_back(noise::PoissonPair{t});
            }
        }
        const auto& names = gaussian ? gaussian_names : poisson_names;
        const std::size_t draws = gaussian ? cfg.count("draws") : cfg.count("poisson_draws");
        for (const NoiseSpec& noise : noises) {
            for (const std::string& dname : names) {
                const std::uint64_t index = combo++;
                if (!gaussian && dname == "soft") {
                    log << "validate: skipping " << estimator_name(e)
                        << " x soft: the soft threshold is only studied under Gaussian noise\n";
                    complete = false;
                    continue;
                }
                const Denoiser h = study_denoiser(dname, cfg);
                SeededStream rng = root.split(index);
                const StudyReport r = unbiasedness_study({e, epsilon, probe}, h, x, noise, draws, rng);
                csv += study_csv_row(r) + "\n";
                log << "validate: " << r.estimator_name << " " << r.denoiser_name << " "
                    << describe(noise) << " bias " << fmt(r.bias_in_stderr_units) << " se\n";
            }
        }
    }
    const fs::path out = output_dir(cfg);
    write_text(out / "validation.csv", csv);
    return complete;
}

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names = {"gen-data", "corrupt", "train",
                                                   "denoise",  "eval",    "validate"};
    return names;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log)
{
    try {
        if (name == "gen-data")
            cmd_gen_data(cfg, log);
        else if (name == "corrupt")
            cmd_corrupt(cfg, log);
        else if (name == "train")
            cmd_train(cfg, log);
        else if (name == "denoise")
            cmd_denoise(cfg, log);
        else if (name == "eval")
            cmd_eval(cfg, log);
        else if (name == "validate")
            return cmd_validate(cfg, log) ? kExitOk : kExitConfig;
        else
            throw ConfigError("unknown command '" + name + "'");
        return kExitOk;
    } catch (const NumericalError& e) {
        log << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DataError& e) {
        log << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        log << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitData;
    }
}

} // namespace rden
