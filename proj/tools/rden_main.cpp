// Command-line front end: rden <command> [--config FILE] [--seed N] [--out DIR] [--set key=value]...

#include "rden/commands.hpp"
#include "rden/config.hpp"
#include "rden/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv)
{
    CLI::App app{"Risk-estimator denoising toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    bool list_keys = false;
    app.add_flag("--list-keys", list_keys, "Print every configuration key with its default");

    struct Options {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::string out;
        std::vector<std::string> overrides;
    };
    Options opts;

    const char* descriptions[] = {
        "Generate seeded ellipse phantoms and a manifest",
        "Corrupt a manifest's images with a noise model",
        "Train the denoising network with a chosen loss",
        "Apply trained weights to a manifest",
        "Score a test manifest against a reference manifest (PSNR, SSIM)",
        "Run the estimator unbiasedness study on a phantom",
    };
    std::size_t i = 0;
    for (const std::string& name : rden::command_names()) {
        CLI::App* sub = app.add_subcommand(name, descriptions[i++]);
        sub->add_option("--config", opts.config, "key = value configuration file");
        sub->add_option("--seed", opts.seed, "Root seed");
        sub->add_option("--out", opts.out, "Output directory");
        sub->add_option("--set", opts.overrides, "Override a configuration key (key=value)");
    }

    if (argc > 1 && std::string(argv[1]) == "--list-keys") {
        std::cout << rden::RunConfig::schema_listing();
        return rden::kExitOk;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? rden::kExitOk : rden::kExitConfig;
    }

    rden::RunConfig cfg;
    try {
        if (!opts.config.empty())
            cfg = rden::RunConfig::load(opts.config);
        if (opts.seed)
            cfg.set("seed", std::to_string(*opts.seed));
        if (!opts.out.empty())
            cfg.set("out", opts.out);
        for (const std::string& o : opts.overrides)
            cfg.apply_override(o);
    } catch (const rden::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rden::kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    return rden::run_command(command, cfg, std::cerr);
}
