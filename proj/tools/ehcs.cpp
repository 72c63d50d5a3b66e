#include <ehcs/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace cli = ehcs::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Electron-hole coherent states: verification and numerics"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config, out = ".";
    double scale = 1.0;
    std::uint64_t seed = 1;
    app.add_option("--config", config, "JSON config file");
    app.add_option("--out", out, "output directory");
    app.add_option("--tolerance-scale", scale, "multiplier on every tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "RNG seed for the verify suites");

    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "run identity checks");
    verify->add_option("suite", suite, "all, overlaps, resolutions, expectations, uncertainty, zmap, csrep, symbols");
    auto* scatter = app.add_subcommand("scatter", "stationary Andreev scattering at an NS interface");
    auto* evolve = app.add_subcommand("evolve", "split-step time evolution of coherent wave packets");
    auto* phasespace = app.add_subcommand("phasespace", "reduced Husimi fields of coherent states");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kUsage;
    }

    cli::RunContext ctx{out, scale, &std::cout};
    try {
        if (verify->parsed()) return cli::cmd_verify(suite, ctx, seed);

        const std::string name = scatter->parsed() ? "scatter" : evolve->parsed() ? "evolve" : "phasespace";
        if (config.empty()) {
            std::cerr << "ehcs " << name << ": --config is required\n\n" << app.help();
            return cli::kUsage;
        }
        const auto cfg = cli::load_config(config);
        if (cfg.is_null()) {
            std::cerr << "ehcs " << name << ": config is empty\n\n" << app.help();
            return cli::kUsage;
        }
        if (cfg.contains("command") && cfg.at("command") != name)
            throw ehcs::ValidationError("config is for '" + cfg.at("command").get<std::string>() + "', not '" + name + "'");
        if (scatter->parsed()) return cli::cmd_scatter(cfg, ctx);
        if (evolve->parsed()) return cli::cmd_evolve(cfg, ctx);
        (void)phasespace;
        return cli::cmd_phasespace(cfg, ctx);
    } catch (const ehcs::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kUsage;
    } catch (const cli::json::exception& e) {
        std::cerr << "error: bad config value: " << e.what() << '\n';
        return cli::kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kToleranceFailure;
    }
}
