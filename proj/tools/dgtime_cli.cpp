// dgtime: experiment driver.
//
//   dgtime converge     --config FILE [--out DIR] [--seed N] [--quiet]
//   dgtime maxreg       ...
//   dgtime oracle-check ...
//   dgtime interp-check ...
//
// Exit status: 0 all asserted properties hold, 2 a property failed,
// 1 usage or configuration error.

#include "dgtime/errors.hpp"
#include "dgtime/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

fs::path resolve(const Options& opt, const std::string& name)
{
    const fs::path p(name);
    return p.is_absolute() ? p : fs::path(opt.out) / p;
}

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

int finish(const Options& opt, const std::vector<dgt::PropertyResult>& props)
{
    if (!opt.quiet)
        dgt::write_properties(std::cout, props);
    auto out = open_output(resolve(opt, "properties.txt"));
    dgt::write_properties(out, props);
    const bool ok = dgt::all_passed(props);
    if (!ok && opt.quiet)
        for (const auto& p : props)
            if (!p.passed)
                std::cerr << "FAIL  " << p.name << ": " << p.detail << '\n';
    return ok ? 0 : 2;
}

dgt::RunConfig load(const Options& opt)
{
    auto cfg = opt.config.empty() ? dgt::RunConfig{} : dgt::load_config(opt.config);
    if (opt.seed)
        cfg.output.seed = *opt.seed;
    return cfg;
}

int run_sweep(const Options& opt, bool maxreg)
{
    const auto cfg = load(opt);
    const auto report = maxreg ? dgt::run_maxreg_sweep(cfg) : dgt::run_convergence(cfg);
    {
        auto out = open_output(resolve(opt, cfg.output.csv_path));
        dgt::write_error_csv(out, report.rows);
    }
    if (!report.rates.empty()) {
        auto out = open_output(resolve(opt, "rates.csv"));
        dgt::write_rates_csv(out, report.rates);
    }
    dgt::write_plot_data(resolve(opt, cfg.output.plotdata_path), report.rows);
    return finish(opt, report.properties);
}

int run_oracle(const Options& opt)
{
    return finish(opt, dgt::run_oracle_check(load(opt)).properties);
}

int run_interp(const Options& opt)
{
    const auto cfg = load(opt);
    const auto report = dgt::run_interp_check(cfg);
    {
        auto out = open_output(resolve(opt, cfg.output.csv_path));
        dgt::write_interp_csv(out, report.rows);
    }
    {
        auto out = open_output(resolve(opt, "rates.csv"));
        dgt::write_rates_csv(out, report.rates);
    }
    return finish(opt, report.properties);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"dG time-stepping experiments"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory (default: current directory)");
        sub->add_option("--seed", opt.seed, "override output.seed");
        sub->add_flag("--quiet", opt.quiet, "print failures only");
    };
    auto* converge = app.add_subcommand("converge", "convergence sweep with a manufactured solution");
    auto* maxreg = app.add_subcommand("maxreg", "max-regularity ratio sweep (u0 = 0)");
    auto* oracle = app.add_subcommand("oracle-check", "Galerkin vs averaged-Radau and exactness checks");
    auto* interp = app.add_subcommand("interp-check", "interpolation rates and norm toolkit");
    for (auto* sub : {converge, maxreg, oracle, interp})
        add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (converge->parsed())
            return run_sweep(opt, false);
        if (maxreg->parsed())
            return run_sweep(opt, true);
        if (oracle->parsed())
            return run_oracle(opt);
        return run_interp(opt);
    } catch (const dgt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
