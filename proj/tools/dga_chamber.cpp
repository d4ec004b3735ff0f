/*
 * dga-chamber command line: solve, sweep, validate-dipole, homogenize,
 * budget. Exit codes: 0 ok, 1 configuration error, 2 numerical failure.
 */
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dga/config.hpp"
#include "dga/errors.hpp"
#include "dga/scenario.hpp"
#include "dga/uncertainty.hpp"

namespace {

int run_budget(const std::string& path, const dga::run_options& opt)
{
    auto factors = dga::read_budget(path);
    auto r = dga::summarize(factors);
    dga::write_budget_report(std::cout, factors, r);
    std::filesystem::path dir = opt.output ? *opt.output : std::string("output");
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / "budget.csv");
    if (!os)
        throw dga::config_error("cannot write '" + (dir / "budget.csv").string() + "'");
    dga::write_budget_csv(os, factors, r);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Frequency-domain edge-element solver for anechoic chamber models"};
    app.fallthrough();
    app.require_subcommand(1);

    dga::run_options opt;
    std::string output;
    std::size_t threads = 1;
    bool dump = false;
    app.add_option("--threads", threads, "worker threads for the frequency loop")->check(CLI::PositiveNumber);
    app.add_flag("--dump-traces", dump, "write the Sigma edge traces per frequency");
    app.add_option("--output", output, "output directory (overrides the config)");

    std::string target;
    auto add = [&](const char* name, const char* help, const char* arg) {
        auto* s = app.add_subcommand(name, help);
        s->add_option(arg, target)->required();
        return s;
    };
    auto* solve = add("solve", "probe fields of the configured source", "config");
    auto* sweep = add("sweep", "all transmitter x receiver x polarization setups", "config");
    auto* validate = add("validate-dipole", "compare with the closed-form dipole field", "config");
    auto* homog = add("homogenize", "equivalent admittance of an absorber unit cell", "config");
    auto* budget = add("budget", "combine an uncertainty budget", "factors.csv");

    CLI11_PARSE(app, argc, argv);
    opt.threads = threads;
    opt.dump_traces = dump;
    if (!output.empty())
        opt.output = output;

    try
    {
        if (budget->parsed())
            return run_budget(target, opt);

        auto cfg = dga::load_config(target);
        if (solve->parsed())
            std::cout << dga::run_solve(cfg, opt).string() << "\n";
        else if (sweep->parsed())
        {
            auto r = dga::run_sweep(cfg, opt);
            std::cout << cfg.frequencies.size() << " frequencies x " << r.files.size() << " setups\n";
            for (const auto& f : r.files)
                std::cout << f.string() << "\n";
        }
        else if (validate->parsed())
        {
            auto c = dga::run_validation(cfg, opt);
            std::cout << c.csv.string() << "\nmax |diff| " << c.max_abs_diff_db << " dB over " << c.rows
                      << " probe rows\n";
        }
        else if (homog->parsed())
            std::cout << dga::run_homogenize(cfg, opt).string() << "\n";
        return 0;
    }
    catch (const dga::numerical_error& e)
    {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    catch (const dga::config_error& e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    }
}
