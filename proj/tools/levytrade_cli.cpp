#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "levytrade/config.hpp"
#include "levytrade/csv.hpp"
#include "levytrade/errors.hpp"
#include "levytrade/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Flags
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<std::string> out;
    std::optional<double> span;
    bool no_cv = false;
};

void add_run_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--seed", f.seed, "Master seed (overrides mc.seed)");
    cmd->add_option("--threads", f.threads, "Worker threads, 0 = all cores");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--span", f.span, "Loess span for value curves, 0 disables")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--no-cv", f.no_cv, "Skip the control variate workflow");
}

levytrade::Scenario load(const Flags& f)
{
    levytrade::RunOptions o;
    o.seed = f.seed;
    o.threads = f.threads;
    o.out_dir = f.out;
    o.span = f.span;
    o.no_cv = f.no_cv;
    return levytrade::apply_options(levytrade::load_scenario(f.config), o);
}

void print_result(const levytrade::Scenario& sc, const levytrade::OptimizationResult& res)
{
    auto const names = levytrade::coord_names(sc.search);
    std::cout << names[0] << "* = " << levytrade::fmt6(res.coords[0]);
    if (!names[1].empty())
        std::cout << ", " << names[1] << "* = " << levytrade::fmt6(res.coords[1]);
    std::cout << ", V = " << levytrade::fmt6(res.at_optimum.estimate.value);
    if (res.cv)
        std::cout << ", V_cv = " << levytrade::fmt6(res.cv->value)
                  << ", R = " << levytrade::fmt6(res.cv->ratio) << ", p* = " << res.cv->p_star;
    std::cout << "\nwrote results to " << sc.out_dir << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo pairs trading on Levy-driven OU spreads"};
    app.require_subcommand(1);
    Flags f;

    auto* simulate = app.add_subcommand("simulate", "Simulate sample paths to paths_sample.csv");
    simulate->add_option("--config", f.config, "Scenario INI file")->required();
    add_run_flags(simulate, f);

    auto* optimize = app.add_subcommand("optimize", "Optimize trading levels and write CSVs");
    optimize->add_option("--config", f.config, "Scenario INI file")->required();
    add_run_flags(optimize, f);

    std::string table_id;
    auto* table = app.add_subcommand("table", "Reproduce one of the experiment tables");
    table->add_option("id", table_id, "Table id")->required();
    std::size_t table_paths = 10000;
    table->add_option("--paths", table_paths, "Monte Carlo paths per scenario")
        ->check(CLI::Range(std::size_t{100}, std::size_t{100000000}));
    add_run_flags(table, f);

    auto* validate = app.add_subcommand("validate-config", "Check a scenario file and exit");
    validate->add_option("--config", f.config, "Scenario INI file")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*validate)
        {
            auto const sc = levytrade::load_scenario(f.config);
            std::cout << "ok: " << levytrade::to_string(sc.model) << ", "
                      << levytrade::to_string(sc.search) << ", " << sc.paths << " paths\n";
        }
        else if (*simulate)
        {
            auto const sc = load(f);
            levytrade::write_path_samples(sc);
            std::cout << "wrote " << sc.out_dir << "/paths_sample.csv\n";
        }
        else if (*optimize)
        {
            auto const sc = load(f);
            print_result(sc, levytrade::run_scenario(sc));
        }
        else if (*table)
        {
            levytrade::TableOptions o;
            o.seed = f.seed.value_or(1);
            o.threads = f.threads.value_or(0);
            o.paths = table_paths;
            o.out_dir = f.out.value_or(".");
            o.span = f.span;
            auto const t = levytrade::run_table(table_id, o);
            std::cout << levytrade::csv_row(t.columns) << '\n';
            for (auto const& row : t.rows)
            {
                std::vector<std::string> cells;
                for (double v : row)
                    cells.push_back(levytrade::fmt6(v));
                std::cout << levytrade::csv_row(cells) << '\n';
            }
        }
    }
    catch (const levytrade::ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const levytrade::NumericalError& e)
    {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    }
    return kOk;
}
