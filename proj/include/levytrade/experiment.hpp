#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levytrade/config.hpp"
#include "levytrade/ldoup_sim.hpp"
#include "levytrade/trading.hpp"
#include "levytrade/variance_reduction.hpp"

namespace levytrade {

/// A batch of candidate strategies sharing per-spread leg tables. Each
/// spread has an entry grid d and exit grid c; a leg table holds
/// d.size() * c.size() entries for each side. A strategy picks one entry
/// of each side's table per spread.
struct StrategyGrid
{
    struct Pick
    {
        std::array<std::uint32_t, 2> up{};    // per spread
        std::array<std::uint32_t, 2> down{};  // per spread
    };

    // Indexed [spread][side] with side 0 the short leg and 1 the long leg.
    std::vector<std::array<std::vector<double>, 2>> d_values;
    std::vector<std::array<std::vector<double>, 2>> c_values;
    std::vector<Pick> picks;
    std::vector<std::array<double, 2>> coords;  // search coordinates of each pick

    std::size_t size() const { return picks.size(); }
    /// Levels of strategy s for the given discount rate and penalty.
    StrategyLevels levels(std::size_t s, double r, double gamma) const;
};

/// Builds the strategies of `search` over the given axis values. For
/// symmetric searches y is ignored; for exit_entry x = c and y = d.
StrategyGrid make_strategy_grid(SearchKind search, std::span<const double> x,
                                std::span<const double> y, double c_fixed);

/// Accumulated Monte Carlo statistics of one strategy.
struct StrategyStats
{
    std::array<double, 4> power_sums{};  // sum P^k, k = 1..4
    std::array<double, 5> class_counts{};
    double entered = 0.0;
    double overshoot_sum = 0.0;
    double overshoot_sum2 = 0.0;
};

struct SurfacePoint
{
    std::array<double, 2> coords{};
    ValueEstimate estimate;
    double smoothed = 0.0;
    std::array<double, 5> class_share{};  // fractions in OutcomeClass order
    double overshoot_mean = 0.0;
    double overshoot_sd = 0.0;
    double entered_share = 0.0;
};

/// Per-path callback: (path index, simulated path, outcome of every
/// strategy on that path). Called concurrently for distinct paths.
using PathVisitor =
    std::function<void(std::size_t, const SpreadPath&, std::span<const TradeOutcome>)>;

/// Simulates paths 0..paths-1 from the scenario seed (path j always uses
/// substream j) and evaluates every strategy on each. Sums are reduced in
/// fixed block order, so the result does not depend on the thread count.
std::vector<StrategyStats> evaluate_strategies(const Scenario& scenario,
                                               const StrategyGrid& grid,
                                               const PathVisitor& visitor = {});

/// Statistics to value estimates for every strategy.
std::vector<SurfacePoint> summarize(const StrategyGrid& grid,
                                    std::span<const StrategyStats> stats, std::size_t paths,
                                    double gamma);

/// V-hat at every strategy of the grid, reusing the same paths for all.
std::vector<SurfacePoint> evaluate_value_surface(const Scenario& scenario,
                                                 const StrategyGrid& grid);

struct CvSummary
{
    std::size_t p_star = 0;
    double ratio = 0.0;
    double value = 0.0;
    double variance = 0.0;
    double coefficient_of_variation = 0.0;
    double d_star = 0.0;      // argmax of the control variate value curve
    double d_star_mc = 0.0;   // plain Monte Carlo argmax the search started from
    std::vector<std::size_t> p_grid;
    std::vector<double> ratios;  // R(p) at the plain Monte Carlo optimum
    std::vector<double> curve_d;
    std::vector<double> curve_value;
    std::vector<double> curve_se;
    std::vector<double> curve_smoothed;
};

struct OptimizationResult
{
    SearchKind search = SearchKind::symmetric_d;
    StrategyLevels best;
    std::array<double, 2> coords{};  // argmax in search coordinates
    SurfacePoint at_optimum;         // plain Monte Carlo
    std::vector<SurfacePoint> surface;  // coarse (or single) pass
    std::vector<SurfacePoint> refined;  // refine pass, empty if none
    std::optional<CvSummary> cv;
};

/// Grid search for the best levels: a coarse pass over the full range and a
/// local pass at the fine step around the coarse optimum (a single pass at
/// the fine step when that grid is small). One-dimensional value curves are
/// loess smoothed before the argmax when loess_span > 0. With cv set, the
/// control variate workflow follows: p is chosen at the plain optimum, then
/// the control variate value curve is maximized near it.
OptimizationResult optimize_levels(const Scenario& scenario);

/// Control variate estimates at symmetric entry levels d (exit scenario.c)
/// for every p in p_values, all from the same scenario.paths paths; result
/// [i][k] belongs to d[i] and p_values[k]. Requires an ou_vg scenario with cv.
std::vector<std::vector<CvEstimate>> cv_estimates(const Scenario& scenario,
                                                  std::span<const double> d,
                                                  std::span<const std::size_t> p_values);

/// Names of the value-surface coordinates for a search.
std::array<std::string, 2> coord_names(SearchKind search);

struct RunOptions
{
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<double> span;
    bool no_cv = false;
    std::optional<std::string> out_dir;
};

/// Applies command line overrides to a scenario.
Scenario apply_options(Scenario scenario, const RunOptions& options);

/// Full pipeline: optimize, then re-simulate at the optimum and write
/// value_curve.csv, outcomes.csv, summary.csv and paths_sample.csv to the
/// output directory.
OptimizationResult run_scenario(const Scenario& scenario);

/// Writes only paths_sample.csv for the scenario.
void write_path_samples(const Scenario& scenario);

/// One-line provenance comment placed at the top of every CSV.
std::string provenance_line(const Scenario& scenario);

/// Table ids accepted by run_table.
const std::vector<std::string>& table_ids();

struct TableOptions
{
    std::uint64_t seed = 1;
    std::size_t threads = 0;
    std::size_t paths = 10000;
    std::string out_dir = ".";
    std::optional<double> span;
};

struct TableResult
{
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Runs one of the experiment tables, writes <id>.csv to out_dir and returns
/// its rows. Throws ConfigError for an unknown id.
TableResult run_table(const std::string& id, const TableOptions& options);

/// Scenarios used by the tables, exposed for tests.
Scenario example1_scenario();
Scenario jump_scenario(double b);
Scenario asymmetry_scenario(double mu);
Scenario exit_level_scenario(double r);
Scenario bivariate_scenario(double rho);
Scenario bivariate_equal_scenario(double rho);

}  // namespace levytrade
