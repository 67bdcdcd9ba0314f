#include <cmath>
#include <filesystem>
#include <fstream>

#include "levytrade/csv.hpp"
#include "levytrade/errors.hpp"
#include "levytrade/experiment.hpp"

namespace levytrade {
namespace {

Scenario vg_scenario(double b, double mu)
{
    Scenario sc;
    sc.model = ModelKind::ou_vg;
    sc.vg = OuVgParams{1.0, b, mu, 0.015, -mu};
    sc.search = SearchKind::symmetric_d;
    return sc;
}

Scenario wvag_scenario(double a, double alpha1, double alpha2, double mu1, double mu2,
                       double s11, double s22, double rho)
{
    Scenario sc;
    sc.model = ModelKind::ou_wvag;
    sc.wvag = OuWvagParams::bivariate(1.0, a, alpha1, alpha2, mu1, mu2, s11, s22, rho, -mu1, -mu2);
    sc.grid.inner_delta = 0.001;
    sc.x0 = {0.0, 0.0};
    return sc;
}

void apply(Scenario& sc, const TableOptions& o, const std::string& name)
{
    sc.seed = o.seed;
    sc.threads = o.threads;
    sc.paths = o.paths;
    sc.name = name;
    if (o.span && (sc.search == SearchKind::symmetric_d
                   || sc.search == SearchKind::bivariate_symmetric_d))
        sc.loess_span = *o.span;
}

double se(const SurfacePoint& p)
{
    return std::sqrt(p.estimate.variance_of_estimator);
}

TableResult cv_table(const TableOptions& o)
{
    TableResult t;
    t.columns = {"b", "mu", "d_star", "p_star", "r_star", "value_cv", "cv_coefficient"};
    const std::array<std::array<double, 2>, 5> rows{
        {{3, -0.05}, {2, -0.05}, {1, -0.05}, {1, -0.5}, {1, -1}}};
    for (auto const& [b, mu] : rows)
    {
        Scenario sc = example1_scenario();
        sc.vg = OuVgParams{1.0, b, mu, 0.015, -mu};
        apply(sc, o, "cv_table");
        OptimizationResult const res = optimize_levels(sc);
        auto const& cv = *res.cv;
        t.rows.push_back({b, mu, cv.d_star, static_cast<double>(cv.p_star), cv.ratio, cv.value,
                          cv.coefficient_of_variation});
    }
    return t;
}

TableResult asym_table(const TableOptions& o)
{
    TableResult t;
    t.columns = {"mu", "skew", "d_plus_star", "d_minus_star", "value", "se"};
    for (double mu : {-0.5, -0.2, -0.05, 0.0})
    {
        Scenario sc = asymmetry_scenario(mu);
        apply(sc, o, "asym_table");
        OptimizationResult const res = optimize_levels(sc);
        t.rows.push_back({mu, stationary_skewness(sc.vg), res.coords[0], res.coords[1],
                          res.at_optimum.estimate.value, se(res.at_optimum)});
    }
    return t;
}

TableResult jump_table(const TableOptions& o)
{
    TableResult t;
    t.columns = {"b", "d_star", "value", "se", "overshoot_mean", "overshoot_sd", "overshoot_se"};
    for (double b : {1.0, 5.0, 100.0})
    {
        Scenario sc = jump_scenario(b);
        apply(sc, o, "jump_table");
        OptimizationResult const res = optimize_levels(sc);
        auto const& at = res.at_optimum;
        double const n = at.entered_share * static_cast<double>(sc.paths);
        t.rows.push_back({b, res.coords[0], at.estimate.value, se(at), at.overshoot_mean,
                          at.overshoot_sd, n > 0 ? at.overshoot_sd / std::sqrt(n) : 0.0});
    }
    return t;
}

TableResult bivariate_table(const TableOptions& o)
{
    TableResult t;
    t.columns = {"rho",       "corr",      "value",     "se",       "d1_star",
                 "d2_star",   "pct_only1", "pct_only2", "pct_both", "pct_neither"};
    for (double rho : {0.9, 0.3, 0.0, -0.3, -0.9})
    {
        Scenario sc = bivariate_scenario(rho);
        apply(sc, o, "bivariate_table");
        OptimizationResult const res = optimize_levels(sc);
        auto const& at = res.at_optimum;
        auto pct = [&](OutcomeClass c) { return 100.0 * at.class_share[static_cast<std::size_t>(c)]; };
        t.rows.push_back({rho, stationary_cross_correlation(sc.wvag), at.estimate.value, se(at),
                          res.coords[0], res.coords[1], pct(OutcomeClass::traded_spread1_only),
                          pct(OutcomeClass::traded_spread2_only), pct(OutcomeClass::traded_both),
                          pct(OutcomeClass::traded_neither)});
    }
    return t;
}

TableResult bivariate_equal_table(const TableOptions& o)
{
    TableResult t;
    t.columns = {"rho", "corr", "value", "se", "d_star"};
    for (double rho : {0.99, 0.9, 0.3, 0.0, -0.3, -0.9})
    {
        Scenario sc = bivariate_equal_scenario(rho);
        apply(sc, o, "bivariate_equal_table");
        OptimizationResult const res = optimize_levels(sc);
        t.rows.push_back({rho, stationary_cross_correlation(sc.wvag),
                          res.at_optimum.estimate.value, se(res.at_optimum), res.coords[0]});
    }
    return t;
}

}  // namespace

Scenario example1_scenario()
{
    Scenario sc = vg_scenario(1.0, -0.5);
    sc.gamma = 0.1;
    CvScenario cv;
    cv.p_grid.clear();
    for (std::size_t p = 10; p <= 200; p += 10)
        cv.p_grid.push_back(p);
    cv.window = 0.03;
    sc.cv = cv;
    sc.name = "example1";
    return sc;
}

Scenario jump_scenario(double b)
{
    Scenario sc = vg_scenario(b, 0.0);
    sc.name = "jump";
    return sc;
}

Scenario asymmetry_scenario(double mu)
{
    Scenario sc = vg_scenario(5.0, mu);
    sc.search = SearchKind::asymmetric_d;
    sc.name = "asymmetry";
    return sc;
}

Scenario exit_level_scenario(double r)
{
    Scenario sc = vg_scenario(5.0, 0.0);
    sc.search = SearchKind::exit_entry;
    sc.x0 = {0.25};
    sc.r = r;
    sc.d_lo = 0.01;
    sc.d_hi = 0.4;
    sc.c_lo = 0.0;
    sc.c_hi = 0.3;
    sc.name = "exit_level";
    return sc;
}

Scenario bivariate_scenario(double rho)
{
    Scenario sc = wvag_scenario(2.5, 0.2, 0.3, 0.0, -0.2, 0.015, 0.02, rho);
    sc.search = SearchKind::bivariate_d;
    sc.d_lo = 0.1;
    sc.name = "bivariate";
    return sc;
}

Scenario bivariate_equal_scenario(double rho)
{
    Scenario sc = wvag_scenario(6.65, 0.15, 0.15, 0.0, 0.0, 0.015, 0.015, rho);
    sc.search = SearchKind::bivariate_symmetric_d;
    sc.r = 1.0;
    sc.d_lo = 0.005;
    sc.d_hi = 0.15;
    sc.name = "bivariate_equal";
    return sc;
}

const std::vector<std::string>& table_ids()
{
    static const std::vector<std::string> ids{"cv_table", "asym_table", "jump_table",
                                              "bivariate_table", "bivariate_equal_table"};
    return ids;
}

TableResult run_table(const std::string& id, const TableOptions& o)
{
    TableResult t;
    if (id == "cv_table")
        t = cv_table(o);
    else if (id == "asym_table")
        t = asym_table(o);
    else if (id == "jump_table")
        t = jump_table(o);
    else if (id == "bivariate_table")
        t = bivariate_table(o);
    else if (id == "bivariate_equal_table")
        t = bivariate_equal_table(o);
    else
        throw ConfigError("table", "unknown table id '" + id + "'");

    std::error_code ec;
    std::filesystem::create_directories(o.out_dir, ec);
    std::ofstream os(std::filesystem::path(o.out_dir) / (id + ".csv"));
    if (!os)
        throw ConfigError("output.dir", "cannot write '" + id + ".csv' in '" + o.out_dir + "'");
    os << "# seed=" << o.seed << " paths=" << o.paths << " table=" << id << '\n';
    os << csv_row(t.columns) << '\n';
    for (auto const& row : t.rows)
    {
        std::vector<std::string> cells;
        for (double v : row)
            cells.push_back(fmt6(v));
        os << csv_row(cells) << '\n';
    }
    return t;
}

}  // namespace levytrade
