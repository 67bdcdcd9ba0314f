#include "levytrade/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "levytrade/csv.hpp"
#include "levytrade/errors.hpp"
#include "levytrade/loess.hpp"
#include "levytrade/parallel.hpp"
#include "levytrade/spectral.hpp"

namespace levytrade {
namespace {

// A fine grid up to this many strategies is searched in one pass.
constexpr std::size_t kSinglePassLimit = 4000;

bool is_one_dimensional(SearchKind s)
{
    return s == SearchKind::symmetric_d || s == SearchKind::bivariate_symmetric_d;
}

/// Per-worker simulation and evaluation state, reused across blocks.
struct Worker
{
    std::unique_ptr<OuVgPathSimulator> vg;
    std::unique_ptr<OuWvagPathSimulator> wvag;
    SpreadPath path;
    LegEvaluator evaluator;
    std::vector<std::array<std::vector<LegResult>, 2>> tables;
    std::vector<std::vector<double>> series;
    std::vector<StrategyStats> acc;
    std::vector<TradeOutcome> outcomes;

    explicit Worker(const Scenario& sc)
    {
        if (sc.model == ModelKind::ou_vg)
            vg = std::make_unique<OuVgPathSimulator>(sc.vg, sc.grid);
        else
            wvag = std::make_unique<OuWvagPathSimulator>(sc.wvag, sc.grid);
        tables.resize(sc.dim());
        series.resize(sc.dim());
    }

    void simulate(const Scenario& sc, std::size_t j)
    {
        Engine rng = make_substream(sc.seed, j);
        if (vg)
            vg->simulate(sc.x0[0], rng, path);
        else
            wvag->simulate(sc.x0, rng, path);
    }
};

void accumulate(StrategyStats& st, const TradeOutcome& o)
{
    double const p = o.profit;
    double const p2 = p * p;
    st.power_sums[0] += p;
    st.power_sums[1] += p2;
    st.power_sums[2] += p2 * p;
    st.power_sums[3] += p2 * p2;
    st.class_counts[static_cast<std::size_t>(o.outcome_class)] += 1.0;
    if (o.entered)
    {
        st.entered += 1.0;
        st.overshoot_sum += o.overshoot;
        st.overshoot_sum2 += o.overshoot * o.overshoot;
    }
}

void merge(StrategyStats& into, const StrategyStats& from)
{
    for (std::size_t i = 0; i < 4; ++i)
        into.power_sums[i] += from.power_sums[i];
    for (std::size_t i = 0; i < 5; ++i)
        into.class_counts[i] += from.class_counts[i];
    into.entered += from.entered;
    into.overshoot_sum += from.overshoot_sum;
    into.overshoot_sum2 += from.overshoot_sum2;
}

std::vector<double> restrict_axis(std::vector<double> values, double lo, double hi)
{
    std::vector<double> out;
    for (double v : values)
        if (v >= lo - 1e-12 && v <= hi + 1e-12)
            out.push_back(std::clamp(v, lo, hi));
    return out;
}

/// lo..hi axes of the search at the given step.
std::array<std::vector<double>, 2> search_axes(const Scenario& sc, double step)
{
    switch (sc.search)
    {
    case SearchKind::symmetric_d: return {sc.d_range(0, step).values(), {}};
    case SearchKind::asymmetric_d:
        return {sc.d_range(0, step).values(), sc.d_range(0, step).values()};
    case SearchKind::exit_entry:
        return {sc.c_range(step).values(), sc.d_range(0, step).values()};
    case SearchKind::bivariate_d:
        return {sc.d_range(0, step).values(), sc.d_range(1, step).values()};
    case SearchKind::bivariate_symmetric_d:
    {
        GridRange g = sc.d_range(0, step);
        g.hi = std::max(g.hi, sc.d_range(1, step).hi);
        return {g.values(), {}};
    }
    }
    return {};
}

/// Smoothed values (loess along a 1-D curve when requested) and the index of
/// the first maximum.
std::size_t pick_best(std::vector<SurfacePoint>& pts, bool one_dim, double span)
{
    for (auto& p : pts)
        p.smoothed = p.estimate.value;
    if (one_dim && span > 0.0 && pts.size() >= 3)
    {
        std::vector<double> xs(pts.size()), ys(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
        {
            xs[i] = pts[i].coords[0];
            ys[i] = pts[i].estimate.value;
        }
        auto const sm = loess_smooth(xs, ys, span);
        for (std::size_t i = 0; i < pts.size(); ++i)
            pts[i].smoothed = sm[i];
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].smoothed > pts[best].smoothed)
            best = i;
    return best;
}

std::size_t pick_best_values(std::span<const double> xs, std::span<const double> ys,
                             double span, std::vector<double>& smoothed)
{
    smoothed.assign(ys.begin(), ys.end());
    if (span > 0.0 && ys.size() >= 3)
        smoothed = loess_smooth(xs, ys, span);
    return static_cast<std::size_t>(std::max_element(smoothed.begin(), smoothed.end())
                                    - smoothed.begin());
}

// Paths of one run seen at the union of the control times of a p grid,
// with the profits of symmetric strategies at the given entry levels.
class CvContext
{
  public:
    CvContext(const Scenario& sc, std::vector<double> levels, std::span<const std::size_t> p_grid)
        : sc_(sc), levels_(std::move(levels)), base_(vg_char_exponent(sc.vg))
    {
        std::size_t const q = sc.grid.steps();
        for (std::size_t p : p_grid)
        {
            auto const idx = cv_time_indices(q, p);
            union_idx_.insert(union_idx_.end(), idx.begin(), idx.end());
        }
        std::sort(union_idx_.begin(), union_idx_.end());
        union_idx_.erase(std::unique(union_idx_.begin(), union_idx_.end()), union_idx_.end());
        for (std::size_t u = 0; u < union_idx_.size(); ++u)
            column_of_[union_idx_[u]] = u;

        grid_ = make_strategy_grid(SearchKind::symmetric_d, levels_, {}, sc.c);
        std::size_t const m = sc.paths;
        std::size_t const nw = levels_.size();
        std::size_t const nu = union_idx_.size();
        profits_.resize(m * nw);
        xs_.resize(m * nu);
        auto visitor = [&](std::size_t j, const SpreadPath& path,
                           std::span<const TradeOutcome> outcomes) {
            for (std::size_t s = 0; s < nw; ++s)
                profits_[j * nw + s] = outcomes[s].profit;
            for (std::size_t u = 0; u < nu; ++u)
                xs_[j * nu + u] = path.value(union_idx_[u]);
        };
        stats_ = evaluate_strategies(sc, grid_, visitor);
    }

    const StrategyGrid& grid() const { return grid_; }
    const std::vector<StrategyStats>& stats() const { return stats_; }

    CvEstimate estimate(std::size_t w, std::size_t p)
    {
        std::size_t const m = sc_.paths;
        std::size_t const nw = levels_.size();
        std::size_t const nu = union_idx_.size();
        auto const idx = cv_time_indices(sc_.grid.steps(), p);
        Eigen::MatrixXd values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < p; ++i)
                values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                    xs_[j * nu + column_of_.at(idx[i])];
        bool const with_events = sc_.cv->include_events;
        EventProbabilities probs;
        std::vector<EventIndicators> events;
        if (with_events)
        {
            // Event controls act on the innovations between consecutive
            // control times; rounding gives at most two distinct step lengths.
            auto const steps = control_event_levels(stationary_mean(sc_.vg), sc_.vg.lambda,
                                                    sc_.grid.delta, idx, sc_.c, sc_.c,
                                                    levels_[w], levels_[w]);
            probs = event_probabilities(steps, [&](std::size_t i, double x) {
                return cdf_for_steps(idx[i] - (i == 0 ? 0 : idx[i - 1]), x);
            });
            events.resize(m);
            std::vector<double> row(p), z(p);
            for (std::size_t j = 0; j < m; ++j)
            {
                for (std::size_t i = 0; i < p; ++i)
                    row[i] = values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
                control_innovations(row, sc_.x0[0], sc_.vg.lambda, sc_.grid.delta, idx, z);
                events[j] = classify_innovations(z, steps);
            }
        }
        CvConfig const cfg{p, with_events, sc_.gamma};
        CvDesign const design = build_cv_design(sc_.vg, sc_.x0[0], sc_.grid.delta, idx, values,
                                                events, probs, cfg);
        std::vector<double> y(m);
        for (std::size_t j = 0; j < m; ++j)
            y[j] = profits_[j * nw + w];
        return cv_value_function(y, design, sc_.gamma);
    }

  private:
    double cdf_for_steps(std::size_t k, double x)
    {
        auto const key = std::make_pair(k, x);
        auto const it = cdf_cache_.find(key);
        if (it != cdf_cache_.end())
            return it->second;
        auto ce = exponents_.find(k);
        if (ce == exponents_.end())
            ce = exponents_
                     .emplace(k, zstar_char_exponent(base_, sc_.vg.lambda,
                                                     static_cast<double>(k) * sc_.grid.delta))
                     .first;
        double const f = cdf_from_cf(ce->second, x);
        cdf_cache_.emplace(key, f);
        return f;
    }

    const Scenario& sc_;
    std::vector<double> levels_;
    CharExponent base_;
    std::vector<std::size_t> union_idx_;
    std::map<std::size_t, std::size_t> column_of_;
    StrategyGrid grid_;
    std::vector<double> profits_;
    std::vector<double> xs_;
    std::vector<StrategyStats> stats_;
    std::map<std::size_t, CharExponent> exponents_;
    std::map<std::pair<std::size_t, double>, double> cdf_cache_;
};

void run_cv_workflow(const Scenario& sc, OptimizationResult& res)
{
    CvScenario const& cvs = *sc.cv;
    double const d_mc = res.coords[0];
    GridRange const full = sc.d_range(0, sc.fine_step);
    std::vector<double> window = restrict_axis(
        GridRange{d_mc - cvs.window, d_mc + cvs.window + 1e-12, sc.fine_step}.values(), full.lo,
        full.hi);
    std::size_t d_mc_index = 0;
    for (std::size_t i = 0; i < window.size(); ++i)
        if (std::abs(window[i] - d_mc) < std::abs(window[d_mc_index] - d_mc))
            d_mc_index = i;

    CvContext ctx(sc, window, cvs.p_grid);
    std::size_t const nw = window.size();

    CvSummary cv;
    cv.d_star_mc = d_mc;
    cv.p_grid = cvs.p_grid;
    CvPointChoice const choice = optimize_cv_points(
        cvs.p_grid, [&](std::size_t p) { return ctx.estimate(d_mc_index, p).ratio; });
    cv.p_star = choice.p_star;
    cv.ratios = choice.ratios;

    std::vector<CvEstimate> curve;
    curve.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w)
    {
        curve.push_back(ctx.estimate(w, cv.p_star));
        cv.curve_d.push_back(window[w]);
        cv.curve_value.push_back(curve.back().value);
        cv.curve_se.push_back(std::sqrt(curve.back().var_cv));
    }
    std::size_t const best = pick_best_values(cv.curve_d, cv.curve_value, sc.loess_span,
                                              cv.curve_smoothed);
    cv.d_star = window[best];
    cv.value = curve[best].value;
    cv.variance = curve[best].var_cv;
    cv.ratio = curve[best].ratio;
    cv.coefficient_of_variation = std::sqrt(cv.variance) / std::abs(cv.value);

    // The control variate optimum becomes the reported one; its plain Monte
    // Carlo statistics come from the same paths.
    res.coords = {cv.d_star, 0.0};
    res.best = ctx.grid().levels(best, sc.r, sc.gamma);
    res.at_optimum = summarize(ctx.grid(), ctx.stats(), sc.paths, sc.gamma)[best];
    res.cv = std::move(cv);
}

std::string outcome_row(std::size_t j, const TradeOutcome& o)
{
    return csv_row({std::to_string(j), fmt6(o.tau_entry), fmt6(o.tau_exit), fmt6(o.profit),
                    fmt6(o.overshoot), std::string(to_string(o.outcome_class)),
                    fmt6(o.weights[0]), fmt6(o.weights[1])});
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw ConfigError("output.dir", "cannot create '" + dir + "': " + ec.message());
}

std::ofstream open_output(const std::string& dir, const std::string& name)
{
    ensure_dir(dir);
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out)
        throw ConfigError("output.dir", "cannot write '" + name + "' in '" + dir + "'");
    return out;
}

void write_value_curve(std::ostream& os, const Scenario& sc, const OptimizationResult& res)
{
    auto const names = coord_names(sc.search);
    bool const one_dim = is_one_dimensional(sc.search);
    os << provenance_line(sc) << '\n';
    os << "pass," << names[0];
    if (!one_dim)
        os << ',' << names[1];
    os << ",value,se,smoothed\n";
    auto emit = [&](const char* pass, const std::vector<SurfacePoint>& pts) {
        for (auto const& p : pts)
        {
            os << pass << ',' << fmt6(p.coords[0]);
            if (!one_dim)
                os << ',' << fmt6(p.coords[1]);
            os << ',' << fmt6(p.estimate.value) << ','
               << fmt6(std::sqrt(p.estimate.variance_of_estimator)) << ',' << fmt6(p.smoothed)
               << '\n';
        }
    };
    emit(res.refined.empty() ? "fine" : "coarse", res.surface);
    emit("fine", res.refined);
    if (res.cv)
        for (std::size_t i = 0; i < res.cv->curve_d.size(); ++i)
            os << "cv," << fmt6(res.cv->curve_d[i]) << ',' << fmt6(res.cv->curve_value[i]) << ','
               << fmt6(res.cv->curve_se[i]) << ',' << fmt6(res.cv->curve_smoothed[i]) << '\n';
}

void write_summary(std::ostream& os, const Scenario& sc, const OptimizationResult& res)
{
    os << provenance_line(sc) << '\n' << "key,value\n";
    auto kv = [&](const std::string& k, const std::string& v) { os << k << ',' << v << '\n'; };
    auto const names = coord_names(sc.search);
    kv("search", to_string(sc.search));
    kv(names[0] + "_star", fmt6(res.coords[0]));
    if (!is_one_dimensional(sc.search))
        kv(names[1] + "_star", fmt6(res.coords[1]));
    auto const& at = res.at_optimum;
    kv("value_mc", fmt6(at.estimate.value));
    kv("se_mc", fmt6(std::sqrt(at.estimate.variance_of_estimator)));
    kv("mean_p", fmt6(at.estimate.mean_p));
    kv("mean_p2", fmt6(at.estimate.mean_p2));
    for (std::size_t c = 0; c < 5; ++c)
        kv(std::string("share_") + std::string(to_string(static_cast<OutcomeClass>(c))),
           fmt6(at.class_share[c]));
    kv("entered_share", fmt6(at.entered_share));
    kv("overshoot_mean", fmt6(at.overshoot_mean));
    kv("overshoot_sd", fmt6(at.overshoot_sd));
    if (res.cv)
    {
        auto const& cv = *res.cv;
        kv("d_star_mc", fmt6(cv.d_star_mc));
        kv("p_star", std::to_string(cv.p_star));
        kv("value_cv", fmt6(cv.value));
        kv("se_cv", fmt6(std::sqrt(cv.variance)));
        kv("ratio", fmt6(cv.ratio));
        kv("coefficient_of_variation", fmt6(cv.coefficient_of_variation));
        for (std::size_t i = 0; i < cv.p_grid.size(); ++i)
            kv("ratio_p" + std::to_string(cv.p_grid[i]), fmt6(cv.ratios[i]));
    }
    kv("paths", std::to_string(sc.paths));
    kv("seed", std::to_string(sc.seed));
}

}  // namespace

//---------------------------------------------------------------------------//

StrategyLevels StrategyGrid::levels(std::size_t s, double r, double gamma) const
{
    StrategyLevels out;
    out.r = r;
    out.gamma = gamma;
    for (std::size_t k = 0; k < d_values.size(); ++k)
    {
        auto unpack = [&](std::size_t side, std::uint32_t flat, double& c, double& d) {
            std::size_t const nc = c_values[k][side].size();
            d = d_values[k][side][flat / nc];
            c = c_values[k][side][flat % nc];
        };
        SpreadLevels lv;
        unpack(0, picks[s].up[k], lv.c_plus, lv.d_plus);
        unpack(1, picks[s].down[k], lv.c_minus, lv.d_minus);
        out.spreads.push_back(lv);
    }
    return out;
}

StrategyGrid make_strategy_grid(SearchKind search, std::span<const double> x,
                                std::span<const double> y, double c_fixed)
{
    StrategyGrid g;
    std::vector<double> const xs(x.begin(), x.end());
    std::vector<double> const ys(y.begin(), y.end());
    std::vector<double> const cf{c_fixed};
    auto u32 = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
    switch (search)
    {
    case SearchKind::symmetric_d:
        g.d_values = {{xs, xs}};
        g.c_values = {{cf, cf}};
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            g.picks.push_back({{u32(i), 0}, {u32(i), 0}});
            g.coords.push_back({xs[i], 0.0});
        }
        break;
    case SearchKind::asymmetric_d:
        g.d_values = {{xs, ys}};
        g.c_values = {{cf, cf}};
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < ys.size(); ++j)
            {
                g.picks.push_back({{u32(i), 0}, {u32(j), 0}});
                g.coords.push_back({xs[i], ys[j]});
            }
        break;
    case SearchKind::exit_entry:
        g.d_values = {{ys, ys}};
        g.c_values = {{xs, xs}};
        for (std::size_t i = 0; i < ys.size(); ++i)
            for (std::size_t j = 0; j < xs.size(); ++j)
                if (xs[j] < ys[i] - 1e-12)
                {
                    auto const flat = u32(i * xs.size() + j);
                    g.picks.push_back({{flat, 0}, {flat, 0}});
                    g.coords.push_back({xs[j], ys[i]});
                }
        break;
    case SearchKind::bivariate_d:
        g.d_values = {{xs, xs}, {ys, ys}};
        g.c_values = {{cf, cf}, {cf, cf}};
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < ys.size(); ++j)
            {
                g.picks.push_back({{u32(i), u32(j)}, {u32(i), u32(j)}});
                g.coords.push_back({xs[i], ys[j]});
            }
        break;
    case SearchKind::bivariate_symmetric_d:
        g.d_values = {{xs, xs}, {xs, xs}};
        g.c_values = {{cf, cf}, {cf, cf}};
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            g.picks.push_back({{u32(i), u32(i)}, {u32(i), u32(i)}});
            g.coords.push_back({xs[i], 0.0});
        }
        break;
    }
    return g;
}

std::vector<StrategyStats> evaluate_strategies(const Scenario& sc, const StrategyGrid& grid,
                                               const PathVisitor& visitor)
{
    std::size_t const dim = sc.dim();
    if (grid.d_values.size() != dim)
        throw std::invalid_argument("strategy grid and scenario dimension differ");
    std::size_t const q = sc.grid.steps();
    std::size_t const ns = grid.size();
    std::vector<double> const mu_bar = sc.mu_bar();
    std::vector<double> const discount = discount_table(sc.r, sc.grid.delta, q);
    std::size_t const threads = resolve_threads(sc.threads);
    std::size_t const blocks = block_count(sc.paths, kPathBlock);

    std::vector<std::unique_ptr<Worker>> workers(std::min(threads, std::max<std::size_t>(blocks, 1)));
    std::vector<StrategyStats> total(ns);

    auto run_block = [&](Worker& w, std::size_t block) {
        w.acc.assign(ns, StrategyStats{});
        if (visitor)
            w.outcomes.resize(ns);
        std::size_t const begin = block * kPathBlock;
        std::size_t const end = std::min(sc.paths, begin + kPathBlock);
        for (std::size_t j = begin; j < end; ++j)
        {
            w.simulate(sc, j);
            for (std::size_t k = 0; k < dim; ++k)
            {
                std::span<const double> series;
                if (dim == 1)
                    series = w.path.values;
                else
                {
                    w.series[k] = w.path.component(k);
                    series = w.series[k];
                }
                for (std::size_t side = 0; side < 2; ++side)
                    w.evaluator.evaluate(series, mu_bar[k],
                                         side == 0 ? Side::short_above : Side::long_below,
                                         grid.d_values[k][side], grid.c_values[k][side],
                                         discount, w.tables[k][side]);
            }
            for (std::size_t s = 0; s < ns; ++s)
            {
                auto const& pk = grid.picks[s];
                TradeOutcome const o =
                    dim == 1
                        ? combine_univariate(w.tables[0][0][pk.up[0]], w.tables[0][1][pk.down[0]],
                                             sc.grid.delta)
                        : combine_bivariate(w.tables[0][0][pk.up[0]], w.tables[0][1][pk.down[0]],
                                            w.tables[1][0][pk.up[1]], w.tables[1][1][pk.down[1]],
                                            sc.grid.delta);
                accumulate(w.acc[s], o);
                if (visitor)
                    w.outcomes[s] = o;
            }
            if (visitor)
                visitor(j, w.path, w.outcomes);
        }
    };

    // Blocks run in rounds of one block per worker; each round is merged in
    // block order before the next starts.
    for (std::size_t start = 0; start < blocks; start += workers.size())
    {
        std::size_t const n = std::min(workers.size(), blocks - start);
        parallel_blocks(n, 1, threads, [&](std::size_t b, std::size_t, std::size_t) {
            if (!workers[b])
                workers[b] = std::make_unique<Worker>(sc);
            run_block(*workers[b], start + b);
        });
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t s = 0; s < ns; ++s)
                merge(total[s], workers[b]->acc[s]);
    }
    return total;
}

std::vector<SurfacePoint> summarize(const StrategyGrid& grid,
                                    std::span<const StrategyStats> stats, std::size_t paths,
                                    double gamma)
{
    std::vector<SurfacePoint> out(grid.size());
    double const n = static_cast<double>(paths);
    for (std::size_t s = 0; s < grid.size(); ++s)
    {
        auto const& st = stats[s];
        SurfacePoint& p = out[s];
        p.coords = grid.coords[s];
        p.estimate = value_from_power_sums(paths, st.power_sums, gamma);
        for (std::size_t c = 0; c < 5; ++c)
            p.class_share[c] = st.class_counts[c] / n;
        p.entered_share = st.entered / n;
        if (st.entered > 0.0)
        {
            p.overshoot_mean = st.overshoot_sum / st.entered;
            if (st.entered > 1.0)
                p.overshoot_sd = std::sqrt(std::max(
                    0.0, (st.overshoot_sum2 - st.overshoot_sum * p.overshoot_mean)
                             / (st.entered - 1.0)));
        }
    }
    return out;
}

std::vector<SurfacePoint> evaluate_value_surface(const Scenario& sc, const StrategyGrid& grid)
{
    auto const stats = evaluate_strategies(sc, grid);
    return summarize(grid, stats, sc.paths, sc.gamma);
}

std::array<std::string, 2> coord_names(SearchKind search)
{
    switch (search)
    {
    case SearchKind::symmetric_d: return {"d", ""};
    case SearchKind::asymmetric_d: return {"d_plus", "d_minus"};
    case SearchKind::exit_entry: return {"c", "d"};
    case SearchKind::bivariate_d: return {"d1", "d2"};
    case SearchKind::bivariate_symmetric_d: return {"d", ""};
    }
    return {"x", "y"};
}

std::vector<std::vector<CvEstimate>> cv_estimates(const Scenario& sc, std::span<const double> d,
                                                  std::span<const std::size_t> p_values)
{
    if (sc.model != ModelKind::ou_vg || !sc.cv)
        throw ConfigError("cv", "control variates need an ou_vg scenario with a [cv] section");
    CvContext ctx(sc, std::vector<double>(d.begin(), d.end()), p_values);
    std::vector<std::vector<CvEstimate>> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t p : p_values)
            out[i].push_back(ctx.estimate(i, p));
    return out;
}

OptimizationResult optimize_levels(const Scenario& sc)
{
    sc.validate();
    OptimizationResult res;
    res.search = sc.search;
    bool const one_dim = is_one_dimensional(sc.search);

    auto const fine = search_axes(sc, sc.fine_step);
    std::size_t const fine_count =
        make_strategy_grid(sc.search, fine[0], fine[1], sc.c).size();
    bool const single = fine_count <= kSinglePassLimit;
    auto const axes = single ? fine : search_axes(sc, sc.coarse_step);

    StrategyGrid grid = make_strategy_grid(sc.search, axes[0], axes[1], sc.c);
    if (grid.size() == 0)
        throw ConfigError("strategy", "the search grid is empty");
    res.surface = evaluate_value_surface(sc, grid);
    std::size_t best = pick_best(res.surface, one_dim, sc.loess_span);
    res.coords = grid.coords[best];
    res.at_optimum = res.surface[best];
    res.best = grid.levels(best, sc.r, sc.gamma);

    if (!single)
    {
        auto local = [&](std::size_t axis, double centre) {
            auto const& ax = fine[axis];
            return restrict_axis(GridRange{centre - sc.coarse_step, centre + sc.coarse_step + 1e-12,
                                           sc.fine_step}.values(),
                                 ax.front(), ax.back());
        };
        std::vector<double> const x = local(0, res.coords[0]);
        std::vector<double> const y = one_dim ? std::vector<double>{} : local(1, res.coords[1]);
        StrategyGrid const refine = make_strategy_grid(sc.search, x, y, sc.c);
        if (refine.size() > 0)
        {
            res.refined = evaluate_value_surface(sc, refine);
            best = pick_best(res.refined, one_dim, sc.loess_span);
            res.coords = refine.coords[best];
            res.at_optimum = res.refined[best];
            res.best = refine.levels(best, sc.r, sc.gamma);
        }
    }

    if (sc.cv)
        run_cv_workflow(sc, res);
    return res;
}

Scenario apply_options(Scenario sc, const RunOptions& o)
{
    if (o.seed)
        sc.seed = *o.seed;
    if (o.threads)
        sc.threads = *o.threads;
    if (o.span)
        sc.loess_span = *o.span;
    if (o.no_cv)
        sc.cv.reset();
    if (o.out_dir)
        sc.out_dir = *o.out_dir;
    sc.validate();
    return sc;
}

std::string provenance_line(const Scenario& sc)
{
    std::ostringstream os;
    os << "# seed=" << sc.seed << " paths=" << sc.paths << " model=" << to_string(sc.model)
       << " search=" << to_string(sc.search) << " name=" << sc.name;
    return os.str();
}

OptimizationResult run_scenario(const Scenario& sc)
{
    OptimizationResult res = optimize_levels(sc);

    // Re-simulate at the optimum to record per-path outcomes and samples.
    std::vector<double> x{res.coords[0]};
    std::vector<double> y;
    if (!is_one_dimensional(sc.search))
        y = {res.coords[1]};
    StrategyGrid const grid = make_strategy_grid(sc.search, x, y, sc.c);
    std::vector<TradeOutcome> outcomes(sc.paths);
    std::vector<SpreadPath> samples(std::min(sc.sample_paths, sc.paths));
    auto const stats = evaluate_strategies(
        sc, grid, [&](std::size_t j, const SpreadPath& path, std::span<const TradeOutcome> o) {
            outcomes[j] = o[0];
            if (j < samples.size())
                samples[j] = path;
        });
    SurfacePoint const at = summarize(grid, stats, sc.paths, sc.gamma)[0];
    double const smoothed = res.at_optimum.smoothed;
    res.at_optimum = at;
    res.at_optimum.smoothed = smoothed;

    {
        auto os = open_output(sc.out_dir, "value_curve.csv");
        write_value_curve(os, sc, res);
    }
    {
        auto os = open_output(sc.out_dir, "outcomes.csv");
        os << provenance_line(sc) << '\n'
           << "path,tau_entry,tau_exit,profit,overshoot,class,w1,w2\n";
        for (std::size_t j = 0; j < outcomes.size(); ++j)
            os << outcome_row(j, outcomes[j]) << '\n';
    }
    {
        auto os = open_output(sc.out_dir, "summary.csv");
        write_summary(os, sc, res);
    }
    {
        auto os = open_output(sc.out_dir, "paths_sample.csv");
        os << provenance_line(sc) << '\n';
        for (std::size_t j = 0; j < samples.size(); ++j)
            write_path_csv(os, samples[j], j, j == 0);
    }
    return res;
}

void write_path_samples(const Scenario& sc)
{
    sc.validate();
    auto os = open_output(sc.out_dir, "paths_sample.csv");
    os << provenance_line(sc) << '\n';
    Worker w(sc);
    std::size_t const n = std::min(sc.sample_paths, sc.paths);
    for (std::size_t j = 0; j < n; ++j)
    {
        w.simulate(sc, j);
        write_path_csv(os, w.path, j, j == 0);
    }
}

}  // namespace levytrade
