#include "levytrade/trading.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "levytrade/variance_reduction.hpp"

namespace levytrade {
namespace {

constexpr std::size_t kNever = PassageIndices::never;

struct LegIndices
{
    std::size_t entry = kNever;
    std::size_t exit = kNever;
};

/// Reference scan of one side on component k; sign = -1 mirrors the long
/// side onto the short side.
LegIndices scan_leg(const SpreadPath& path, std::size_t k, double sign, double mu_bar, double c,
                    double d)
{
    std::size_t const q = path.steps();
    double const m = sign * mu_bar;
    LegIndices out;
    for (std::size_t i = 0; i <= q; ++i)
        if (sign * path.value(i, k) > m + d)
        {
            out.entry = i;
            break;
        }
    if (out.entry == kNever)
        return out;
    for (std::size_t i = out.entry; i <= q; ++i)
        if (sign * path.value(i, k) < m + c)
        {
            out.exit = i;
            break;
        }
    return out;
}

LegResult leg_result(const SpreadPath& path, std::size_t k, double sign, double mu_bar,
                     double d, std::size_t entry, std::size_t exit, double r)
{
    LegResult leg;
    if (entry == kNever)
        return leg;
    std::size_t const q = path.steps();
    leg.entered = true;
    leg.exited = exit != kNever;
    leg.entry = static_cast<std::uint32_t>(entry);
    leg.exit = static_cast<std::uint32_t>(leg.exited ? exit : q);
    double const ve = sign * path.value(leg.entry, k);
    double const vx = sign * path.value(leg.exit, k);
    leg.profit = std::exp(-r * path.time(leg.exit)) * (ve - vx);
    leg.overshoot = ve - (sign * mu_bar + d);
    return leg;
}

std::array<LegResult, 2> spread_legs(const SpreadPath& path, std::size_t k,
                                     const SpreadLevels& lv, double mu_bar, double r)
{
    LegIndices const up = scan_leg(path, k, 1.0, mu_bar, lv.c_plus, lv.d_plus);
    LegIndices const down = scan_leg(path, k, -1.0, mu_bar, lv.c_minus, lv.d_minus);
    return {leg_result(path, k, 1.0, mu_bar, lv.d_plus, up.entry, up.exit, r),
            leg_result(path, k, -1.0, mu_bar, lv.d_minus, down.entry, down.exit, r)};
}

/// Chooses the leg that opens first on one spread; short wins ties.
const LegResult* first_leg(const LegResult& up, const LegResult& down)
{
    if (up.entered && (!down.entered || up.entry <= down.entry))
        return &up;
    if (down.entered)
        return &down;
    return nullptr;
}

}  // namespace

SpreadLevels SpreadLevels::disabled()
{
    double const inf = std::numeric_limits<double>::infinity();
    return {0.0, 0.0, inf, inf};
}

void SpreadLevels::validate() const
{
    if (!(c_plus >= 0.0 && c_plus < d_plus))
        throw std::invalid_argument("levels require 0 <= c_plus < d_plus");
    if (!(c_minus >= 0.0 && c_minus < d_minus))
        throw std::invalid_argument("levels require 0 <= c_minus < d_minus");
}

void StrategyLevels::validate() const
{
    if (spreads.empty() || spreads.size() > 2)
        throw std::invalid_argument("strategy needs one or two spreads");
    for (auto const& s : spreads)
        s.validate();
    if (!(gamma >= 0.0))
        throw std::invalid_argument("gamma must be >= 0");
}

std::string_view to_string(OutcomeClass c)
{
    switch (c)
    {
    case OutcomeClass::traded_spread1_only: return "traded_spread1_only";
    case OutcomeClass::traded_spread2_only: return "traded_spread2_only";
    case OutcomeClass::traded_both: return "traded_both";
    case OutcomeClass::traded_neither: return "traded_neither";
    case OutcomeClass::entered_not_exited: return "entered_not_exited";
    }
    return "unknown";
}

std::vector<PassageIndices> passage_indices(const SpreadPath& path,
                                            const StrategyLevels& levels,
                                            std::span<const double> mu_bar)
{
    if (levels.spreads.size() != path.dim || mu_bar.size() != path.dim)
        throw std::invalid_argument("levels, mean and path dimension differ");
    std::vector<PassageIndices> out(path.dim);
    for (std::size_t k = 0; k < path.dim; ++k)
    {
        auto const& lv = levels.spreads[k];
        LegIndices const up = scan_leg(path, k, 1.0, mu_bar[k], lv.c_plus, lv.d_plus);
        LegIndices const down = scan_leg(path, k, -1.0, mu_bar[k], lv.c_minus, lv.d_minus);
        out[k] = {up.entry, up.exit, down.entry, down.exit};
    }
    return out;
}

double passage_time(const SpreadPath& path, std::size_t index)
{
    return path.time(std::min(index, path.steps()));
}

TradeOutcome trade_profit_univariate(const SpreadPath& path, const StrategyLevels& levels,
                                     double mu_bar)
{
    if (path.dim != 1 || levels.spreads.size() != 1)
        throw std::invalid_argument("univariate trade needs a scalar path and one spread");
    auto const legs = spread_legs(path, 0, levels.spreads[0], mu_bar, levels.r);
    return combine_univariate(legs[0], legs[1], path.delta);
}

TradeOutcome trade_profit_bivariate(const SpreadPath& path, const StrategyLevels& levels,
                                    std::span<const double> mu_bar)
{
    if (path.dim != 2 || levels.spreads.size() != 2 || mu_bar.size() != 2)
        throw std::invalid_argument("bivariate trade needs a 2-vector path and two spreads");
    auto const a = spread_legs(path, 0, levels.spreads[0], mu_bar[0], levels.r);
    auto const b = spread_legs(path, 1, levels.spreads[1], mu_bar[1], levels.r);
    return combine_bivariate(a[0], a[1], b[0], b[1], path.delta);
}

TradeOutcome combine_univariate(const LegResult& up, const LegResult& down, double delta)
{
    TradeOutcome out;
    const LegResult* leg = first_leg(up, down);
    if (!leg)
        return out;
    out.entered = true;
    out.exited = leg->exited;
    out.tau_entry = leg->entry * delta;
    out.tau_exit = leg->exit * delta;
    out.profit = leg->profit;
    out.overshoot = leg->overshoot;
    out.weights = {1.0, 0.0};
    out.outcome_class =
        leg->exited ? OutcomeClass::traded_spread1_only : OutcomeClass::entered_not_exited;
    return out;
}

TradeOutcome combine_bivariate(const LegResult& up1, const LegResult& down1,
                               const LegResult& up2, const LegResult& down2, double delta)
{
    TradeOutcome out;
    const LegResult* l1 = first_leg(up1, down1);
    const LegResult* l2 = first_leg(up2, down2);
    if (!l1 && !l2)
        return out;
    if (l1 && l2 && l1->entry == l2->entry)
    {
        out.weights = {0.5, 0.5};
        out.outcome_class = OutcomeClass::traded_both;
        out.profit = 0.5 * l1->profit + 0.5 * l2->profit;
        out.exited = l1->exited && l2->exited;
        out.tau_entry = l1->entry * delta;
        out.tau_exit = std::max(l1->exit, l2->exit) * delta;
        out.entered = true;
        return out;
    }
    bool const first = l1 && (!l2 || l1->entry < l2->entry);
    const LegResult* leg = first ? l1 : l2;
    out.weights = first ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
    out.outcome_class =
        first ? OutcomeClass::traded_spread1_only : OutcomeClass::traded_spread2_only;
    out.profit = leg->profit;
    out.exited = leg->exited;
    out.entered = true;
    out.tau_entry = leg->entry * delta;
    out.tau_exit = leg->exit * delta;
    return out;
}

ValueEstimate value_from_power_sums(std::size_t m, const std::array<double, 4>& s,
                                    double gamma)
{
    if (m < 2)
        throw std::invalid_argument("value estimate needs at least two outcomes");
    double const n = static_cast<double>(m);
    ValueEstimate v;
    v.m = m;
    v.mean_p = s[0] / n;
    v.mean_p2 = s[1] / n;
    v.value = v.mean_p - gamma * v.mean_p2 + gamma * v.mean_p * v.mean_p;
    double const s11 = std::max(0.0, (s[1] - s[0] * s[0] / n) / (n - 1.0));
    double const s12 = (s[2] - s[0] * s[1] / n) / (n - 1.0);
    double const s22 = std::max(0.0, (s[3] - s[1] * s[1] / n) / (n - 1.0));
    v.variance_of_estimator =
        penalized_value_variance(v.mean_p, gamma, s11 / n, s12 / n, s22 / n);
    return v;
}

ValueEstimate value_function_mc(std::span<const double> profits, double gamma)
{
    std::array<double, 4> s{};
    for (double p : profits)
    {
        double const p2 = p * p;
        s[0] += p;
        s[1] += p2;
        s[2] += p2 * p;
        s[3] += p2 * p2;
    }
    return value_from_power_sums(profits.size(), s, gamma);
}

ValueEstimate value_function_mc(std::span<const TradeOutcome> outcomes, double gamma)
{
    std::vector<double> p(outcomes.size());
    std::transform(outcomes.begin(), outcomes.end(), p.begin(),
                   [](const TradeOutcome& o) { return o.profit; });
    return value_function_mc(p, gamma);
}

OvershootStats overshoot_stats(std::span<const TradeOutcome> outcomes)
{
    OvershootStats st;
    double sum = 0.0;
    double sum2 = 0.0;
    for (auto const& o : outcomes)
        if (o.entered)
        {
            ++st.count;
            sum += o.overshoot;
            sum2 += o.overshoot * o.overshoot;
        }
    if (st.count == 0)
        throw std::invalid_argument("overshoot statistics need at least one entered trade");
    double const n = static_cast<double>(st.count);
    st.mean = sum / n;
    st.sd = st.count > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0))) : 0.0;
    return st;
}

std::vector<double> discount_table(double r, double delta, std::size_t q)
{
    std::vector<double> out(q + 1);
    for (std::size_t i = 0; i <= q; ++i)
        out[i] = std::exp(-r * static_cast<double>(i) * delta);
    return out;
}

void LegEvaluator::evaluate(std::span<const double> series, double mu_bar, Side side,
                            std::span<const double> d_values, std::span<const double> c_values,
                            std::span<const double> discount, std::vector<LegResult>& out)
{
    std::size_t const n = series.size();
    std::size_t const q = n - 1;
    std::size_t const nd = d_values.size();
    std::size_t const nc = c_values.size();
    double const sign = side == Side::short_above ? 1.0 : -1.0;
    double const m = sign * mu_bar;

    extreme_.resize(n);
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
    {
        run = std::max(run, sign * series[i]);
        extreme_[i] = run;
    }

    auto const never = static_cast<std::uint32_t>(n);
    entries_.resize(nd);
    for (std::size_t i = 0; i < nd; ++i)
    {
        auto const it = std::upper_bound(extreme_.begin(), extreme_.end(), m + d_values[i]);
        entries_[i] = static_cast<std::uint32_t>(it - extreme_.begin());
    }

    order_.resize(nc);
    std::iota(order_.begin(), order_.end(), 0u);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return c_values[a] > c_values[b]; });

    out.assign(nd * nc, LegResult{});
    exits_.resize(nc);
    std::uint32_t cached = never;
    for (std::size_t i = 0; i < nd; ++i)
    {
        std::uint32_t const e = entries_[i];
        if (e == never)
            continue;
        if (e != cached)
        {
            // Larger c exits first, so one forward scan serves every c.
            std::size_t j = 0;
            for (std::size_t t = e; t < n && j < nc; ++t)
            {
                double const v = sign * series[t];
                while (j < nc && v < m + c_values[order_[j]])
                    exits_[order_[j++]] = static_cast<std::uint32_t>(t);
            }
            for (; j < nc; ++j)
                exits_[order_[j]] = never;
            cached = e;
        }
        double const ve = sign * series[e];
        for (std::size_t j = 0; j < nc; ++j)
        {
            LegResult& leg = out[i * nc + j];
            leg.entered = true;
            leg.entry = e;
            leg.exited = exits_[j] != never;
            leg.exit = leg.exited ? exits_[j] : static_cast<std::uint32_t>(q);
            leg.profit = discount[leg.exit] * (ve - sign * series[leg.exit]);
            leg.overshoot = ve - (m + d_values[i]);
        }
    }
}

}  // namespace levytrade
