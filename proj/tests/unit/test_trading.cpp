#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "levytrade/ldoup_sim.hpp"
#include "levytrade/rng.hpp"
#include "levytrade/trading.hpp"

using namespace levytrade;

namespace {

SpreadPath make_path(std::vector<double> values, double delta, std::size_t dim = 1)
{
    SpreadPath p;
    p.dim = dim;
    p.delta = delta;
    p.x0.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(dim));
    p.values = std::move(values);
    return p;
}

StrategyLevels one(double c, double d, double r = 0.0, double gamma = 0.0)
{
    return StrategyLevels{{SpreadLevels::symmetric(c, d)}, r, gamma};
}

std::vector<double> random_walk(std::size_t steps, double scale, std::uint64_t stream)
{
    Engine rng = make_substream(77, stream);
    std::normal_distribution<double> n(0.0, scale);
    std::vector<double> v(steps + 1, 0.0);
    for (std::size_t i = 1; i <= steps; ++i)
        v[i] = 0.97 * v[i - 1] + n(rng);
    return v;
}

}  // namespace

TEST_SUITE("trading")
{
    TEST_CASE("flat path never trades")
    {
        auto const path = make_path(std::vector<double>(11, 0.2), 0.1);
        auto const pi = passage_indices(path, one(0.0, 0.5), std::vector<double>{0.2});
        CHECK(pi[0].entry_plus == PassageIndices::never);
        CHECK(pi[0].entry_minus == PassageIndices::never);
        CHECK(passage_time(path, pi[0].entry_plus) == doctest::Approx(1.0));
        auto const o = trade_profit_univariate(path, one(0.0, 0.5), 0.2);
        CHECK(o.profit == 0.0);
        CHECK(o.outcome_class == OutcomeClass::traded_neither);
        CHECK_FALSE(o.entered);
    }

    TEST_CASE("hand built short trade")
    {
        // Crosses d+ = 0.5 at step 2 and c+ = 0.1 at step 4.
        auto const path = make_path({0.0, 0.3, 0.55, 0.4, 0.05, -0.2}, 1.0);
        auto const pi = passage_indices(path, one(0.1, 0.5), std::vector<double>{0.0});
        CHECK(pi[0].entry_plus == 2);
        CHECK(pi[0].exit_plus == 4);
        CHECK(passage_time(path, pi[0].entry_plus) == 2.0);
        CHECK(passage_time(path, pi[0].exit_plus) == 4.0);
        auto const o = trade_profit_univariate(path, one(0.1, 0.5), 0.0);
        CHECK(o.tau_entry == 2.0);
        CHECK(o.tau_exit == 4.0);
        CHECK(o.profit == doctest::Approx(0.55 - 0.05));
        CHECK(o.overshoot == doctest::Approx(0.05));
        CHECK(o.outcome_class == OutcomeClass::traded_spread1_only);
    }

    TEST_CASE("strict inequalities at the level")
    {
        auto const path = make_path({0.0, 0.5, 0.5, 0.0}, 1.0);
        auto const o = trade_profit_univariate(path, one(0.0, 0.5), 0.0);
        CHECK_FALSE(o.entered);
    }

    TEST_CASE("immediate entry")
    {
        auto const path = make_path({0.25, 0.2, 0.0, -0.01}, 0.5);
        auto const o = trade_profit_univariate(path, one(0.0, 0.1), 0.0);
        CHECK(o.tau_entry == 0.0);
        CHECK(o.tau_exit == 1.5);
        CHECK(o.profit == doctest::Approx(0.26));
    }

    TEST_CASE("profit and discount")
    {
        double const d = 0.4;
        std::vector<double> v(11, 0.0);
        v[3] = d + 0.05;
        v[4] = 0.2;
        v[10] = -0.01;
        auto const path = make_path(v, 1.0);
        auto const undiscounted = trade_profit_univariate(path, one(0.0, d, 0.0), 0.0);
        // X(t) = 0 is not strictly below c = 0, so the exit is step 10.
        CHECK(undiscounted.tau_exit == 10.0);
        CHECK(undiscounted.profit == doctest::Approx(d + 0.06));
        auto const discounted = trade_profit_univariate(path, one(0.0, d, 0.01), 0.0);
        CHECK(discounted.profit == doctest::Approx((d + 0.06) * std::exp(-0.1)));
        CHECK(discounted.profit < undiscounted.profit);
    }

    TEST_CASE("long trade and open position marked at T")
    {
        auto const path = make_path({0.0, -0.6, -0.3, 0.1, 0.0}, 1.0);
        auto const closed = trade_profit_univariate(path, one(0.0, 0.5), 0.0);
        CHECK(closed.tau_exit == 3.0);
        CHECK(closed.profit == doctest::Approx(0.7));
        CHECK(closed.exited);

        auto const stuck = make_path({0.0, -0.6, -0.3, -0.2}, 1.0);
        auto const o = trade_profit_univariate(stuck, one(0.0, 0.5, 0.1), 0.0);
        CHECK(o.outcome_class == OutcomeClass::entered_not_exited);
        CHECK_FALSE(o.exited);
        CHECK(o.tau_exit == 3.0);
        CHECK(o.profit == doctest::Approx(std::exp(-0.3) * 0.4));
    }

    TEST_CASE("entry price lies beyond the level")
    {
        for (std::uint64_t s = 0; s < 50; ++s)
        {
            auto const path = make_path(random_walk(400, 0.05, s), 0.01);
            for (double d : {0.05, 0.1, 0.2})
            {
                auto const o = trade_profit_univariate(path, one(0.0, d, 0.0), 0.0);
                if (!o.entered)
                    continue;
                CHECK(std::abs(path.value(static_cast<std::size_t>(std::lround(o.tau_entry / 0.01)))) > d);
                CHECK(o.overshoot >= 0.0);
                if (o.exited)
                    CHECK(o.profit > d);
            }
        }
    }

    TEST_CASE("leg evaluator matches the reference scan")
    {
        std::vector<double> const d{0.02, 0.05, 0.08, 0.11, 0.3};
        std::vector<double> const c{0.0, 0.01, 0.04};
        double const mu_bar = 0.01;
        LegEvaluator eval;
        std::vector<LegResult> up, down;
        for (std::uint64_t s = 0; s < 40; ++s)
        {
            auto const series = random_walk(300, 0.03, 100 + s);
            auto const path = make_path(series, 0.02);
            auto const disc = discount_table(0.5, 0.02, 300);
            eval.evaluate(series, mu_bar, Side::short_above, d, c, disc, up);
            eval.evaluate(series, mu_bar, Side::long_below, d, c, disc, down);
            for (std::size_t i = 0; i < d.size(); ++i)
                for (std::size_t j = 0; j < c.size(); ++j)
                    for (std::size_t i2 = 0; i2 < d.size(); i2 += 2)
                    {
                        if (c[j] >= d[i])
                            continue;
                        SpreadLevels const lv{c[j], c[0], d[i], d[i2]};
                        auto const ref = trade_profit_univariate(path, StrategyLevels{{lv}, 0.5, 0.0}, mu_bar);
                        auto const fast =
                            combine_univariate(up[i * c.size() + j], down[i2 * c.size()], 0.02);
                        CHECK(fast.profit == doctest::Approx(ref.profit).epsilon(1e-12));
                        CHECK(fast.tau_entry == ref.tau_entry);
                        CHECK(fast.tau_exit == ref.tau_exit);
                        CHECK(fast.outcome_class == ref.outcome_class);
                        CHECK(fast.overshoot == doctest::Approx(ref.overshoot).epsilon(1e-12));
                    }
        }
    }

    TEST_CASE("bivariate outcomes")
    {
        std::vector<double> const mu{0.0, 0.0};
        StrategyLevels const lv{{SpreadLevels::symmetric(0.0, 0.5), SpreadLevels::symmetric(0.0, 0.5)}, 0.0, 0.0};

        SUBCASE("only spread 2 crosses")
        {
            auto const path = make_path({0, 0, 0.1, 0.6, 0.2, -0.1, 0.1, 0.2}, 1.0, 2);
            auto const o = trade_profit_bivariate(path, lv, mu);
            CHECK(o.outcome_class == OutcomeClass::traded_spread2_only);
            CHECK(o.weights == std::array<double, 2>{0.0, 1.0});
            auto const uni = trade_profit_univariate(make_path(path.component(1), 1.0), one(0.0, 0.5), 0.0);
            CHECK(o.profit == doctest::Approx(uni.profit));
        }
        SUBCASE("simultaneous entry")
        {
            // Spread 1 goes long, spread 2 goes short on the same step.
            auto const path = make_path({0, 0, -0.7, 0.6, 0.1, -0.2, 0.2, 0.1}, 1.0, 2);
            auto const o = trade_profit_bivariate(path, lv, mu);
            CHECK(o.outcome_class == OutcomeClass::traded_both);
            CHECK(o.weights == std::array<double, 2>{0.5, 0.5});
            CHECK(o.profit == doctest::Approx(0.5 * 0.8 + 0.5 * 0.8));
            CHECK(o.exited);
        }
        SUBCASE("first entry wins")
        {
            auto const path = make_path({0, 0, 0.6, 0.0, -0.1, 0.9, 0.1, -0.1}, 1.0, 2);
            auto const o = trade_profit_bivariate(path, lv, mu);
            CHECK(o.outcome_class == OutcomeClass::traded_spread1_only);
            CHECK(o.profit == doctest::Approx(0.6 - -0.1));
        }
        SUBCASE("neither crosses")
        {
            auto const path = make_path({0, 0, 0.1, -0.1, 0.2, 0.3}, 1.0, 2);
            auto const o = trade_profit_bivariate(path, lv, mu);
            CHECK(o.profit == 0.0);
            CHECK(o.outcome_class == OutcomeClass::traded_neither);
        }
    }

    TEST_CASE("disabled second spread reduces to univariate")
    {
        std::vector<double> const mu{0.0, 0.0};
        StrategyLevels const lv{{SpreadLevels::symmetric(0.0, 0.08), SpreadLevels::disabled()}, 0.2, 0.0};
        for (std::uint64_t s = 0; s < 30; ++s)
        {
            auto const a = random_walk(200, 0.03, 200 + s);
            auto const b = random_walk(200, 0.03, 300 + s);
            std::vector<double> v;
            for (std::size_t i = 0; i <= 200; ++i)
            {
                v.push_back(a[i]);
                v.push_back(b[i]);
            }
            auto const biv = trade_profit_bivariate(make_path(v, 0.05, 2), lv, mu);
            auto const uni = trade_profit_univariate(make_path(a, 0.05), StrategyLevels{{lv.spreads[0]}, 0.2, 0.0}, 0.0);
            CHECK(biv.profit == doctest::Approx(uni.profit));
            CHECK(biv.tau_entry == uni.tau_entry);
        }
    }

    TEST_CASE("batched bivariate combination matches the reference")
    {
        std::vector<double> const d{0.03, 0.06, 0.09};
        std::vector<double> const c{0.0};
        std::vector<double> const mu{0.0, 0.01};
        LegEvaluator eval;
        std::vector<LegResult> u1, d1, u2, d2;
        for (std::uint64_t s = 0; s < 30; ++s)
        {
            auto const a = random_walk(150, 0.03, 400 + s);
            auto const b = random_walk(150, 0.03, 500 + s);
            std::vector<double> v;
            for (std::size_t i = 0; i <= 150; ++i)
            {
                v.push_back(a[i]);
                v.push_back(b[i]);
            }
            auto const path = make_path(v, 0.1, 2);
            auto const disc = discount_table(0.3, 0.1, 150);
            eval.evaluate(a, mu[0], Side::short_above, d, c, disc, u1);
            eval.evaluate(a, mu[0], Side::long_below, d, c, disc, d1);
            eval.evaluate(b, mu[1], Side::short_above, d, c, disc, u2);
            eval.evaluate(b, mu[1], Side::long_below, d, c, disc, d2);
            for (std::size_t i = 0; i < d.size(); ++i)
                for (std::size_t k = 0; k < d.size(); ++k)
                {
                    StrategyLevels const lv{{SpreadLevels::symmetric(0.0, d[i]), SpreadLevels::symmetric(0.0, d[k])}, 0.3, 0.0};
                    auto const ref = trade_profit_bivariate(path, lv, mu);
                    auto const fast = combine_bivariate(u1[i], d1[i], u2[k], d2[k], 0.1);
                    CHECK(fast.profit == doctest::Approx(ref.profit).epsilon(1e-12));
                    CHECK(fast.outcome_class == ref.outcome_class);
                    CHECK(fast.weights == ref.weights);
                    CHECK(fast.exited == ref.exited);
                }
        }
    }

    TEST_CASE("value function estimates")
    {
        std::vector<double> const two{0.0, 2.0};
        auto const v = value_function_mc(std::span<const double>(two), 0.1);
        CHECK(v.mean_p == doctest::Approx(1.0));
        CHECK(v.mean_p2 == doctest::Approx(2.0));
        CHECK(v.value == doctest::Approx(0.9));

        std::vector<double> const flat(10, 0.7);
        auto const c = value_function_mc(std::span<const double>(flat), 0.3);
        CHECK(c.value == doctest::Approx(0.7));
        CHECK(c.variance_of_estimator == doctest::Approx(0.0));

        std::vector<double> p;
        for (int i = 0; i < 100; ++i)
            p.push_back(0.01 * i * i - 0.3 * i);
        auto const g0 = value_function_mc(std::span<const double>(p), 0.0);
        double mean = 0.0;
        for (double x : p)
            mean += x;
        CHECK(g0.value == doctest::Approx(mean / 100.0));

        std::array<double, 4> sums{};
        for (double x : p)
            for (int k = 0; k < 4; ++k)
                sums[static_cast<std::size_t>(k)] += std::pow(x, k + 1);
        for (double gamma : {0.0, 0.2})
        {
            auto const a = value_function_mc(std::span<const double>(p), gamma);
            auto const b = value_from_power_sums(p.size(), sums, gamma);
            CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
            CHECK(a.variance_of_estimator == doctest::Approx(b.variance_of_estimator).epsilon(1e-9));
        }
        std::vector<double> const single{1.0};
        CHECK_THROWS(value_function_mc(std::span<const double>(single), 0.0));
    }

    TEST_CASE("overshoot statistics")
    {
        std::vector<TradeOutcome> o(3);
        CHECK_THROWS_AS(overshoot_stats(o), std::invalid_argument);
        o[0].entered = true;
        o[0].overshoot = 0.1;
        o[2].entered = true;
        o[2].overshoot = 0.3;
        auto const s = overshoot_stats(o);
        CHECK(s.count == 2);
        CHECK(s.mean == doctest::Approx(0.2));
        CHECK(s.sd == doctest::Approx(std::sqrt(0.02)));
    }

    TEST_CASE("level validation")
    {
        CHECK_THROWS_AS(SpreadLevels::symmetric(0.2, 0.1).validate(), std::invalid_argument);
        CHECK_THROWS_AS(SpreadLevels::symmetric(-0.1, 0.1).validate(), std::invalid_argument);
        CHECK_NOTHROW(SpreadLevels::symmetric(0.0, 0.1).validate());
        CHECK(to_string(OutcomeClass::traded_both) == "traded_both");
    }
}
