#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include <doctest.h>

#include "levytrade/ldoup_sim.hpp"
#include "levytrade/rng.hpp"
#include "levytrade/spectral.hpp"
#include "support/stats.hpp"

using namespace levytrade;
using levytrade::testing::cumulants_from_exponent;

namespace {

// Innovation law on three points with probabilities (0.2, 0.5, 0.3).
constexpr double kPoints[3] = {-1.0, 0.0, 1.0};
constexpr double kProbs[3] = {0.2, 0.5, 0.3};

double three_point_cdf(double x)
{
    double f = 0.0;
    for (int k = 0; k < 3; ++k)
        if (kPoints[k] <= x)
            f += kProbs[k];
    return f;
}

// Enumerates every innovation sequence and follows the trade; step i uses
// steps[i].
EventProbabilities enumerate_events(const std::vector<EventLevels>& steps)
{
    EventProbabilities out;
    std::size_t total = 1;
    for (std::size_t i = 0; i < steps.size(); ++i)
        total *= 3;
    for (std::size_t code = 0; code < total; ++code)
    {
        double prob = 1.0;
        bool entered_short = false, entered_long = false, closed = false;
        std::size_t c = code;
        for (std::size_t i = 0; i < steps.size(); ++i, c /= 3)
        {
            EventLevels const& lv = steps[i];
            double const z = kPoints[c % 3];
            prob *= kProbs[c % 3];
            if (closed)
                continue;
            if (!entered_short && !entered_long)
            {
                entered_short = z > lv.entry_plus;
                entered_long = !entered_short && z < lv.entry_minus;
            }
            else if ((entered_short && z < lv.exit_plus) || (entered_long && z > lv.exit_minus))
                closed = true;
        }
        if (closed)
            out.enter_and_exit += prob;
        else if (entered_short || entered_long)
            out.enter_no_exit += prob;
    }
    return out;
}

}  // namespace

TEST_SUITE("spectral")
{
    TEST_CASE("vg exponent basics")
    {
        auto const ce = vg_char_exponent(OuVgParams{1.0, 2.0, 0.3, 0.05, -0.1});
        CHECK(std::abs(ce(0.0)) == 0.0);
        for (double t : {0.3, 4.0, 250.0})
        {
            CHECK(std::abs(ce(-t) - std::conj(ce(t))) < 1e-12 * (1.0 + std::abs(ce(t))));
            // Closed form without the factored logarithm.
            std::complex<double> const direct =
                std::complex<double>(0.0, -0.1 * t)
                - 2.0 * std::log(std::complex<double>(1.0 + 0.05 * t * t / 4.0, -0.3 * t / 2.0));
            CHECK(std::abs(ce(t) - direct) < 1e-10 * (1.0 + std::abs(direct)));
        }
        auto const sym = vg_char_exponent(OuVgParams{1.0, 2.0, 0.0, 0.05, 0.0});
        for (double t : {0.1, 1.0, 30.0})
        {
            CHECK(std::abs(sym(t).imag()) < 1e-14);
            CHECK(sym(t).real() < 0.0);
        }
        auto const [k1, k2] = cumulants_from_exponent(ce);
        CHECK(k1 == doctest::Approx(0.2).epsilon(1e-8));
        CHECK(k2 == doctest::Approx(0.05 + 0.09 / 2.0).epsilon(1e-6));
    }

    TEST_CASE("innovation exponent cumulants")
    {
        for (auto const& [p, delta] : {std::pair{OuVgParams{1.0, 1.0, -0.5, 0.015, 0.7}, 0.01},
                                       std::pair{OuVgParams{1.0, 5.0, 0.2, 0.03, 0.1}, 1.0},
                                       std::pair{OuVgParams{0.5, 50.0, 0.5, 4.0, -0.2}, 0.2}})
        {
            auto const ce = zstar_char_exponent(vg_char_exponent(p), p.lambda, delta, 1e-13);
            CHECK(std::abs(ce(0.0)) < 1e-15);
            double const x = p.lambda * delta;
            double const mean = std::expm1(x) * (p.eta + p.mu);
            double const var = std::expm1(2.0 * x) / 2.0 * (p.sigma2 + p.mu * p.mu / p.b);
            auto const [k1, k2] = cumulants_from_exponent(ce, 0.002 / std::sqrt(var));
            CHECK(std::abs(k1 / mean - 1.0) < 1e-6);
            CHECK(std::abs(k2 / var - 1.0) < 1e-6);
            CHECK(ce.drift == doctest::Approx(p.eta * std::expm1(x)));
        }
    }

    TEST_CASE("cdf symmetry, tails and monotonicity")
    {
        OuVgParams const sym{1.0, 1.0, 0.0, 0.015, 0.0};
        auto const ce = zstar_char_exponent(vg_char_exponent(sym), 1.0, 0.01);
        CdfDiagnostics diag;
        CHECK(cdf_from_cf(ce, 0.0, &diag) == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(diag.converged);

        OuVgParams const p{1.0, 1.0, -0.5, 0.015, 0.5};
        auto const cz = zstar_char_exponent(vg_char_exponent(p), 1.0, 0.25);
        double const sd = std::sqrt(std::expm1(0.5) / 2.0 * (0.015 + 0.25));
        CHECK(cdf_from_cf(cz, 20.0 * sd) > 1.0 - 1e-4);
        CHECK(cdf_from_cf(cz, -20.0 * sd) < 1e-4);
        double prev = 0.0;
        for (double x = -4.0 * sd; x <= 4.0 * sd; x += 0.25 * sd)
        {
            double const f = cdf_from_cf(cz, x);
            CHECK(f >= prev - 1e-9);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
            prev = f;
        }
    }

    TEST_CASE("cdf agrees with exact draws")
    {
        OuVgParams const p{1.0, 1.0, -0.5, 0.015, 0.5};
        double const delta = 0.05;
        auto const ce = zstar_char_exponent(vg_char_exponent(p), p.lambda, delta);
        OuVgInnovationSampler draw(p, delta);
        Engine rng = make_substream(31, 0);
        std::vector<double> z(20000);
        for (auto& v : z)
            v = draw(rng);
        std::vector<double> sorted = z;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> probes;
        for (int k = 1; k <= 21; ++k)
            probes.push_back(sorted[static_cast<std::size_t>(k * (sorted.size() - 1) / 22)]);
        double const ks = levytrade::testing::ks_at_points(z, probes, [&](double x) { return cdf_from_cf(ce, x); });
        CHECK(ks < levytrade::testing::ks_critical_1pct(z.size()));
    }

    TEST_CASE("modified levels")
    {
        auto const lv = EventLevels::modified(0.1, 2.0, 0.01, 0.05, 0.02, 0.4, 0.3, 7);
        double const g = std::exp(0.02);
        CHECK(lv.entry_plus == doctest::Approx(g * 0.5 - 0.1));
        CHECK(lv.entry_minus == doctest::Approx(g * -0.2 - 0.1));
        CHECK(lv.exit_plus == doctest::Approx(g * 0.15 - 0.1));
        CHECK(lv.exit_minus == doctest::Approx(g * 0.08 - 0.1));
        CHECK(lv.p == 7);
        CHECK(lv.entry_plus > lv.exit_plus);
    }

    TEST_CASE("event chain equals enumeration")
    {
        for (std::size_t p = 1; p <= 6; ++p)
        {
            EventLevels const lv{0.5, -0.5, 0.5 - 0.25, -0.25, p};
            auto const chain = event_probabilities(lv, three_point_cdf);
            auto const brute = enumerate_events(std::vector<EventLevels>(p, lv));
            CHECK(chain.enter_and_exit == doctest::Approx(brute.enter_and_exit).epsilon(1e-14));
            CHECK(chain.enter_no_exit == doctest::Approx(brute.enter_no_exit).epsilon(1e-14));
            if (p == 1)
                CHECK(chain.enter_and_exit == 0.0);
        }
    }

    TEST_CASE("two step closed form")
    {
        // Entry up 0.3, entry down 0.2, exits after an up entry 0.7 and
        // after a down entry 0.8 (three point law, levels between atoms).
        EventLevels const lv{0.5, -0.5, 0.5, -0.5, 2};
        double const up = 0.3, down = 0.2, leave_up = 0.7, leave_down = 0.8;
        auto const pr = event_probabilities(lv, three_point_cdf);
        CHECK(pr.enter_and_exit == doctest::Approx(up * leave_up + down * leave_down));
        double const wait = 1.0 - up - down;
        CHECK(pr.enter_no_exit
              == doctest::Approx(up * (1.0 - leave_up) + down * (1.0 - leave_down) + wait * (up + down)));
    }

    TEST_CASE("unreachable entry")
    {
        double const inf = std::numeric_limits<double>::infinity();
        auto const lv = EventLevels::modified(0.0, 1.0, 0.01, 0.0, 0.0, inf, inf, 20);
        auto const pr = event_probabilities(lv, three_point_cdf);
        CHECK(pr.enter_and_exit == 0.0);
        CHECK(pr.enter_no_exit == 0.0);
    }

    TEST_CASE("probabilities fall as the entry level rises")
    {
        OuVgParams const p{1.0, 1.0, -0.5, 0.015, 0.5};
        auto const ce = zstar_char_exponent(vg_char_exponent(p), 1.0, 0.4);
        std::function<double(double)> const cdf = [&](double x) { return cdf_from_cf(ce, x); };
        EventProbabilities prev{1.0, 1.0};
        for (double d : {0.3, 0.6, 0.9, 1.2})
        {
            auto const pr = event_probabilities(EventLevels::modified(0.0, 1.0, 0.4, 0.0, 0.0, d, d, 50), cdf);
            CHECK(pr.enter_and_exit + pr.enter_no_exit <= 1.0);
            CHECK(pr.enter_and_exit <= prev.enter_and_exit + 1e-12);
            CHECK(pr.enter_and_exit + pr.enter_no_exit <= prev.enter_and_exit + prev.enter_no_exit + 1e-12);
            prev = pr;
        }
    }

    TEST_CASE("step dependent chain")
    {
        EventLevels const lv{0.5, -0.5, 0.25, -0.25, 4};
        std::vector<EventLevels> const same(4, lv);
        auto const a = event_probabilities(lv, three_point_cdf);
        auto const b = event_probabilities(same, [](std::size_t, double x) { return three_point_cdf(x); });
        CHECK(a.enter_and_exit == doctest::Approx(b.enter_and_exit).epsilon(1e-15));
        CHECK(a.enter_no_exit == doctest::Approx(b.enter_no_exit).epsilon(1e-15));

        std::vector<EventLevels> steps{lv, {0.5, -1.5, 0.25, -0.25, 1}, {1.5, -0.5, -0.5, 0.5, 1},
                                       {0.5, -0.5, 0.5, -0.5, 1}, {0.5, -0.5, 0.25, -0.25, 1}};
        auto const c = event_probabilities(steps, [](std::size_t, double x) { return three_point_cdf(x); });
        auto const brute = enumerate_events(steps);
        CHECK(c.enter_and_exit == doctest::Approx(brute.enter_and_exit).epsilon(1e-14));
        CHECK(c.enter_no_exit == doctest::Approx(brute.enter_no_exit).epsilon(1e-14));

        std::vector<double> const z{0.0, -1.0, 0.0, 0.0, 1.0};
        auto const e = classify_innovations(z, std::span<const EventLevels>(steps));
        // -1 misses the step 2 entry at -1.5; the last step opens a short.
        CHECK_FALSE(e.enter_and_exit);
        CHECK(e.enter_no_exit);
    }

    TEST_CASE("classify realized innovations")
    {
        EventLevels lv{0.5, -0.5, 0.25, -0.25, 4};
        std::vector<double> const z{0.0, 1.0, 0.3, 0.0};
        auto const e = classify_innovations(z, lv);
        CHECK(e.enter_and_exit);
        CHECK_FALSE(e.enter_no_exit);
        lv.p = 3;
        auto const f = classify_innovations(z, lv);
        CHECK(f.enter_no_exit);
        CHECK_FALSE(f.enter_and_exit);
        std::vector<double> const down{-1.0, -0.3, -0.2};
        CHECK(classify_innovations(down, lv).enter_and_exit);
        std::vector<double> const quiet{0.1, -0.4, 0.2};
        auto const q = classify_innovations(quiet, lv);
        CHECK_FALSE(q.enter_and_exit);
        CHECK_FALSE(q.enter_no_exit);
    }
}
