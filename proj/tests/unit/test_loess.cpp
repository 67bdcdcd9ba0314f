#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "levytrade/errors.hpp"
#include "levytrade/loess.hpp"

using namespace levytrade;

TEST_SUITE("loess")
{
    TEST_CASE("lines are reproduced")
    {
        std::vector<double> x, y;
        for (int i = 0; i < 40; ++i)
        {
            x.push_back(0.1 * i + 0.01 * i * i);
            y.push_back(2.0 - 3.5 * x.back());
        }
        for (double span : {0.1, 0.3, 1.0})
        {
            auto const s = loess_smooth(x, y, span);
            for (std::size_t i = 0; i < x.size(); ++i)
                CHECK(std::abs(s[i] - y[i]) < 1e-10);
        }
    }

    TEST_CASE("constants are reproduced")
    {
        std::vector<double> x{0.0, 1.0, 2.0, 3.5, 4.0, 7.0};
        std::vector<double> y(6, 1.25);
        for (double v : loess_smooth(x, y, 0.5))
            CHECK(v == doctest::Approx(1.25).epsilon(1e-12));
    }

    TEST_CASE("smoothing reduces noise around a parabola")
    {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> noise(0.0, 0.05);
        std::vector<double> x, y, truth;
        for (int i = 0; i < 200; ++i)
        {
            x.push_back(i / 199.0);
            truth.push_back(1.0 - 4.0 * (x.back() - 0.5) * (x.back() - 0.5));
            y.push_back(truth.back() + noise(rng));
        }
        auto const s = loess_smooth(x, y, 0.3);
        double raw = 0.0, fit = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            raw += (y[i] - truth[i]) * (y[i] - truth[i]);
            fit += (s[i] - truth[i]) * (s[i] - truth[i]);
        }
        CHECK(fit < 0.5 * raw);
    }

    TEST_CASE("an outlier is damped by the robustness pass")
    {
        std::vector<double> x, y;
        for (int i = 0; i < 30; ++i)
        {
            x.push_back(i);
            y.push_back(0.5 * i + 0.1 * std::sin(1.7 * i));
        }
        y[15] += 20.0;
        auto const plain = loess_smooth(x, y, 0.3, 0);
        auto const robust = loess_smooth(x, y, 0.3, 1);
        CHECK(std::abs(robust[14] - 7.0) < std::abs(plain[14] - 7.0));
    }

    TEST_CASE("bad input")
    {
        std::vector<double> const one{1.0};
        CHECK_THROWS_AS(loess_smooth(one, one), NumericalError);
        std::vector<double> const x{0.0, 1.0, 1.0}, y{0.0, 1.0, 2.0};
        CHECK_THROWS_AS(loess_smooth(x, y), std::invalid_argument);
        std::vector<double> const x2{0.0, 1.0, 2.0};
        CHECK_THROWS_AS(loess_smooth(x2, y, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(loess_smooth(x2, y, 1.5), std::invalid_argument);
        std::vector<double> const shorter{0.0, 1.0};
        CHECK_THROWS_AS(loess_smooth(x2, shorter), std::invalid_argument);
    }
}
