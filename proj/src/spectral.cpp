#include "levytrade/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levytrade/errors.hpp"

namespace levytrade {
namespace {

using cplx = std::complex<double>;

/// log(1 - i m theta + s theta^2) without overflow for large |theta|.
cplx vg_log_term(double theta, double m, double s)
{
    if (std::abs(theta) <= 1.0)
    {
        // log(1 + w) with w = s theta^2 - i m theta, accurate for small theta.
        double const u = s * theta * theta;
        double const v = -m * theta;
        return {0.5 * std::log1p(2.0 * u + u * u + v * v), std::atan2(v, 1.0 + u)};
    }
    double const inv = 1.0 / theta;
    return std::log(theta * theta) + std::log(cplx(inv * inv + s, -m * inv));
}

/// Wynn epsilon acceleration of partial sums; returns the newest entry of
/// the highest even column.
double wynn_epsilon(const std::vector<double>& s)
{
    std::size_t const n = s.size();
    if (n < 3)
        return s.back();
    std::vector<double> prev(n + 1, 0.0);
    std::vector<double> cur(s);
    double best = s.back();
    for (std::size_t k = 1; cur.size() > 1; ++k)
    {
        std::vector<double> next(cur.size() - 1);
        for (std::size_t j = 0; j + 1 < cur.size(); ++j)
        {
            double const d = cur[j + 1] - cur[j];
            if (d == 0.0 || !std::isfinite(d))
                return best;
            next[j] = prev[j + 1] + 1.0 / d;
        }
        prev.swap(cur);
        cur.swap(next);
        if (k % 2 == 0)
        {
            if (!std::isfinite(cur.back()))
                return best;
            best = cur.back();
        }
    }
    return best;
}

template <class F>
double panel(F&& f, double lo, double hi)
{
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, 8, 1e-11,
                                                                         &err);
}

constexpr double kTruncation = 1e-12;
constexpr double kTarget = 1e-6;

}  // namespace

CharExponent vg_char_exponent(const OuVgParams& p)
{
    p.validate();
    double const m = p.mu / p.b;
    double const s = p.sigma2 / (2.0 * p.b);
    double const b = p.b;
    CharExponent ce;
    ce.drift = p.eta;
    ce.scale = std::sqrt(driver_cumulants(p).k2);
    ce.centered = [b, m, s](double theta) { return -b * vg_log_term(theta, m, s); };
    return ce;
}

CharExponent zstar_char_exponent(const CharExponent& base, double lambda, double delta,
                                 double quad_tol)
{
    if (!(lambda > 0) || !(delta > 0))
        throw std::invalid_argument("lambda and delta must be > 0");
    double const x = lambda * delta;
    CharExponent ce;
    ce.drift = base.drift * std::expm1(x);
    // Var Z*(delta) = Var Z(1) * (e^{2x} - 1) / 2.
    ce.scale = base.scale * std::sqrt(std::expm1(2.0 * x) / 2.0);
    auto inner = base.centered;
    ce.centered = [inner, x, quad_tol](double theta) -> cplx {
        if (theta == 0.0)
            return {0.0, 0.0};
        auto f = [&](double t) { return inner(std::exp(t) * theta); };
        double err = 0.0;
        double l1 = 0.0;
        cplx const v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            f, 0.0, x, 15, quad_tol, &err, &l1);
        if (!(err <= std::max(quad_tol, 1e-8 * l1)))
            throw NumericalError("quadrature for the innovation exponent did not converge");
        return v;
    };
    return ce;
}

double cdf_from_cf(const CharExponent& ce, double x, CdfDiagnostics* diag)
{
    double const y = x - ce.drift;
    double const unit = 1.0 / ce.scale;
    auto phi = [&](double theta) { return std::exp(ce.centered(theta)); };
    auto h = [&](double theta) -> double {
        if (theta == 0.0)
        {
            // Limit of Im[e^{-i theta y} phi(theta)] / theta at 0.
            double const eps = 1e-8 * unit;
            return std::imag(std::exp(cplx(0.0, -eps * y)) * phi(eps)) / eps;
        }
        return std::imag(std::exp(cplx(0.0, -theta * y)) * phi(theta)) / theta;
    };

    CdfDiagnostics d;
    double integral = 0.0;
    bool done = false;

    // Non-oscillatory region [0, pi/|y|] on doubling panels.
    double const period = (y != 0.0) ? std::numbers::pi / std::abs(y)
                                     : std::numeric_limits<double>::infinity();
    double lo = 0.0;
    double hi = std::min(unit, period);
    int quiet = 0;
    while (!done && lo < period && d.panels < 400)
    {
        double const v = panel(h, lo, hi);
        integral += v;
        ++d.panels;
        if (std::abs(phi(hi)) < kTruncation)
            done = true;
        else if (!std::isfinite(period))
        {
            quiet = std::abs(v) < 1e-11 ? quiet + 1 : 0;
            if (quiet >= 5)
                done = true;
        }
        lo = hi;
        hi = std::min(2.0 * hi, period);
    }

    // Oscillatory region: half-period panels, truncated or extrapolated.
    if (!done && std::isfinite(period))
    {
        std::vector<double> partial;
        double last = integral;
        double prev_est = std::numeric_limits<double>::quiet_NaN();
        int stable = 0;
        for (std::size_t k = 0; k < 2000; ++k)
        {
            double const a = period * static_cast<double>(k + 1);
            double const b = a + period;
            integral += panel(h, a, b);
            ++d.panels;
            double const tail = std::abs(phi(b)) * period / b;
            if (tail < kTruncation)
            {
                done = true;
                d.abs_error = tail / std::numbers::pi;
                break;
            }
            partial.push_back(integral);
            if (partial.size() > 40)
                partial.erase(partial.begin());
            if (partial.size() >= 8)
            {
                double const est = wynn_epsilon(partial);
                double const change = std::abs(est - prev_est);
                stable = change < 1e-10 ? stable + 1 : 0;
                prev_est = est;
                last = est;
                d.abs_error = change / std::numbers::pi;
                if (stable >= 3)
                {
                    d.extrapolated = true;
                    done = true;
                    integral = est;
                    break;
                }
            }
        }
        if (!done)
        {
            integral = last;
            d.extrapolated = true;
        }
    }

    d.converged = done && d.abs_error < kTarget;
    if (!d.converged)
        std::cerr << "warning: CDF inversion at x=" << x
                  << " did not reach the 1e-6 error target\n";
    if (diag)
        *diag = d;
    double const f = 0.5 - integral / std::numbers::pi;
    return std::clamp(f, 0.0, 1.0);
}

EventLevels EventLevels::modified(double mu_bar, double lambda, double delta, double c_plus,
                                  double c_minus, double d_plus, double d_minus, std::size_t p)
{
    double const g = std::exp(lambda * delta);
    EventLevels lv;
    lv.entry_plus = g * (mu_bar + d_plus) - mu_bar;
    lv.entry_minus = g * (mu_bar - d_minus) - mu_bar;
    lv.exit_plus = g * (mu_bar + c_plus) - mu_bar;
    lv.exit_minus = g * (mu_bar - c_minus) - mu_bar;
    lv.p = p;
    return lv;
}

namespace {

// States: waiting, short open, long open, closed.
using ChainState = std::array<double, 4>;

ChainState advance(const ChainState& s, double enter_plus, double enter_minus, double leave_plus,
                   double leave_minus)
{
    ChainState n{};
    n[0] = s[0] * (1.0 - enter_plus - enter_minus);
    n[1] = s[0] * enter_plus + s[1] * (1.0 - leave_plus);
    n[2] = s[0] * enter_minus + s[2] * (1.0 - leave_minus);
    n[3] = s[3] + s[1] * leave_plus + s[2] * leave_minus;
    return n;
}

}  // namespace

EventProbabilities event_probabilities(std::span<const EventLevels> steps,
                                       const std::function<double(std::size_t, double)>& cdf)
{
    ChainState s{1.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < steps.size(); ++i)
    {
        EventLevels const& lv = steps[i];
        s = advance(s, 1.0 - cdf(i, lv.entry_plus), cdf(i, lv.entry_minus),
                    cdf(i, lv.exit_plus), 1.0 - cdf(i, lv.exit_minus));
    }
    return {s[3], s[1] + s[2]};
}

EventProbabilities event_probabilities(const EventLevels& lv,
                                       const std::function<double(double)>& cdf)
{
    double const enter_plus = 1.0 - cdf(lv.entry_plus);
    double const enter_minus = cdf(lv.entry_minus);
    double const leave_plus = cdf(lv.exit_plus);
    double const leave_minus = 1.0 - cdf(lv.exit_minus);
    ChainState s{1.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < lv.p; ++i)
        s = advance(s, enter_plus, enter_minus, leave_plus, leave_minus);
    return {s[3], s[1] + s[2]};
}

EventIndicators classify_innovations(std::span<const double> innovations,
                                     std::span<const EventLevels> steps)
{
    int state = 0;
    std::size_t const p = std::min(steps.size(), innovations.size());
    for (std::size_t i = 0; i < p && state != 3; ++i)
    {
        double const z = innovations[i];
        EventLevels const& lv = steps[i];
        if (state == 0)
        {
            if (z > lv.entry_plus)
                state = 1;
            else if (z < lv.entry_minus)
                state = 2;
        }
        else if (state == 1 && z < lv.exit_plus)
            state = 3;
        else if (state == 2 && z > lv.exit_minus)
            state = 3;
    }
    return {state == 3, state == 1 || state == 2};
}

EventIndicators classify_innovations(std::span<const double> innovations,
                                     const EventLevels& lv)
{
    std::vector<EventLevels> const steps(std::min(lv.p, innovations.size()), lv);
    return classify_innovations(innovations, std::span<const EventLevels>(steps));
}

}  // namespace levytrade
