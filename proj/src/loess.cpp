#include "levytrade/loess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levytrade/errors.hpp"

namespace levytrade {
namespace {

double tricube(double u)
{
    if (u >= 1.0)
        return 0.0;
    double const t = 1.0 - u * u * u;
    return t * t * t;
}

double bisquare(double u)
{
    if (std::abs(u) >= 1.0)
        return 0.0;
    double const t = 1.0 - u * u;
    return t * t;
}

double median(std::vector<double> v)
{
    std::size_t const mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1)
        return hi;
    double const lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

void fit(std::span<const double> xs, std::span<const double> ys,
         const std::vector<double>& robust, std::size_t k, std::vector<double>& out)
{
    std::size_t const n = xs.size();
    std::size_t left = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const x = xs[i];
        // Slide the k-point window [left, left+k) towards x.
        while (left + k < n && x - xs[left] > xs[left + k] - x)
            ++left;
        double const h = std::max(x - xs[left], xs[left + k - 1] - x);
        if (!(h > 0.0))
            throw NumericalError("loess: degenerate neighbourhood");
        double const radius = h * (1.0 + 1e-10);

        double sw = 0, sx = 0, sy = 0;
        for (std::size_t j = left; j < left + k; ++j)
        {
            double const w = tricube(std::abs(xs[j] - x) / radius) * robust[j];
            sw += w;
            sx += w * xs[j];
            sy += w * ys[j];
        }
        if (!(sw > 0.0))
        {
            out[i] = ys[i];
            continue;
        }
        double const mx = sx / sw;
        double const my = sy / sw;
        double sxx = 0, sxy = 0;
        for (std::size_t j = left; j < left + k; ++j)
        {
            double const w = tricube(std::abs(xs[j] - x) / radius) * robust[j];
            sxx += w * (xs[j] - mx) * (xs[j] - mx);
            sxy += w * (xs[j] - mx) * (ys[j] - my);
        }
        double const slope = sxx > 1e-14 * h * h * sw ? sxy / sxx : 0.0;
        out[i] = my + slope * (x - mx);
    }
}

}  // namespace

std::vector<double> loess_smooth(std::span<const double> xs, std::span<const double> ys,
                                 double span, int robustness_iterations)
{
    if (xs.size() != ys.size())
        throw std::invalid_argument("loess: xs and ys differ in length");
    if (!(span > 0.0 && span <= 1.0))
        throw std::invalid_argument("loess: span must lie in (0, 1]");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw std::invalid_argument("loess: xs must be strictly increasing");
    std::size_t const n = xs.size();
    if (n < 2)
        throw NumericalError("loess: degenerate neighbourhood");

    std::size_t k = static_cast<std::size_t>(std::ceil(span * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, std::min<std::size_t>(3, n), n);

    std::vector<double> robust(n, 1.0);
    std::vector<double> out(n);
    fit(xs, ys, robust, k, out);
    for (int it = 0; it < robustness_iterations; ++it)
    {
        std::vector<double> abs_res(n);
        for (std::size_t i = 0; i < n; ++i)
            abs_res[i] = std::abs(ys[i] - out[i]);
        double const s = median(abs_res);
        // Residuals at rounding level carry no outlier information.
        double mean_abs_y = 0.0;
        for (double y : ys)
            mean_abs_y += std::abs(y);
        mean_abs_y /= static_cast<double>(n);
        if (!(6.0 * s > 1e-7 * mean_abs_y))
            break;
        for (std::size_t i = 0; i < n; ++i)
            robust[i] = bisquare((ys[i] - out[i]) / (6.0 * s));
        fit(xs, ys, robust, k, out);
    }
    return out;
}

}  // namespace levytrade
