#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "levytrade/spectral.hpp"

namespace levytrade::testing {

/// Sample moments with delta-method standard errors, valid for any law
/// with enough finite moments.
struct MomentCheck
{
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double se_mean = 0.0;
    double se_variance = 0.0;
    double se_skewness = 0.0;
};

inline MomentCheck sample_moments(std::span<const double> x)
{
    double const n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0;
    for (double v : x)
    {
        double const c = v - mean;
        m2 += c * c;
        m3 += c * c * c;
    }
    m2 /= n;
    m3 /= n;
    double const g = m3 / std::pow(m2, 1.5);

    // Influence functions of the variance and of the skewness.
    double sv = 0.0, ss = 0.0;
    for (double v : x)
    {
        double const c = v - mean;
        double const iv = c * c - m2;
        double const is = (c * c * c - m3 - 3.0 * m2 * c) / std::pow(m2, 1.5) - 1.5 * g * iv / m2;
        sv += iv * iv;
        ss += is * is;
    }
    MomentCheck r;
    r.mean = mean;
    r.variance = m2 * n / (n - 1.0);
    r.skewness = g;
    r.se_mean = std::sqrt(m2 / n);
    r.se_variance = std::sqrt(sv / n / n);
    r.se_skewness = std::sqrt(ss / n / n);
    return r;
}

/// Sample correlation with a delta-method standard error.
inline std::pair<double, double> sample_correlation(std::span<const double> x,
                                                    std::span<const double> y)
{
    double const n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    sxx /= n;
    syy /= n;
    sxy /= n;
    double const r = sxy / std::sqrt(sxx * syy);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        double const u = (x[i] - mx) / std::sqrt(sxx);
        double const v = (y[i] - my) / std::sqrt(syy);
        double const inf = u * v - 0.5 * r * (u * u + v * v);
        s += inf * inf;
    }
    return {r, std::sqrt(s / n / n)};
}

/// First two cumulants of a law from its characteristic exponent, by
/// Richardson-extrapolated central differences at the origin.
inline std::pair<double, double> cumulants_from_exponent(const CharExponent& ce, double h = 0.05)
{
    auto k1 = [&](double s) { return (ce(s) - ce(-s)).imag() / (2.0 * s); };
    auto k2 = [&](double s) { return -(ce(s) + ce(-s)).real() / (s * s); };
    return {(4.0 * k1(h / 2) - k1(h)) / 3.0, (4.0 * k2(h / 2) - k2(h)) / 3.0};
}

/// Kolmogorov-Smirnov distance between a sample and a CDF evaluated at the
/// given probe points only.
template <class Cdf>
double ks_at_points(std::vector<double> sample, std::span<const double> probes, Cdf&& cdf)
{
    std::sort(sample.begin(), sample.end());
    double const n = static_cast<double>(sample.size());
    double worst = 0.0;
    for (double x : probes)
    {
        double const emp =
            static_cast<double>(std::upper_bound(sample.begin(), sample.end(), x) - sample.begin()) / n;
        worst = std::max(worst, std::abs(emp - cdf(x)));
    }
    return worst;
}

/// Asymptotic one-sample KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n)
{
    return 1.6276 / std::sqrt(static_cast<double>(n));
}

}  // namespace levytrade::testing
