#include "levytrade/levy_models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace levytrade {
namespace {

void require(bool ok, const char* what)
{
    if (!ok)
        throw std::invalid_argument(what);
}

// Moments of X(t) scale the driver cumulants by (1 - exp(-order*lambda*t)) / order.
double decay_factor(double lambda, double t, int order)
{
    return -std::expm1(-order * lambda * t) / order;
}

DriverCumulants marginal_cumulants(const OuWvagParams& p, std::size_t k)
{
    return driver_cumulants(p.marginal(k));
}

}  // namespace

void OuVgParams::validate() const
{
    require(std::isfinite(lambda) && lambda > 0, "lambda must be > 0");
    require(std::isfinite(b) && b > 0, "b must be > 0");
    require(std::isfinite(sigma2) && sigma2 > 0, "sigma2 must be > 0");
    require(std::isfinite(mu), "mu must be finite");
    require(std::isfinite(eta), "eta must be finite");
}

double OuWvagParams::beta(std::size_t k) const
{
    return (1.0 - a * alpha[k]) / alpha[k];
}

double OuWvagParams::rho(std::size_t k, std::size_t l) const
{
    return sigma(k, l) / std::sqrt(sigma(k, k) * sigma(l, l));
}

OuVgParams OuWvagParams::marginal(std::size_t k) const
{
    return OuVgParams{lambda, 1.0 / alpha[k], mu[k], sigma(k, k), eta[k]};
}

void OuWvagParams::validate() const
{
    auto const n = alpha.size();
    require(n >= 2, "WVAG dimension must be >= 2");
    require(mu.size() == n && eta.size() == n, "mu and eta must match alpha in length");
    require(sigma.rows() == n && sigma.cols() == n, "Sigma must be n x n");
    require(std::isfinite(lambda) && lambda > 0, "lambda must be > 0");
    require(std::isfinite(a) && a > 0, "a must be > 0");
    for (Eigen::Index k = 0; k < n; ++k)
    {
        require(alpha[k] > 0 && alpha[k] < 1.0 / a, "alpha_k must lie in (0, 1/a)");
        require(beta(static_cast<std::size_t>(k)) > 0, "beta_k must be > 0");
    }
    require(sigma.isApprox(sigma.transpose(), 1e-12), "Sigma must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    require(llt.info() == Eigen::Success, "Sigma must be positive definite");
}

OuWvagParams OuWvagParams::bivariate(double lambda, double a, double alpha1, double alpha2,
                                     double mu1, double mu2, double s11, double s22,
                                     double rho, double eta1, double eta2)
{
    OuWvagParams p;
    p.lambda = lambda;
    p.a = a;
    p.alpha = Eigen::Vector2d(alpha1, alpha2);
    p.mu = Eigen::Vector2d(mu1, mu2);
    p.eta = Eigen::Vector2d(eta1, eta2);
    double const s12 = rho * std::sqrt(s11 * s22);
    p.sigma.resize(2, 2);
    p.sigma << s11, s12, s12, s22;
    return p;
}

DriverCumulants driver_cumulants(const OuVgParams& p)
{
    double const alpha = 1.0 / p.b;
    return DriverCumulants{
        p.eta + p.mu,
        p.sigma2 + alpha * p.mu * p.mu,
        3.0 * p.sigma2 * p.mu * alpha + 2.0 * p.mu * p.mu * p.mu * alpha * alpha,
    };
}

double stationary_mean(const OuVgParams& p)
{
    return p.mu + p.eta;
}

Eigen::VectorXd stationary_mean(const OuWvagParams& p)
{
    return p.mu + p.eta;
}

TransientMoments transient_mean_variance(const OuVgParams& p, double x0, double t)
{
    if (!(t >= 0))
        throw std::invalid_argument("t must be >= 0");
    auto const c = driver_cumulants(p);
    double const keep = std::exp(-p.lambda * t);
    return TransientMoments{keep * x0 + (1.0 - keep) * c.k1,
                            decay_factor(p.lambda, t, 2) * c.k2};
}

TransientMoments transient_mean_variance(const OuWvagParams& p, std::size_t k, double x0,
                                         double t)
{
    return transient_mean_variance(p.marginal(k), x0, t);
}

double transient_skewness(const OuVgParams& p, double t)
{
    auto const c = driver_cumulants(p);
    double const m3 = decay_factor(p.lambda, t, 3) * c.k3;
    double const m2 = decay_factor(p.lambda, t, 2) * c.k2;
    return m3 / std::pow(m2, 1.5);
}

double stationary_skewness(const OuVgParams& p)
{
    auto const c = driver_cumulants(p);
    return (std::pow(2.0, 1.5) / 3.0) * c.k3 / std::pow(c.k2, 1.5);
}

double stationary_skewness(const OuWvagParams& p, std::size_t k)
{
    return stationary_skewness(p.marginal(k));
}

double stationary_cross_correlation(const OuWvagParams& p, std::size_t k, std::size_t l)
{
    double const cov = p.a
                       * (std::min(p.alpha[k], p.alpha[l]) * p.sigma(k, l)
                          + p.alpha[k] * p.alpha[l] * p.mu[k] * p.mu[l]);
    auto const ck = marginal_cumulants(p, k);
    auto const cl = marginal_cumulants(p, l);
    return cov / (std::sqrt(ck.k2) * std::sqrt(cl.k2));
}

double transient_covariance(const OuWvagParams& p, std::size_t k, std::size_t l, double t)
{
    double const cov = p.a
                       * (std::min(p.alpha[k], p.alpha[l]) * p.sigma(k, l)
                          + p.alpha[k] * p.alpha[l] * p.mu[k] * p.mu[l]);
    return decay_factor(p.lambda, t, 2) * cov;
}

StationaryMoments stationary_moments(const OuVgParams& p)
{
    auto const c = driver_cumulants(p);
    return StationaryMoments{c.k1, c.k2 / 2.0, stationary_skewness(p), std::nullopt};
}

StationaryMoments stationary_moments(const OuWvagParams& p, std::size_t k)
{
    auto m = stationary_moments(p.marginal(k));
    if (p.dim() == 2)
        m.cross_correlation = stationary_cross_correlation(p, 0, 1);
    return m;
}

//---------------------------------------------------------------------------//

VgIncrementSampler::VgIncrementSampler(const OuVgParams& p, double dt)
    : drift_(p.eta * dt)
    , mu_(p.mu)
    , sigma_(std::sqrt(p.sigma2))
    , clock_(p.b * dt, 1.0 / p.b)
{
    if (!(dt > 0))
        throw std::invalid_argument("dt must be > 0");
}

double VgIncrementSampler::operator()(Engine& rng)
{
    double const g = clock_(rng);
    return drift_ + mu_ * g + sigma_ * std::sqrt(g) * normal_(rng);
}

WvagIncrementSampler::WvagIncrementSampler(const OuWvagParams& p, double dt)
    : dim_(p.dim())
    , common_clock_(p.a * dt, 1.0 / p.a)
    , z_(p.dim())
{
    if (!(dt > 0))
        throw std::invalid_argument("dt must be > 0");
    auto const n = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd common_cov(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l)
            common_cov(k, l) = p.a * p.sigma(k, l) * std::min(p.alpha[k], p.alpha[l]);
    Eigen::LLT<Eigen::MatrixXd> llt(common_cov);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("common covariance a*(alpha<>Sigma) is not positive definite");
    Eigen::MatrixXd const L = llt.matrixL();

    common_chol_.assign(dim_ * dim_, 0.0);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        auto const ku = static_cast<std::size_t>(k);
        drift_.push_back(p.eta[k] * dt);
        common_mu_.push_back(p.a * p.alpha[k] * p.mu[k]);
        double const beta = p.beta(ku);
        idio_mu_.push_back(p.alpha[k] * beta * p.mu[k]);
        idio_sd_.push_back(std::sqrt(p.alpha[k] * beta * p.sigma(k, k)));
        idio_clock_.emplace_back(beta * dt, 1.0 / beta);
        for (Eigen::Index l = 0; l <= k; ++l)
            common_chol_[ku * dim_ + static_cast<std::size_t>(l)] = L(k, l);
    }
}

void WvagIncrementSampler::operator()(Engine& rng, double* out)
{
    double const g0 = common_clock_(rng);
    double const root_g0 = std::sqrt(g0);
    for (std::size_t k = 0; k < dim_; ++k)
        z_[k] = normal_(rng);
    for (std::size_t k = 0; k < dim_; ++k)
    {
        double shock = 0.0;
        for (std::size_t l = 0; l <= k; ++l)
            shock += common_chol_[k * dim_ + l] * z_[l];
        double const gk = idio_clock_[k](rng);
        out[k] = drift_[k] + common_mu_[k] * g0 + root_g0 * shock + idio_mu_[k] * gk
                 + idio_sd_[k] * std::sqrt(gk) * normal_(rng);
    }
}

double vg_increment(const OuVgParams& params, double dt, Engine& rng)
{
    VgIncrementSampler sampler(params, dt);
    return sampler(rng);
}

Eigen::VectorXd wvag_increment(const OuWvagParams& params, double dt, Engine& rng)
{
    WvagIncrementSampler sampler(params, dt);
    Eigen::VectorXd out(static_cast<Eigen::Index>(sampler.dim()));
    sampler(rng, out.data());
    return out;
}

}  // namespace levytrade
