#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "levytrade/rng.hpp"

namespace levytrade {

/// OU process driven by a univariate variance gamma process
/// Z = eta*t + B(G(t)), B ~ BM(mu, sigma2), G ~ gamma subordinator with
/// shape and rate both equal to b. Mean reversion runs on the clock lambda*t.
struct OuVgParams
{
    double lambda = 1.0;
    double b = 1.0;
    double mu = 0.0;
    double sigma2 = 0.0;
    double eta = 0.0;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

/// OU process driven by an n-dimensional weak variance alpha-gamma process.
/// Only n = 2 is exercised by the trading engine, but the model and its
/// simulation work for any n >= 2.
struct OuWvagParams
{
    double lambda = 1.0;
    double a = 1.0;
    Eigen::VectorXd alpha;
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    Eigen::VectorXd eta;

    std::size_t dim() const { return static_cast<std::size_t>(alpha.size()); }
    /// Idiosyncratic gamma rate (1 - a*alpha_k) / alpha_k.
    double beta(std::size_t k) const;
    /// Brownian correlation Sigma_kl / sqrt(Sigma_kk Sigma_ll).
    double rho(std::size_t k = 0, std::size_t l = 1) const;
    /// Parameters of the univariate VG law followed by component k.
    OuVgParams marginal(std::size_t k) const;

    void validate() const;

    /// Bivariate convenience constructor with Sigma_12 = rho*sqrt(s11*s22).
    static OuWvagParams bivariate(double lambda, double a, double alpha1, double alpha2,
                                  double mu1, double mu2, double s11, double s22, double rho,
                                  double eta1, double eta2);
};

/// First three cumulants of Z(1).
struct DriverCumulants
{
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
};

DriverCumulants driver_cumulants(const OuVgParams& params);

struct StationaryMoments
{
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    std::optional<double> cross_correlation;
};

struct TransientMoments
{
    double mean = 0.0;
    double variance = 0.0;
};

double stationary_mean(const OuVgParams& params);
Eigen::VectorXd stationary_mean(const OuWvagParams& params);

/// Mean and variance of X(t) given a constant X(0) = x0.
TransientMoments transient_mean_variance(const OuVgParams& params, double x0, double t);
TransientMoments transient_mean_variance(const OuWvagParams& params, std::size_t k, double x0,
                                         double t);
/// Skewness of X(t) given constant X(0); undefined (NaN) at t = 0.
double transient_skewness(const OuVgParams& params, double t);

double stationary_skewness(const OuVgParams& params);
double stationary_skewness(const OuWvagParams& params, std::size_t k);
double stationary_cross_correlation(const OuWvagParams& params, std::size_t k = 0,
                                    std::size_t l = 1);
/// Covariance of X_k(t), X_l(t) for k != l.
double transient_covariance(const OuWvagParams& params, std::size_t k, std::size_t l, double t);

StationaryMoments stationary_moments(const OuVgParams& params);
StationaryMoments stationary_moments(const OuWvagParams& params, std::size_t k);

/// Draws V(dt) = eta*dt + B(G(dt)) for a fixed step. Holds the distribution
/// objects so repeated draws in a path loop stay allocation free.
class VgIncrementSampler
{
  public:
    VgIncrementSampler(const OuVgParams& params, double dt);

    double operator()(Engine& rng);

  private:
    double drift_;
    double mu_;
    double sigma_;
    boost::random::gamma_distribution<double> clock_;
    boost::random::normal_distribution<double> normal_;
};

/// Draws Z(dt) for the WVAG driver through its VG decomposition: a common
/// n-dimensional VG part on one gamma clock plus n independent univariate
/// VG parts.
class WvagIncrementSampler
{
  public:
    WvagIncrementSampler(const OuWvagParams& params, double dt);

    std::size_t dim() const { return dim_; }

    /// Writes dim() values to out.
    void operator()(Engine& rng, double* out);

  private:
    std::size_t dim_;
    std::vector<double> drift_;
    std::vector<double> common_mu_;
    std::vector<double> common_chol_;  // lower triangular, row major
    std::vector<double> idio_mu_;
    std::vector<double> idio_sd_;
    boost::random::gamma_distribution<double> common_clock_;
    std::vector<boost::random::gamma_distribution<double>> idio_clock_;
    boost::random::normal_distribution<double> normal_;
    std::vector<double> z_;
};

/// One draw of the VG increment over dt > 0.
double vg_increment(const OuVgParams& params, double dt, Engine& rng);
/// One draw of the WVAG increment over dt > 0.
Eigen::VectorXd wvag_increment(const OuWvagParams& params, double dt, Engine& rng);

}  // namespace levytrade
