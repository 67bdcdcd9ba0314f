#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "levytrade/levy_models.hpp"
#include "levytrade/spectral.hpp"

namespace levytrade {

/// Delta-method variance of V = Y1 - gamma Y2 + gamma Y1^2 for an estimator
/// (Y1, Y2) with mean (mean1, .) and covariance [[s11, s12], [s12, s22]].
double penalized_value_variance(double mean1, double gamma, double s11, double s12, double s22);

struct CvConfig
{
    std::size_t p = 1;            // number of observation times used as controls
    bool include_events = true;   // add the innovation-sequence indicators
    double gamma = 0.0;

    void validate() const;
};

/// Grid indices round(i q / p), i = 1..p, of the control time points.
std::vector<std::size_t> cv_time_indices(std::size_t q, std::size_t p);

/// Event levels for the innovations between consecutive control times
/// t_0 = 0 and t_i = indices[i-1] * delta. Step i spans t_i - t_{i-1}.
std::vector<EventLevels> control_event_levels(double mu_bar, double lambda, double delta,
                                              std::span<const std::size_t> indices,
                                              double c_plus, double c_minus, double d_plus,
                                              double d_minus);

/// Innovations Z_i = exp(lambda h_i) X(t_i) - X(t_{i-1}) of one path seen
/// only at the control times (values[i] = X(t_{i+1}), X(t_0) = x0).
void control_innovations(std::span<const double> values, double x0, double lambda, double delta,
                         std::span<const std::size_t> indices, std::span<double> out);

/// Regressors (without intercept) and their exact means for the two
/// regressions: `first` for P and `second` for P^2.
struct CvDesign
{
    Eigen::MatrixXd first;
    Eigen::VectorXd first_means;
    Eigen::MatrixXd second;
    Eigen::VectorXd second_means;
};

/// Assembles the control variates for m paths of an OU-VG spread started at
/// x0. `values` is m x p with X at the control times `indices` (grid step
/// delta). `events` holds per-path indicators and may be empty when the
/// configuration excludes them; `event_probs` are their exact means.
CvDesign build_cv_design(const OuVgParams& params, double x0, double delta,
                         std::span<const std::size_t> indices, const Eigen::MatrixXd& values,
                         std::span<const EventIndicators> events,
                         const EventProbabilities& event_probs, const CvConfig& config);

struct CvMeanFit
{
    double estimate = 0.0;             // prediction at (1, means)
    double sample_mean = 0.0;
    Eigen::VectorXd beta;              // intercept first; dropped columns are 0
    Eigen::VectorXd residuals;
    Eigen::VectorXd influence;         // X (X'X)^{-1} x, so Var = s2 * |influence|^2
    std::vector<std::size_t> kept;     // regressor columns used
};

/// Least-squares fit of y on an intercept plus the columns of `regressors`,
/// evaluated at x = (1, means). Columns with sample variance below 1e-14 are
/// dropped, as are columns found collinear by a pivoted QR. Throws
/// NumericalError when m <= kept columns + 1.
CvMeanFit cv_estimate_mean(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
                           const Eigen::VectorXd& means);

struct CvEstimate
{
    double value = 0.0;       // control variate estimate of V
    double value_mc = 0.0;    // plain Monte Carlo estimate on the same sample
    double yhat1 = 0.0;
    double yhat2 = 0.0;
    double var_cv = 0.0;
    double var_mc = 0.0;
    double ratio = 0.0;       // var_cv / var_mc
    Eigen::VectorXd beta1;
    Eigen::VectorXd beta2;
    Eigen::Matrix2d sigma_eps = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d sigma_cv = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d sigma_mc = Eigen::Matrix2d::Zero();
};

/// Control variate estimate of V from profits P and a design built on the
/// same paths, with its plug-in variance and the ratio to plain MC.
CvEstimate cv_value_function(std::span<const double> profits, const CvDesign& design,
                             double gamma);

struct CvPointChoice
{
    std::size_t p_star = 0;
    double ratio_star = 0.0;
    std::vector<double> ratios;  // aligned with the searched grid
};

/// Minimizes the estimated ratio over p_grid; `ratio_at(p)` supplies R(p).
CvPointChoice optimize_cv_points(std::span<const std::size_t> p_grid,
                                 const std::function<double(std::size_t)>& ratio_at);

}  // namespace levytrade
