#include "levytrade/variance_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levytrade/errors.hpp"

namespace levytrade {
namespace {

constexpr double kMinVariance = 1e-14;

struct Fit
{
    Eigen::VectorXd beta;
    Eigen::VectorXd influence;
};

/// Least squares via Householder QR; influence = X (X'X)^{-1} x. Returns
/// false without solving when R has a relatively tiny diagonal entry.
bool solve_full_rank(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& x, Fit& f)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    auto const k = X.cols();
    Eigen::VectorXd const diag = qr.matrixQR().diagonal().cwiseAbs();
    if (!(diag.minCoeff() > 1e-10 * diag.maxCoeff()))
        return false;
    auto const R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    f.beta = qr.solve(y);
    // w = R^{-T} x, influence = Q_thin w.
    Eigen::VectorXd const w = R.transpose().solve(x);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(X.rows());
    full.head(k) = w;
    f.influence = qr.householderQ() * full;
    return true;
}

}  // namespace

double penalized_value_variance(double mean1, double gamma, double s11, double s12, double s22)
{
    double const g = 1.0 + 2.0 * mean1 * gamma;
    double const v = g * g * s11 + 2.0 * gamma * gamma * s11 * s11 - 2.0 * gamma * g * s12
                     + gamma * gamma * s22;
    return std::max(0.0, v);
}

void CvConfig::validate() const
{
    if (p < 1)
        throw std::invalid_argument("cv.p must be >= 1");
    if (!(gamma >= 0.0))
        throw std::invalid_argument("gamma must be >= 0");
}

std::vector<std::size_t> cv_time_indices(std::size_t q, std::size_t p)
{
    if (p < 1 || p > q)
        throw std::invalid_argument("cv.p must lie in [1, number of steps]");
    std::vector<std::size_t> out(p);
    for (std::size_t i = 1; i <= p; ++i)
        out[i - 1] = static_cast<std::size_t>(
            std::llround(static_cast<double>(i) * static_cast<double>(q) / static_cast<double>(p)));
    return out;
}

std::vector<EventLevels> control_event_levels(double mu_bar, double lambda, double delta,
                                              std::span<const std::size_t> indices,
                                              double c_plus, double c_minus, double d_plus,
                                              double d_minus)
{
    std::vector<EventLevels> steps;
    steps.reserve(indices.size());
    std::size_t prev = 0;
    for (std::size_t idx : indices)
    {
        double const h = static_cast<double>(idx - prev) * delta;
        steps.push_back(EventLevels::modified(mu_bar, lambda, h, c_plus, c_minus, d_plus, d_minus, 1));
        prev = idx;
    }
    return steps;
}

void control_innovations(std::span<const double> values, double x0, double lambda, double delta,
                         std::span<const std::size_t> indices, std::span<double> out)
{
    if (values.size() != indices.size() || out.size() != indices.size())
        throw std::invalid_argument("control_innovations: size mismatch");
    double prev_x = x0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < indices.size(); ++i)
    {
        double const h = static_cast<double>(indices[i] - prev) * delta;
        out[i] = std::exp(lambda * h) * values[i] - prev_x;
        prev_x = values[i];
        prev = indices[i];
    }
}

CvDesign build_cv_design(const OuVgParams& params, double x0, double delta,
                         std::span<const std::size_t> indices, const Eigen::MatrixXd& values,
                         std::span<const EventIndicators> events,
                         const EventProbabilities& event_probs, const CvConfig& config)
{
    config.validate();
    auto const m = values.rows();
    auto const p = static_cast<Eigen::Index>(indices.size());
    if (values.cols() != p)
        throw std::invalid_argument("control value matrix does not match the time points");
    bool const use_events = config.include_events;
    if (use_events && static_cast<Eigen::Index>(events.size()) != m)
        throw std::invalid_argument("event indicators missing for some paths");
    // Event A is impossible with a single innovation.
    bool const use_a = use_events && p > 1;
    Eigen::Index const ne = (use_events ? 1 : 0) + (use_a ? 1 : 0);

    double const mu_bar = stationary_mean(params);
    Eigen::MatrixXd dev = values.array() - mu_bar;
    Eigen::VectorXd mean_dev(p), mean_sq(p);
    for (Eigen::Index i = 0; i < p; ++i)
    {
        auto const mv = transient_mean_variance(params, x0, static_cast<double>(indices[i]) * delta);
        double const md = mv.mean - mu_bar;
        mean_dev[i] = md;
        mean_sq[i] = mv.variance + md * md;
    }

    CvDesign d;
    d.first.resize(m, p + ne);
    d.first.leftCols(p) = dev;
    d.first_means.resize(p + ne);
    d.first_means.head(p) = mean_dev;
    Eigen::Index col = p;
    if (use_a)
    {
        for (Eigen::Index j = 0; j < m; ++j)
            d.first(j, col) = events[j].enter_and_exit ? 1.0 : 0.0;
        d.first_means[col++] = event_probs.enter_and_exit;
    }
    if (use_events)
    {
        for (Eigen::Index j = 0; j < m; ++j)
            d.first(j, col) = events[j].enter_no_exit ? 1.0 : 0.0;
        d.first_means[col++] = event_probs.enter_no_exit;
    }

    d.second.resize(m, p + ne + p);
    d.second.leftCols(p + ne) = d.first;
    d.second.rightCols(p) = dev.array().square();
    d.second_means.resize(p + ne + p);
    d.second_means.head(p + ne) = d.first_means;
    d.second_means.tail(p) = mean_sq;
    return d;
}

CvMeanFit cv_estimate_mean(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
                           const Eigen::VectorXd& means)
{
    auto const m = y.size();
    if (regressors.rows() != m || regressors.cols() != means.size())
        throw std::invalid_argument("regression dimensions do not match");

    CvMeanFit out;
    out.sample_mean = y.mean();
    for (Eigen::Index j = 0; j < regressors.cols(); ++j)
    {
        auto const c = regressors.col(j);
        double const mean = c.mean();
        double const var = (c.array() - mean).square().sum() / std::max<double>(1.0, m - 1.0);
        if (var >= kMinVariance)
            out.kept.push_back(static_cast<std::size_t>(j));
    }

    auto assemble = [&](const std::vector<std::size_t>& cols, Eigen::MatrixXd& X,
                        Eigen::VectorXd& x) {
        auto const k = static_cast<Eigen::Index>(cols.size());
        X.resize(m, k + 1);
        x.resize(k + 1);
        X.col(0).setOnes();
        x[0] = 1.0;
        for (Eigen::Index j = 0; j < k; ++j)
        {
            X.col(j + 1) = regressors.col(static_cast<Eigen::Index>(cols[j]));
            x[j + 1] = means[static_cast<Eigen::Index>(cols[j])];
        }
    };

    Eigen::MatrixXd X;
    Eigen::VectorXd x;
    assemble(out.kept, X, x);
    if (m <= X.cols())
        throw NumericalError("too few paths for the number of control variates");
    Fit f;
    if (!solve_full_rank(X, y, x, f))
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> piv(X);
        piv.setThreshold(1e-10);
        auto const rank = piv.rank();
        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < rank; ++j)
            cols.push_back(piv.colsPermutation().indices()[j]);
        if (std::find(cols.begin(), cols.end(), 0) == cols.end())
        {
            cols.pop_back();
            cols.push_back(0);
        }
        std::sort(cols.begin(), cols.end());
        std::vector<std::size_t> kept;
        for (auto c : cols)
            if (c > 0)
                kept.push_back(out.kept[static_cast<std::size_t>(c - 1)]);
        out.kept = std::move(kept);
        assemble(out.kept, X, x);
        if (!solve_full_rank(X, y, x, f))
            throw NumericalError("control variate design is singular");
    }
    out.estimate = x.dot(f.beta);
    out.residuals = y - X * f.beta;
    out.influence = f.influence;
    out.beta = Eigen::VectorXd::Zero(regressors.cols() + 1);
    out.beta[0] = f.beta[0];
    for (std::size_t j = 0; j < out.kept.size(); ++j)
        out.beta[static_cast<Eigen::Index>(out.kept[j]) + 1] = f.beta[static_cast<Eigen::Index>(j) + 1];
    return out;
}

CvEstimate cv_value_function(std::span<const double> profits, const CvDesign& design,
                             double gamma)
{
    auto const m = static_cast<Eigen::Index>(profits.size());
    Eigen::VectorXd y1 = Eigen::Map<const Eigen::VectorXd>(profits.data(), m);
    Eigen::VectorXd y2 = y1.array().square();

    CvMeanFit const f1 = cv_estimate_mean(y1, design.first, design.first_means);
    CvMeanFit const f2 = cv_estimate_mean(y2, design.second, design.second_means);
    double const r1 = static_cast<double>(f1.kept.size());
    double const r2 = static_cast<double>(f2.kept.size());
    double const n = static_cast<double>(m);

    CvEstimate e;
    e.yhat1 = f1.estimate;
    e.yhat2 = f2.estimate;
    e.beta1 = f1.beta;
    e.beta2 = f2.beta;
    e.value = e.yhat1 - gamma * e.yhat2 + gamma * e.yhat1 * e.yhat1;
    e.sigma_eps(0, 0) = f1.residuals.squaredNorm() / (n - r1 - 1.0);
    e.sigma_eps(0, 1) = f1.residuals.dot(f2.residuals) / (n - r2 - 1.0);
    e.sigma_eps(1, 0) = e.sigma_eps(0, 1);
    e.sigma_eps(1, 1) = f2.residuals.squaredNorm() / (n - r2 - 1.0);
    e.sigma_cv(0, 0) = e.sigma_eps(0, 0) * f1.influence.squaredNorm();
    e.sigma_cv(0, 1) = e.sigma_eps(0, 1) * f1.influence.dot(f2.influence);
    e.sigma_cv(1, 0) = e.sigma_cv(0, 1);
    e.sigma_cv(1, 1) = e.sigma_eps(1, 1) * f2.influence.squaredNorm();
    e.var_cv = penalized_value_variance(e.yhat1, gamma, e.sigma_cv(0, 0), e.sigma_cv(0, 1),
                                        e.sigma_cv(1, 1));

    double const m1 = y1.mean();
    double const m2 = y2.mean();
    e.value_mc = m1 - gamma * m2 + gamma * m1 * m1;
    Eigen::VectorXd const c1 = y1.array() - m1;
    Eigen::VectorXd const c2 = y2.array() - m2;
    e.sigma_mc(0, 0) = c1.squaredNorm() / (n - 1.0) / n;
    e.sigma_mc(0, 1) = c1.dot(c2) / (n - 1.0) / n;
    e.sigma_mc(1, 0) = e.sigma_mc(0, 1);
    e.sigma_mc(1, 1) = c2.squaredNorm() / (n - 1.0) / n;
    e.var_mc = penalized_value_variance(m1, gamma, e.sigma_mc(0, 0), e.sigma_mc(0, 1),
                                        e.sigma_mc(1, 1));
    e.ratio = e.var_mc > 0.0 ? e.var_cv / e.var_mc : 1.0;
    return e;
}

CvPointChoice optimize_cv_points(std::span<const std::size_t> p_grid,
                                 const std::function<double(std::size_t)>& ratio_at)
{
    if (p_grid.empty())
        throw std::invalid_argument("p grid is empty");
    CvPointChoice out;
    out.ratios.reserve(p_grid.size());
    for (std::size_t i = 0; i < p_grid.size(); ++i)
    {
        double const r = ratio_at(p_grid[i]);
        out.ratios.push_back(r);
        if (i == 0 || r < out.ratio_star)
        {
            out.ratio_star = r;
            out.p_star = p_grid[i];
        }
    }
    return out;
}

}  // namespace levytrade
