#include "levytrade/ldoup_sim.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "levytrade/csv.hpp"

namespace levytrade {
namespace {

bool is_whole(double ratio)
{
    return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, std::abs(ratio));
}

}  // namespace

std::size_t PathGrid::steps() const
{
    return static_cast<std::size_t>(std::llround(horizon / delta));
}

std::size_t PathGrid::inner_steps() const
{
    if (!inner_delta)
        throw std::invalid_argument("inner_delta is required for Euler simulation");
    return static_cast<std::size_t>(std::llround(delta / *inner_delta));
}

void PathGrid::validate() const
{
    if (!(delta > 0))
        throw std::invalid_argument("delta must be > 0");
    if (!(horizon > 0))
        throw std::invalid_argument("horizon must be > 0");
    if (!is_whole(horizon / delta) || steps() == 0)
        throw std::invalid_argument("horizon must be a whole number of delta steps");
    if (inner_delta)
    {
        if (!(*inner_delta > 0) || *inner_delta > delta)
            throw std::invalid_argument("inner_delta must lie in (0, delta]");
        if (!is_whole(delta / *inner_delta))
            throw std::invalid_argument("inner_delta must divide delta");
    }
}

std::vector<double> SpreadPath::component(std::size_t k) const
{
    std::vector<double> out(steps() + 1);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = value(i, k);
    return out;
}

std::pair<double, double> vg_difference_rates(const OuVgParams& p)
{
    double const s = std::sqrt(p.mu * p.mu + 2.0 * p.sigma2 * p.b);
    return {2.0 * p.b / (s + p.mu), 2.0 * p.b / (s - p.mu)};
}

//---------------------------------------------------------------------------//

OuVgInnovationSampler::OuVgInnovationSampler(const OuVgParams& p, double delta)
    : x_(p.lambda * delta)
    , growth_(std::exp(p.lambda * delta))
    , drift_(p.eta * std::expm1(p.lambda * delta))
    , plus_{0.0, boost::random::gamma_distribution<double>()}
    , minus_{0.0, boost::random::gamma_distribution<double>()}
    , jump_count_(p.b * x_ * x_ / 2.0)
{
    if (!(delta > 0))
        throw std::invalid_argument("delta must be > 0");
    p.validate();
    auto const [bp, bm] = vg_difference_rates(p);
    plus_.rate = bp;
    minus_.rate = bm;
    // Gamma(shape b*x, rate b+- * exp(x)); boost takes a scale.
    plus_.gamma = boost::random::gamma_distribution<double>(p.b * x_, 1.0 / (bp * growth_));
    minus_.gamma = boost::random::gamma_distribution<double>(p.b * x_, 1.0 / (bm * growth_));
}

double OuVgInnovationSampler::sample_leg(Leg& leg, Engine& rng)
{
    double total = leg.gamma(rng);
    // Compound Poisson part: N ~ Poisson(b x^2 / 2) jumps, each
    // J | U ~ Exponential(rate * exp(x sqrt(U))) with U ~ Uniform(0, 1).
    int const n = jump_count_(rng);
    for (int j = 0; j < n; ++j)
    {
        double const u = uniform_(rng);
        total += unit_exp_(rng) / (leg.rate * std::exp(x_ * std::sqrt(u)));
    }
    return growth_ * total;
}

double OuVgInnovationSampler::operator()(Engine& rng)
{
    double const up = sample_leg(plus_, rng);
    double const down = sample_leg(minus_, rng);
    return drift_ + up - down;
}

double sample_zstar_ouvg(const OuVgParams& params, double delta, Engine& rng)
{
    OuVgInnovationSampler sampler(params, delta);
    return sampler(rng);
}

//---------------------------------------------------------------------------//

OuVgPathSimulator::OuVgPathSimulator(const OuVgParams& params, const PathGrid& grid)
    : grid_(grid)
    , decay_(std::exp(-params.lambda * grid.delta))
    , innovation_(params, grid.delta)
{
    grid_.validate();
}

void OuVgPathSimulator::simulate(double x0, Engine& rng, SpreadPath& out)
{
    std::size_t const q = grid_.steps();
    out.dim = 1;
    out.delta = grid_.delta;
    out.decay = decay_;
    out.x0.assign(1, x0);
    out.values.resize(q + 1);
    out.innovations.resize(q);
    out.values[0] = x0;
    double x = x0;
    for (std::size_t i = 1; i <= q; ++i)
    {
        double const z = innovation_(rng);
        x = decay_ * (x + z);
        out.innovations[i - 1] = z;
        out.values[i] = x;
    }
}

OuWvagPathSimulator::OuWvagPathSimulator(const OuWvagParams& params, const PathGrid& grid)
    : grid_(grid)
    , decay_(std::exp(-params.lambda * grid.delta))
    , increment_(params, params.lambda * grid.inner_delta.value_or(grid.delta))
    , scratch_(params.dim())
{
    params.validate();
    grid_.validate();
    std::size_t const inner = grid_.inner_steps();
    double const h = *grid_.inner_delta;
    weights_.resize(inner);
    for (std::size_t j = 0; j < inner; ++j)
        weights_[j] = std::exp(params.lambda * static_cast<double>(j) * h);
}

void OuWvagPathSimulator::simulate(std::span<const double> x0, Engine& rng, SpreadPath& out)
{
    std::size_t const n = increment_.dim();
    if (x0.size() != n)
        throw std::invalid_argument("x0 dimension does not match the model");
    std::size_t const q = grid_.steps();
    out.dim = n;
    out.delta = grid_.delta;
    out.decay = decay_;
    out.x0.assign(x0.begin(), x0.end());
    out.values.resize((q + 1) * n);
    out.innovations.resize(q * n);
    std::copy(x0.begin(), x0.end(), out.values.begin());
    for (std::size_t i = 1; i <= q; ++i)
    {
        double* z = &out.innovations[(i - 1) * n];
        std::fill(z, z + n, 0.0);
        for (double w : weights_)
        {
            increment_(rng, scratch_.data());
            for (std::size_t k = 0; k < n; ++k)
                z[k] += w * scratch_[k];
        }
        double const* prev = &out.values[(i - 1) * n];
        double* cur = &out.values[i * n];
        for (std::size_t k = 0; k < n; ++k)
            cur[k] = decay_ * (prev[k] + z[k]);
    }
}

SpreadPath simulate_ouvg_path(const OuVgParams& params, const PathGrid& grid, double x0,
                              Engine& rng)
{
    OuVgPathSimulator sim(params, grid);
    SpreadPath path;
    sim.simulate(x0, rng, path);
    return path;
}

SpreadPath simulate_ouwvag_path(const OuWvagParams& params, const PathGrid& grid,
                                std::span<const double> x0, Engine& rng)
{
    OuWvagPathSimulator sim(params, grid);
    SpreadPath path;
    sim.simulate(x0, rng, path);
    return path;
}

SpreadPath rebuild_from_innovations(const SpreadPath& path)
{
    SpreadPath out = path;
    std::size_t const n = path.dim;
    std::copy(path.x0.begin(), path.x0.end(), out.values.begin());
    for (std::size_t i = 1; i <= path.steps(); ++i)
        for (std::size_t k = 0; k < n; ++k)
            out.values[i * n + k]
                = path.decay * (out.values[(i - 1) * n + k] + path.innovation(i, k));
    return out;
}

void write_path_csv(std::ostream& os, const SpreadPath& path, std::size_t path_id, bool header)
{
    if (header)
    {
        os << "path,t";
        for (std::size_t k = 0; k < path.dim; ++k)
            os << ",x" << (k + 1);
        for (std::size_t k = 0; k < path.dim; ++k)
            os << ",zstar" << (k + 1);
        os << '\n';
    }
    for (std::size_t i = 0; i <= path.steps(); ++i)
    {
        os << path_id << ',' << fmt6(path.time(i));
        for (std::size_t k = 0; k < path.dim; ++k)
            os << ',' << fmt6(path.value(i, k));
        for (std::size_t k = 0; k < path.dim; ++k)
            os << ',' << (i == 0 ? std::string() : fmt6(path.innovation(i, k)));
        os << '\n';
    }
}

}  // namespace levytrade
