#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "levytrade/levy_models.hpp"
#include "levytrade/rng.hpp"

namespace levytrade {

/// Uniform observation grid t_i = i * delta, i = 0..steps(). The OU-WVAG
/// simulator additionally splits each step into inner_delta sub-steps.
struct PathGrid
{
    double delta = 0.01;
    double horizon = 50.0;
    std::optional<double> inner_delta;

    std::size_t steps() const;
    /// Number of Euler sub-steps per outer step. Requires inner_delta.
    std::size_t inner_steps() const;
    double time(std::size_t i) const { return static_cast<double>(i) * delta; }

    /// Throws std::invalid_argument when horizon is not a whole number of
    /// steps or inner_delta does not divide delta.
    void validate() const;
};

/// A simulated spread trajectory, scalar (dim = 1) or vector valued.
/// Values are stored time-major: value(i, k) = values[i * dim + k].
/// The recursion X(t_i) = decay * (X(t_{i-1}) + innovation(i, k)) holds
/// exactly for every stored step, with decay = exp(-lambda * delta).
struct SpreadPath
{
    std::size_t dim = 1;
    double delta = 0.0;
    double decay = 1.0;
    std::vector<double> x0;
    std::vector<double> values;
    std::vector<double> innovations;  // innovation(i, k) for i = 1..steps at index (i-1)*dim+k

    std::size_t steps() const { return dim == 0 ? 0 : values.size() / dim - 1; }
    double horizon() const { return static_cast<double>(steps()) * delta; }
    double time(std::size_t i) const { return static_cast<double>(i) * delta; }
    double value(std::size_t i, std::size_t k = 0) const { return values[i * dim + k]; }
    double innovation(std::size_t i, std::size_t k = 0) const
    {
        return innovations[(i - 1) * dim + k];
    }
    /// Copy of component k as a contiguous series X_k(t_0..t_q).
    std::vector<double> component(std::size_t k) const;
};

/// Rates b+ and b- such that VG(b, mu, sigma2) = G+ - G- with
/// G+- gamma subordinators of shape rate b and rates b+-.
std::pair<double, double> vg_difference_rates(const OuVgParams& params);

/// Exact sampler for the OU-VG innovation
///   Z*(delta) = int_0^delta exp(lambda s) dZ(lambda s).
/// Each gamma leg is drawn as exp(x) * (gamma + compound Poisson) with
/// x = lambda * delta; see sample_leg for the law of the parts.
class OuVgInnovationSampler
{
  public:
    OuVgInnovationSampler(const OuVgParams& params, double delta);

    double operator()(Engine& rng);

    double rate_plus() const { return plus_.rate; }
    double rate_minus() const { return minus_.rate; }
    /// Deterministic part eta * (exp(lambda delta) - 1).
    double drift() const { return drift_; }

  private:
    struct Leg
    {
        double rate;
        boost::random::gamma_distribution<double> gamma;
    };

    double sample_leg(Leg& leg, Engine& rng);

    double x_;
    double growth_;
    double drift_;
    Leg plus_;
    Leg minus_;
    boost::random::poisson_distribution<int, double> jump_count_;
    boost::random::exponential_distribution<double> unit_exp_;
    boost::random::uniform_01<double> uniform_;
};

/// One exact draw of Z*(delta). Rejects delta <= 0.
double sample_zstar_ouvg(const OuVgParams& params, double delta, Engine& rng);

/// Reusable exact OU-VG path builder; keeps sampler state and the output
/// buffers between paths.
class OuVgPathSimulator
{
  public:
    OuVgPathSimulator(const OuVgParams& params, const PathGrid& grid);

    void simulate(double x0, Engine& rng, SpreadPath& out);

  private:
    PathGrid grid_;
    double decay_;
    OuVgInnovationSampler innovation_;
};

/// Euler approximation of the OU-WVAG innovation: for each outer step,
/// Z*(delta) ~= sum_j exp(lambda s_{j-1}) dZ_j with dZ_j WVAG increments over
/// lambda * inner_delta of driver time and s_j = j * inner_delta.
class OuWvagPathSimulator
{
  public:
    OuWvagPathSimulator(const OuWvagParams& params, const PathGrid& grid);

    void simulate(std::span<const double> x0, Engine& rng, SpreadPath& out);

  private:
    PathGrid grid_;
    double decay_;
    std::vector<double> weights_;
    WvagIncrementSampler increment_;
    std::vector<double> scratch_;
};

SpreadPath simulate_ouvg_path(const OuVgParams& params, const PathGrid& grid, double x0,
                              Engine& rng);
SpreadPath simulate_ouwvag_path(const OuWvagParams& params, const PathGrid& grid,
                                std::span<const double> x0, Engine& rng);

/// Rebuilds values from x0 and the stored innovations using the path's decay.
SpreadPath rebuild_from_innovations(const SpreadPath& path);

/// Debug dump: one row per time step with t, X_k and Z*_k columns.
void write_path_csv(std::ostream& os, const SpreadPath& path, std::size_t path_id,
                    bool header);

}  // namespace levytrade
