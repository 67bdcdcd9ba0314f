#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "levytrade/ldoup_sim.hpp"

namespace levytrade {

/// Entry (d) and exit (c) offsets around the stationary mean for one spread.
/// A short position opens above mu_bar + d_plus and closes below
/// mu_bar + c_plus; a long position opens below mu_bar - d_minus and closes
/// above mu_bar - c_minus.
struct SpreadLevels
{
    double c_plus = 0.0;
    double c_minus = 0.0;
    double d_plus = 0.0;
    double d_minus = 0.0;

    static SpreadLevels symmetric(double c, double d) { return {c, c, d, d}; }
    /// Levels that can never be entered; turns a spread off.
    static SpreadLevels disabled();

    /// Throws std::invalid_argument unless 0 <= c < d on both sides.
    void validate() const;
};

struct StrategyLevels
{
    std::vector<SpreadLevels> spreads;  // one per spread
    double r = 0.01;
    double gamma = 0.0;

    void validate() const;
};

enum class OutcomeClass : std::uint8_t
{
    traded_spread1_only,
    traded_spread2_only,
    traded_both,
    traded_neither,
    entered_not_exited,
};

std::string_view to_string(OutcomeClass c);

/// Passage indices on the grid for one spread; `never` marks a level that
/// is not reached by T. tau(i) caps at the horizon.
struct PassageIndices
{
    static constexpr std::size_t never = std::numeric_limits<std::size_t>::max();

    std::size_t entry_plus = never;
    std::size_t exit_plus = never;
    std::size_t entry_minus = never;
    std::size_t exit_minus = never;
};

/// Passage times for every spread of the path, in grid units. Exit indices
/// are searched from the matching entry onward. Strict inequalities only.
std::vector<PassageIndices> passage_indices(const SpreadPath& path,
                                            const StrategyLevels& levels,
                                            std::span<const double> mu_bar);

/// Capped passage time tau = min(index, q) * delta.
double passage_time(const SpreadPath& path, std::size_t index);

struct TradeOutcome
{
    double tau_entry = 0.0;
    double tau_exit = 0.0;
    double profit = 0.0;
    double overshoot = 0.0;  // univariate only; 0 without entry
    OutcomeClass outcome_class = OutcomeClass::traded_neither;
    bool entered = false;
    bool exited = false;
    std::array<double, 2> weights{0.0, 0.0};
};

/// Discounted profit over one trade cycle on a scalar path. On
/// tau_{d+} == tau_{d-} the short branch wins. A position still open at T is
/// marked at X(T) and the class is entered_not_exited.
TradeOutcome trade_profit_univariate(const SpreadPath& path, const StrategyLevels& levels,
                                     double mu_bar);

/// Bivariate trade cycle: the first spread to enter is traded alone, the
/// other spread is ignored from then on. If both enter on the same step each
/// is traded on its own side with weight 0.5. Classes describe entry only;
/// `exited` reports whether every opened leg closed before T.
TradeOutcome trade_profit_bivariate(const SpreadPath& path, const StrategyLevels& levels,
                                    std::span<const double> mu_bar);

struct ValueEstimate
{
    double value = 0.0;
    double mean_p = 0.0;
    double mean_p2 = 0.0;
    double variance_of_estimator = 0.0;
    std::size_t m = 0;
};

/// V = mean(P) - gamma mean(P^2) + gamma mean(P)^2 with its plug-in
/// estimator variance. Requires at least two outcomes.
ValueEstimate value_function_mc(std::span<const TradeOutcome> outcomes, double gamma);
ValueEstimate value_function_mc(std::span<const double> profits, double gamma);

/// Same estimate from the power sums S_k = sum P^k, k = 1..4.
ValueEstimate value_from_power_sums(std::size_t m, const std::array<double, 4>& sums,
                                    double gamma);

struct OvershootStats
{
    double mean = 0.0;
    double sd = 0.0;
    std::size_t count = 0;
};

/// Mean and sample sd of the overshoot over entered outcomes. Throws
/// std::invalid_argument if nothing entered.
OvershootStats overshoot_stats(std::span<const TradeOutcome> outcomes);

//---------------------------------------------------------------------------//
// Batch evaluation of many candidate levels on one path.

/// One side of one spread evaluated for a grid of (c, d) candidates.
struct LegResult
{
    std::uint32_t entry = 0;  // grid index; valid when entered
    std::uint32_t exit = 0;   // grid index, q when still open at T
    bool entered = false;
    bool exited = false;
    double profit = 0.0;      // discounted leg profit; 0 when not entered
    double overshoot = 0.0;
};

enum class Side : std::uint8_t
{
    short_above,
    long_below,
};

/// Evaluates a leg for every (c_j, d_i) on one scalar series. Entries come
/// from a binary search on the running extreme, exits from a single forward
/// scan per distinct entry index. Output layout is [i * c.size() + j]; pairs
/// with c_j >= d_i are evaluated but meaningless.
class LegEvaluator
{
  public:
    /// discount[i] = exp(-r t_i) for i = 0..q.
    void evaluate(std::span<const double> series, double mu_bar, Side side,
                  std::span<const double> d_values, std::span<const double> c_values,
                  std::span<const double> discount, std::vector<LegResult>& out);

  private:
    std::vector<double> extreme_;
    std::vector<std::uint32_t> entries_;
    std::vector<std::uint32_t> order_;
    std::vector<std::uint32_t> exits_;
};

/// Combines the short and long leg of a univariate strategy. Mirrors
/// trade_profit_univariate exactly.
TradeOutcome combine_univariate(const LegResult& up, const LegResult& down, double delta);

/// Combines the four legs of a bivariate strategy. Mirrors
/// trade_profit_bivariate exactly.
TradeOutcome combine_bivariate(const LegResult& up1, const LegResult& down1,
                               const LegResult& up2, const LegResult& down2, double delta);

/// exp(-r i delta) for i = 0..q.
std::vector<double> discount_table(double r, double delta, std::size_t q);

}  // namespace levytrade
