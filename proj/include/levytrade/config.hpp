#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "levytrade/ldoup_sim.hpp"
#include "levytrade/levy_models.hpp"

namespace levytrade {

enum class ModelKind
{
    ou_vg,
    ou_wvag,
};

/// Which trading levels are searched.
enum class SearchKind
{
    symmetric_d,            // d = d+ = d-, fixed c
    asymmetric_d,           // (d+, d-), fixed c
    exit_entry,             // (c, d) with c < d, symmetric on both sides
    bivariate_d,            // (d1, d2), fixed c, two spreads
    bivariate_symmetric_d,  // d1 = d2 = d, two spreads
};

std::string to_string(ModelKind kind);
std::string to_string(SearchKind kind);

/// Closed range lo, lo + step, ..., up to hi (inclusive within 1e-9 step).
struct GridRange
{
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;

    std::vector<double> values() const;
};

struct CvScenario
{
    std::vector<std::size_t> p_grid{130};
    bool include_events = true;
    double window = 0.05;   // CV value curve is evaluated on d* +- window
};

struct Scenario
{
    std::string name = "scenario";
    ModelKind model = ModelKind::ou_vg;
    OuVgParams vg;
    OuWvagParams wvag;
    PathGrid grid;
    std::vector<double> x0{0.0};

    SearchKind search = SearchKind::symmetric_d;
    std::optional<double> d_lo;        // default 0.05
    std::optional<double> d_hi;        // default 5 stationary sd of the spread
    double c_lo = 0.0;                 // exit_entry only
    std::optional<double> c_hi;        // exit_entry only; default d_hi
    double c = 0.0;                    // fixed exit for the other searches
    double coarse_step = 0.005;
    double fine_step = 0.001;
    double r = 0.01;
    double gamma = 0.0;
    double loess_span = 0.0;           // 0 disables smoothing

    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    std::size_t threads = 0;

    std::optional<CvScenario> cv;

    std::string out_dir = ".";
    std::size_t sample_paths = 5;

    std::size_t dim() const { return model == ModelKind::ou_vg ? 1 : 2; }
    /// Stationary mean of each component.
    std::vector<double> mu_bar() const;
    /// Stationary standard deviation of each component.
    std::vector<double> stationary_sd() const;

    /// Entry-level search range for spread k at the given step.
    GridRange d_range(std::size_t k, double step) const;
    /// Exit-level search range (exit_entry) at the given step.
    GridRange c_range(double step) const;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Parses an INI document with sections [model], [grid], [strategy], [mc],
/// [cv] and [output]. Unknown keys are rejected. Throws ConfigError.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

}  // namespace levytrade
