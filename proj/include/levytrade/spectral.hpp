#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

#include "levytrade/levy_models.hpp"

namespace levytrade {

/// Characteristic exponent Psi with E[exp(i theta Z)] = exp(Psi(theta)).
///
/// The exponent is stored split into a pure drift and a centered part,
/// Psi(theta) = i * drift * theta + centered(theta), so Fourier inversion can
/// demodulate the drift without cancellation. `scale` is a typical width of
/// the law (its standard deviation) used to lay out integration panels.
struct CharExponent
{
    std::function<std::complex<double>(double)> centered;
    double drift = 0.0;
    double scale = 1.0;

    std::complex<double> operator()(double theta) const
    {
        return std::complex<double>(0.0, drift * theta) + centered(theta);
    }
};

/// Psi(theta) = i eta theta - b log(1 - i mu theta / b + sigma2 theta^2 / (2b)).
CharExponent vg_char_exponent(const OuVgParams& params);

/// Exponent of Z*(delta): theta -> int_0^{lambda delta} Psi_Z(e^t theta) dt,
/// evaluated by adaptive Gauss-Kronrod quadrature. Evaluation throws
/// NumericalError if the quadrature misses quad_tol.
CharExponent zstar_char_exponent(const CharExponent& base, double lambda, double delta,
                                 double quad_tol = 1e-10);

struct CdfDiagnostics
{
    double abs_error = 0.0;      // estimated error of the returned probability
    std::size_t panels = 0;      // integration panels used
    bool extrapolated = false;   // tail handled by sequence extrapolation
    bool converged = true;
};

/// P(Z <= x) by Gil-Pelaez inversion. The tail of the inversion integral is
/// truncated once |exp(Psi)| < 1e-12; when the characteristic function decays
/// too slowly for that, the oscillatory tail is summed panel by panel and the
/// partial sums are extrapolated with Wynn's epsilon algorithm. A warning goes
/// to stderr if the target error (1e-6) cannot be certified. Results are
/// clamped to [0, 1].
double cdf_from_cf(const CharExponent& ce, double x, CdfDiagnostics* diag = nullptr);

/// Innovation-space trading levels: the thresholds an innovation must pass
/// to move X from mu_bar past mu_bar +- d (entry) or mu_bar +- c (exit) in
/// one step, together with the number p of innovations in the sequence.
struct EventLevels
{
    double entry_plus = 0.0;
    double entry_minus = 0.0;
    double exit_plus = 0.0;
    double exit_minus = 0.0;
    std::size_t p = 1;

    /// Levels exp(lambda delta)(mu_bar +- level) - mu_bar for each of the
    /// four asymmetric offsets.
    static EventLevels modified(double mu_bar, double lambda, double delta, double c_plus,
                                double c_minus, double d_plus, double d_minus, std::size_t p);
};

struct EventProbabilities
{
    double enter_and_exit = 0.0;  // P(A)
    double enter_no_exit = 0.0;   // P(B)
};

/// Exact P(A), P(B) for an iid innovation sequence of length levels.p with
/// continuous CDF `cdf`, from a four state chain
/// (not entered, entered short, entered long, done).
EventProbabilities event_probabilities(const EventLevels& levels,
                                       const std::function<double(double)>& cdf);

struct EventIndicators
{
    bool enter_and_exit = false;
    bool enter_no_exit = false;
};

/// Runs the same chain on realized innovations (first levels.p of them).
EventIndicators classify_innovations(std::span<const double> innovations,
                                     const EventLevels& levels);

/// Independent but not identically distributed steps: innovation i has
/// levels steps[i] (their p is ignored) and CDF x -> cdf(i, x).
EventProbabilities event_probabilities(std::span<const EventLevels> steps,
                                       const std::function<double(std::size_t, double)>& cdf);
EventIndicators classify_innovations(std::span<const double> innovations,
                                     std::span<const EventLevels> steps);

}  // namespace levytrade
