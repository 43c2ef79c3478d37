#pragma once

// Numerical checks of the pair-splitting machinery behind the Gini growth
// bound: the restricted pair integral F(x, y), its diagonal lower bound,
// the stripe functional Y_a and its extremal density a / y^2, and the
// transfer of kernel log-derivative bounds to the wealth density.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wealthdyn/bounds.hpp"
#include "wealthdyn/dynamics.hpp"
#include "wealthdyn/kernels.hpp"

namespace wealthdyn {

/// R_delta = {(x, y) : |x - y| < delta x} with both coordinates above kappa mu.
struct StripeRegion {
    double kappa = 0.25;
    double delta = 0.05;

    bool contains(double x, double y, double mu) const {
        return x > kappa * mu && y > kappa * mu && std::abs(x - y) < delta * x;
    }
};

struct PairSplitResult {
    double value = 0.0;
    double error = 0.0;
};

/// F(x, y) = integral over {y' > x'} of w(x -> x') w(y -> y') |x' - y'|, by nested
/// adaptive quadrature over the 1 - 1e-10 central range of each growth factor.
/// `abs_tol` <= 0 selects the default target 1e-7 (alpha x + beta).
/// Throws NoDensityError for deterministic kernels, DomainError for x or y <= 0,
/// QuadratureError when the target is not reached.
PairSplitResult pair_split_integral(const KernelSpec& kernel, double x, double y,
                                    double abs_tol = 0.0);

/// E|X' - Y'| for independent X' ~ w(x -> .), Y' ~ w(y -> .), computed from
/// the CDFs: integral of F_X (1 - F_Y) + F_Y (1 - F_X). Independent of pair_split_integral.
double expected_abs_difference(const KernelSpec& kernel, double x, double y);

/// Log-derivative bounds calibrated to hold on a given probability mass.
struct CalibratedBounds {
    double delta_input = 0.0;
    double delta_output = 0.0;
    double mass = 0.0;
    /// Inverse of the larger bound.
    double gamma() const { return 1.0 / std::max(delta_input, delta_output); }
};

CalibratedBounds calibrate_log_derivative_bounds(const KernelSpec& kernel, double x = 1.0,
                                                 double mass = 0.99,
                                                 std::size_t n_samples = 200000,
                                                 std::uint64_t seed = 0);

struct DiagonalBoundRow {
    double x = 0.0;
    double f_diag = 0.0;
    double f_error = 0.0;
    double slack_mean = 0.0;  // F(x, x) - Gamma (alpha x + beta) / 2
    double slack_x = 0.0;     // F(x, x) - Gamma x / 2
    bool satisfied = false;
};

struct DiagonalBoundReport {
    double gamma = 0.0;
    double tolerance = 0.0;
    std::vector<DiagonalBoundRow> rows;
    bool satisfied = true;
};

/// F(x, x) >= Gamma (alpha x + beta) / 2 >= Gamma x / 2 on a grid of wealth values.
/// A row passes when both slacks are >= -tolerance (the quadrature error target).
DiagonalBoundReport diagonal_bound_check(const KernelSpec& kernel, std::span<const double> x_grid,
                                         double gamma, double tolerance = 1e-6);

/// A probability density on a ray (a, b), b possibly infinite.
class DensityOnRay {
public:
    /// h(y) = a / y^2 on (a, inf).
    static DensityOnRay extremal(double a);
    /// c a^c y^(-1-c) on (a, b), normalized; b = inf requires c > 0.
    static DensityOnRay truncated_pareto(double a, double c,
                                         double b = std::numeric_limits<double>::infinity());
    /// Smooth trial density proportional to y^(-1-c) exp(amp sin(freq log(y/a) + phase)) on (a, b).
    static DensityOnRay modulated(double a, double b, double c, double amp, double freq,
                                  double phase);
    /// Piecewise-linear density through (point, value) pairs; lower endpoint is points.front().
    static DensityOnRay grid(std::vector<double> points, std::vector<double> values);

    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    bool closed_form() const noexcept;
    std::string describe() const;

    /// Density at x; zero outside (lower, upper).
    double pdf(double x) const;
    /// Analytic continuation of the closed form outside the support.
    /// Throws DomainError for grid densities.
    double pdf_extended(double x) const;
    /// sup |d log p / d log x| over the support.
    double max_log_derivative() const;
    /// Integral of the density over its support.
    double total_mass() const;

private:
    struct Extremal {};
    struct Pareto {
        double c;
        double norm;
    };
    struct Modulated {
        double c;
        double amp;
        double freq;
        double phase;
        double norm;
    };
    struct Grid {
        std::vector<double> points;
        std::vector<double> values;
    };

    DensityOnRay(double lower, double upper, std::variant<Extremal, Pareto, Modulated, Grid> shape)
        : lower_(lower), upper_(upper), shape_(std::move(shape)) {}

    double raw(double x) const;
    /// Upper limit in u = log(x / lower) for integrals over the support.
    double log_extent() const;

    double lower_;
    double upper_;
    std::variant<Extremal, Pareto, Modulated, Grid> shape_;
};

enum class Cutoff { Respect, Ignore };

/// Y_a[p] = integral_a^inf dx x p(x) integral_{x e^-delta}^{x e^delta} dy p(y).
/// Cutoff::Ignore evaluates the inner window with the analytic continuation of p
/// below a. Throws DomainError for a non-normalized p (tolerance 1e-6) or delta outside [0, 0.2).
double y_functional(const DensityOnRay& p, double a, double delta, Cutoff cutoff = Cutoff::Respect);

/// Inner window mass integral_{x e^-delta}^{x e^delta} p(y) dy clipped to the support.
double window_mass(const DensityOnRay& p, double x, double delta);

/// Closed form of Y_a[a / y^2] with the lower cutoff ignored: a (e^delta - e^-delta).
double extremal_y_closed_form(double a, double delta);

struct TrialOutcome {
    std::string label;
    double y = 0.0;
    double ratio = 0.0;               // Y / Y_a[h]
    double max_log_derivative = 0.0;
    bool excluded = false;            // violates the log-derivative cap
    bool window_identity_ok = false;  // window mass inside its derivative-bound envelope
    double window_worst = 0.0;        // worst relative deviation of window / (2 delta x p)
    bool passed = false;
};

struct MinimalityReport {
    double a = 0.0;
    double delta = 0.0;
    double constant_c = 0.0;         // Y >= Y_a[h] (1 - C delta)
    double derivative_cap = 0.0;     // trials with larger log-derivative are excluded
    double y_extremal_ignored = 0.0; // cutoff-ignored quadrature of h
    double y_extremal_respected = 0.0;
    std::vector<TrialOutcome> trials;
    std::size_t excluded = 0;
    bool passed = true;
};

/// Evaluate Y_a on the given trial densities against the extremal value.
MinimalityReport minimality_check_on(double a, double delta,
                                     std::span<const DensityOnRay> densities,
                                     std::span<const std::string> labels, double constant_c = 5.0);

/// Random smooth trial densities on (a, a e^12) with bounded log-derivative.
MinimalityReport extremal_minimality_check(double a, double delta, std::size_t n_trials,
                                           std::uint64_t seed = 0, double constant_c = 5.0);

/// Truncated-Pareto trial family c in {0.5, 1, 2} on (a, 1e6 a).
MinimalityReport pareto_minimality_check(double a, double delta, double constant_c = 5.0);

struct MainInequalityReport {
    bool hypotheses_met = true;
    std::string message;
    std::size_t pairs_requested = 0;
    std::size_t pairs_used = 0;
    std::size_t pairs_failed = 0;
    double mu = 0.0;
    double tail_prob = 0.0;
    double epsilon = 0.0;
    double mean_f = 0.0;
    double standard_error = 0.0;
    double rhs = 0.0;
    double margin_in_se = 0.0;  // (mean_f - rhs) / standard_error
    bool satisfied = false;     // mean_f >= rhs
};

/// E[F(x, y)] over ordered pairs of the ensemble (x the richer) against
/// delta kappa mu Gamma (1 - epsilon) P^2. Pairs are importance-sampled among
/// those whose central supports overlap (F is zero elsewhere), weighted by the
/// scale gamma_disp x + beta of F, so the estimate stays unbiased at saturation.
MainInequalityReport main_inequality_check(const PopulationState& pop, const KernelSpec& kernel,
                                           const BoundParams& params, std::size_t n_pairs = 2000,
                                           std::uint64_t seed = 0);

struct PropagationReport {
    double bound = 0.0;                       // 1 / Gamma_claimed
    double tolerance = 0.0;
    double mass_level = 0.99;
    double covered_mass = 0.0;                // share of the grid mass where |d log p / d log x| <= bound + tolerance
    double quantile_abs_log_derivative = 0.0; // smallest bound holding on mass_level of the grid mass
    double grid_mass = 0.0;                   // continuous mass captured by the grid
    double point_mass = 0.0;                  // fraction of agents at zero wealth (atom at beta)
    std::size_t region_points = 0;            // grid points inside the quantile region
    bool satisfied = false;
};

/// Push the ensemble through the kernel, p(x) = (1/N) sum_i w(x_i -> x), and check that
/// |d log p / d log x| <= 1 / gamma_claimed + tolerance on grid points carrying at least
/// `mass_level` of the mass. Throws DomainError when the grid is too coarse to resolve
/// the derivative or misses mass.
PropagationReport density_log_derivative_propagation(const PopulationState& pop_prev,
                                                     const KernelSpec& kernel,
                                                     std::span<const double> x_grid,
                                                     double gamma_claimed,
                                                     double relative_tolerance = 0.02,
                                                     double mass_level = 0.99);

/// Log-spaced grid of n points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace wealthdyn
