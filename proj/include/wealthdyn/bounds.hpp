#pragma once

// Closed-form concentration inequalities for linear and general growth.
//
// Slack convention: positive slack always means the inequality holds.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wealthdyn {

struct BoundParams {
    double kappa = 0.25;               // tail threshold, in (0, 1/2)
    double delta_stripe = 0.05;        // stripe half-width of the pair region
    std::optional<double> epsilon;     // delta_stripe * max(Delta, Delta'); unset when unbounded
    double gamma_inv_logderiv = 0.0;   // inverse of the larger log-derivative bound

    /// Throws DomainError unless 0 < kappa < 1/2, delta > 0, gamma >= 0, epsilon in [0, 1).
    void validate() const;
    /// Throws DomainError if epsilon disagrees with delta * max(delta_logx, delta_logxp)
    /// (relative 1e-9) when both bounds are finite.
    void check_epsilon_consistency(double delta_logx, double delta_logxp) const;
};

/// epsilon = delta * max(Delta, Delta'), or nullopt if either bound is unbounded.
std::optional<double> epsilon_from_bounds(double delta_stripe, double delta_logx,
                                          double delta_logxp);

struct ConditionResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool satisfied = false;
};

/// Lower bound on CV_{t+1}^2 under linear growth with dispersion gamma_disp.
double cv_growth_lower_bound(double cv, double alpha, double beta, double mu, double gamma_disp);

/// Condition under which CV growth is no longer forced:
/// beta^2/(alpha mu)^2 + 2 beta/(alpha mu) >= (gamma/alpha)^2 (1 + 1/CV^2).
/// CV == 0 (with gamma > 0) makes the right side infinite: never satisfied.
ConditionResult cv_halting_condition(double cv, double alpha, double beta, double mu,
                                     double gamma_disp);

/// Smallest beta satisfying cv_halting_condition (exact root of the quadratic).
double min_salary_exact(double cv, double alpha, double mu, double gamma_disp);

struct SalaryThreshold {
    double value = 0.0;
    bool outside_regime = false;  // CV < 1: the small-gamma reduction is not claimed there
};

/// Small-gamma reduction: beta >= gamma^2 mu / (2 alpha) (1 + 1/CV^2).
SalaryThreshold min_salary_small_gamma(double cv, double alpha, double mu, double gamma_disp);

/// Lower bound on G_{t+1} - G_t: (-beta G + delta kappa mu Gamma P^2) / mu_next.
double gini_growth_lower_bound(double gini, double beta, double mu, double mu_next,
                               const BoundParams& params, double tail_prob);

/// Largest tail probability compatible with a non-growing Gini:
/// sqrt(G beta / (delta kappa Gamma mu)) clamped to [0, 1].
double gini_halting_tail_bound(double gini, double beta, double mu, const BoundParams& params);

/// (1 - 2 kappa) * P(z / mu <= kappa).
double saturation_lower_bound(double tail_complement, double kappa);

/// Gamma^2 mu^2 (CV^2 + 1) + Var[zeta] + 2 gamma_t Cov[x, zeta] <= 0.
/// Only a negative covariance can satisfy it.
ConditionResult general_cv_condition(double gamma_t, double mu, double cv, double var_zeta,
                                     double cov_x_zeta, double gamma_disp);

struct Adaptation {
    double gamma_t = 0.0;
    double var_zeta = 0.0;
    double cov_x_zeta = 0.0;
};

/// gamma = alpha + beta/mu, zeta(x) = beta (1 - x/mu):
/// Var[zeta] = beta^2 CV^2, Cov[x, zeta] = -beta mu CV^2.
Adaptation adaptation_substitution(double alpha, double beta, double mu, double cv);

/// Halting condition evaluated twice: directly, and through the general-mode
/// condition under the adaptation substitution. The general slack equals
/// alpha^2 mu^2 CV^2 times the direct slack.
struct AdaptationEquivalence {
    double slack_direct = 0.0;   // cv_halting_condition slack
    double slack_general = 0.0;  // general_cv_condition slack under the substitution
    double slack_scaled = 0.0;   // alpha^2 mu^2 CV^2 * slack_direct
    double relative_gap = 0.0;   // |general - scaled| / sum of |terms| of the general left side
    bool agree = false;          // satisfied flags match
};
AdaptationEquivalence adaptation_equivalence(double alpha, double beta, double mu, double cv,
                                             double gamma_disp);

/// delta kappa mu Gamma P^2.
double zeta_variability_lower_bound(const BoundParams& params, double mu, double tail_prob);

/// Empirical moments of a redistribution term over the ensemble (divisor N).
struct ZetaMoments {
    double var_zeta = 0.0;
    double cov_x_zeta = 0.0;
    /// E|zeta(x) - zeta(y)| over ordered pairs with replacement.
    double mean_abs_diff = 0.0;
};
ZetaMoments zeta_moments(std::span<const double> wealth, std::span<const double> zeta);

/// Left side E|(x - y)/mu + (zeta(x) - zeta(y))/(gamma mu)| of the general Gini
/// condition under both pair conventions, and its right side G - delta kappa Gamma P^2 / gamma.
struct GeneralGiniCondition {
    double lhs_ordered = 0.0;    // average over all ordered pairs (i, j)
    double lhs_half = 0.0;       // half of it: the convention G itself uses
    double rhs = 0.0;
    bool satisfied_ordered = false;
    bool satisfied_half = false;
};
GeneralGiniCondition general_gini_condition(std::span<const double> wealth,
                                            std::span<const double> zeta, double gamma_t,
                                            double gini, const BoundParams& params,
                                            double tail_prob);

/// One evaluated inequality of a trajectory row.
struct BoundRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool satisfied = false;
    /// Theorems are checked by verify-bounds; conditions are only reported.
    bool theorem = false;
    /// Allowance for Monte Carlo error; a theorem passes when slack >= -tolerance.
    double tolerance = 0.0;

    bool within_tolerance() const { return satisfied || slack >= -tolerance; }
};

struct BoundReport {
    std::vector<BoundRecord> records;

    const BoundRecord* find(const std::string& name) const;
};

BoundRecord make_record(std::string name, double lhs, double rhs, bool lhs_at_least_rhs,
                        bool theorem, double tolerance = 0.0);

}  // namespace wealthdyn
