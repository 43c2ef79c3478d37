#include "wealthdyn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wealthdyn/error.hpp"
#include "wealthdyn/metrics.hpp"

namespace wealthdyn {

void BoundParams::validate() const {
    if (!(kappa > 0.0 && kappa < 0.5)) throw DomainError("kappa must lie in (0, 1/2)");
    if (!(delta_stripe > 0.0)) throw DomainError("delta must be > 0");
    if (!(gamma_inv_logderiv >= 0.0) || !std::isfinite(gamma_inv_logderiv))
        throw DomainError("log-derivative Gamma must be finite and >= 0");
    if (epsilon && !(*epsilon >= 0.0 && *epsilon < 1.0))
        throw DomainError("epsilon = delta * max(Delta, Delta') must lie in [0, 1); reduce delta");
}

void BoundParams::check_epsilon_consistency(double delta_logx, double delta_logxp) const {
    const auto expected = epsilon_from_bounds(delta_stripe, delta_logx, delta_logxp);
    if (!expected || !epsilon) return;
    if (std::abs(*epsilon - *expected) > 1e-9 * std::max(1e-300, std::abs(*expected))) {
        throw DomainError("epsilon " + std::to_string(*epsilon) +
                          " disagrees with delta * max(Delta, Delta') = " +
                          std::to_string(*expected));
    }
}

std::optional<double> epsilon_from_bounds(double delta_stripe, double delta_logx,
                                          double delta_logxp) {
    if (!std::isfinite(delta_logx) || !std::isfinite(delta_logxp)) return std::nullopt;
    return delta_stripe * std::max(delta_logx, delta_logxp);
}

BoundRecord make_record(std::string name, double lhs, double rhs, bool lhs_at_least_rhs,
                        bool theorem, double tolerance) {
    BoundRecord r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = lhs_at_least_rhs ? lhs - rhs : rhs - lhs;
    if (std::isnan(r.slack) && lhs == rhs) r.slack = 0.0;  // inf == inf
    r.satisfied = r.slack >= 0.0;
    r.theorem = theorem;
    r.tolerance = tolerance;
    return r;
}

const BoundRecord* BoundReport::find(const std::string& name) const {
    for (const auto& r : records) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

double cv_growth_lower_bound(double cv, double alpha, double beta, double mu, double gamma_disp) {
    const double g2 = (gamma_disp * gamma_disp) / (alpha * alpha);
    const double denom = 1.0 + beta / (alpha * mu);
    return ((1.0 + g2) * cv * cv + g2) / (denom * denom);
}

ConditionResult cv_halting_condition(double cv, double alpha, double beta, double mu,
                                     double gamma_disp) {
    if (!(mu > 0.0)) throw DomainError("mean must be > 0");
    const double r = beta / (alpha * mu);
    ConditionResult res;
    res.lhs = r * r + 2.0 * r;
    if (gamma_disp == 0.0) {
        res.rhs = 0.0;
    } else if (cv == 0.0) {
        res.rhs = std::numeric_limits<double>::infinity();
    } else {
        res.rhs = (gamma_disp * gamma_disp) / (alpha * alpha) * (1.0 + 1.0 / (cv * cv));
    }
    res.slack = res.lhs - res.rhs;
    res.satisfied = res.slack >= 0.0;
    return res;
}

double min_salary_exact(double cv, double alpha, double mu, double gamma_disp) {
    if (gamma_disp == 0.0) return 0.0;
    if (cv == 0.0) return std::numeric_limits<double>::infinity();
    const double rhs = (gamma_disp * gamma_disp) / (alpha * alpha) * (1.0 + 1.0 / (cv * cv));
    // r^2 + 2r = rhs with r = beta / (alpha mu); r = rhs / (1 + sqrt(1 + rhs)) avoids cancellation.
    const double r = rhs / (1.0 + std::sqrt(1.0 + rhs));
    return r * alpha * mu;
}

SalaryThreshold min_salary_small_gamma(double cv, double alpha, double mu, double gamma_disp) {
    SalaryThreshold out;
    out.outside_regime = cv < 1.0;
    if (gamma_disp == 0.0) return out;
    const double inv_cv2 = std::isinf(cv) ? 0.0 : 1.0 / (cv * cv);
    out.value = gamma_disp * gamma_disp * mu / (2.0 * alpha) * (1.0 + inv_cv2);
    return out;
}

double gini_growth_lower_bound(double gini, double beta, double mu, double mu_next,
                               const BoundParams& params, double tail_prob) {
    if (!(mu_next > 0.0)) throw DomainError("mu_next must be > 0");
    const double push = params.delta_stripe * params.kappa * mu * params.gamma_inv_logderiv *
                        tail_prob * tail_prob;
    return (-beta * gini + push) / mu_next;
}

double gini_halting_tail_bound(double gini, double beta, double mu, const BoundParams& params) {
    if (!(mu > 0.0)) throw DomainError("mean must be > 0");
    const double denom = params.delta_stripe * params.kappa * params.gamma_inv_logderiv * mu;
    if (denom == 0.0) return 1.0;  // no growth pressure: any tail is compatible
    return std::clamp(std::sqrt(gini * beta / denom), 0.0, 1.0);
}

double saturation_lower_bound(double tail_complement, double kappa) {
    return (1.0 - 2.0 * kappa) * tail_complement;
}

ConditionResult general_cv_condition(double gamma_t, double mu, double cv, double var_zeta,
                                     double cov_x_zeta, double gamma_disp) {
    if (!(mu > 0.0)) throw DomainError("mean must be > 0");
    ConditionResult res;
    res.lhs = gamma_disp * gamma_disp * mu * mu * (cv * cv + 1.0) + var_zeta +
              2.0 * gamma_t * cov_x_zeta;
    res.rhs = 0.0;
    res.slack = -res.lhs;
    res.satisfied = res.lhs <= 0.0;
    return res;
}

Adaptation adaptation_substitution(double alpha, double beta, double mu, double cv) {
    if (!(mu > 0.0)) throw DomainError("mean must be > 0");
    return {alpha + beta / mu, beta * beta * cv * cv, -beta * mu * cv * cv};
}

AdaptationEquivalence adaptation_equivalence(double alpha, double beta, double mu, double cv,
                                             double gamma_disp) {
    AdaptationEquivalence out;
    const auto direct = cv_halting_condition(cv, alpha, beta, mu, gamma_disp);
    const auto sub = adaptation_substitution(alpha, beta, mu, cv);
    const auto general = general_cv_condition(sub.gamma_t, mu, cv, sub.var_zeta, sub.cov_x_zeta,
                                              gamma_disp);
    out.slack_direct = direct.slack;
    out.slack_general = general.slack;
    out.slack_scaled = alpha * alpha * mu * mu * cv * cv * direct.slack;
    const double scale = gamma_disp * gamma_disp * mu * mu * (cv * cv + 1.0) + sub.var_zeta +
                         std::abs(2.0 * sub.gamma_t * sub.cov_x_zeta);
    const double gap = std::abs(out.slack_general - out.slack_scaled);
    out.relative_gap = scale > 0.0 ? gap / scale : gap;
    out.agree = direct.satisfied == general.satisfied;
    return out;
}

double zeta_variability_lower_bound(const BoundParams& params, double mu, double tail_prob) {
    return params.delta_stripe * params.kappa * mu * params.gamma_inv_logderiv * tail_prob *
           tail_prob;
}

ZetaMoments zeta_moments(std::span<const double> wealth, std::span<const double> zeta) {
    if (wealth.size() != zeta.size() || wealth.empty())
        throw DomainError("wealth and zeta must have the same nonzero length");
    const double mx = mean(wealth);
    const double mz = mean(zeta);
    double var = 0.0;
    double cov = 0.0;
    for (std::size_t i = 0; i < wealth.size(); ++i) {
        var += (zeta[i] - mz) * (zeta[i] - mz);
        cov += (wealth[i] - mx) * (zeta[i] - mz);
    }
    const double n = static_cast<double>(wealth.size());
    return {var / n, cov / n, mean_abs_difference(zeta)};
}

GeneralGiniCondition general_gini_condition(std::span<const double> wealth,
                                            std::span<const double> zeta, double gamma_t,
                                            double gini, const BoundParams& params,
                                            double tail_prob) {
    if (wealth.size() != zeta.size() || wealth.empty())
        throw DomainError("wealth and zeta must have the same nonzero length");
    const double mu = mean(wealth);
    std::vector<double> combined(wealth.size());
    for (std::size_t i = 0; i < wealth.size(); ++i)
        combined[i] = wealth[i] / mu + zeta[i] / (gamma_t * mu);
    GeneralGiniCondition out;
    out.lhs_ordered = mean_abs_difference(combined);
    out.lhs_half = 0.5 * out.lhs_ordered;
    out.rhs = gini - params.delta_stripe * params.kappa * params.gamma_inv_logderiv * tail_prob *
                         tail_prob / gamma_t;
    out.satisfied_ordered = out.lhs_ordered <= out.rhs;
    out.satisfied_half = out.lhs_half <= out.rhs;
    return out;
}

}  // namespace wealthdyn
