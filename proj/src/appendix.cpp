#include "wealthdyn/appendix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wealthdyn/error.hpp"
#include "wealthdyn/metrics.hpp"
#include "wealthdyn/quadrature.hpp"

namespace wealthdyn {

namespace {

constexpr double kTailQuantile = 1e-10;

struct GrowthFactorRange {
    double lo;
    double hi;
};

GrowthFactorRange central_range(const KernelSpec& kernel) {
    return {growth_factor_quantile(kernel, kTailQuantile),
            growth_factor_quantile(kernel, 1.0 - kTailQuantile)};
}

}  // namespace

PairSplitResult pair_split_integral(const KernelSpec& kernel, double x, double y, double abs_tol) {
    if (!kernel.has_density()) throw NoDensityError();
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("pair integral needs x, y > 0");
    const double target = abs_tol > 0.0 ? abs_tol : 1e-7 * conditional_mean(kernel, x);
    const auto [lo, hi] = central_range(kernel);
    // x' = beta + x u and y' = beta + y v; the salary cancels in y' - x'.
    const auto g = [&kernel](double u) { return growth_factor_density(kernel, u); };
    const double inner_tol = 0.05 * target;

    const auto inner = [&](double u) {
        const double v0 = std::max(lo, x * u / y);
        if (v0 >= hi) return 0.0;
        const auto integrand = [&](double v) { return g(v) * (y * v - x * u); };
        return integrate_adaptive(integrand, v0, hi, inner_tol, 1e-12).value;
    };
    const auto outer = [&](double u) {
        const double gu = g(u);
        return gu == 0.0 ? 0.0 : gu * inner(u);
    };

    // Kinks where the lower inner limit switches from lo to x u / y, and where it passes hi.
    const double u_switch = lo * y / x;
    const double u_end = std::min(hi, hi * y / x);
    PairSplitResult out;
    double start = lo;
    for (double cut : {u_switch, u_end}) {
        if (cut > start && cut <= u_end) {
            const auto r = integrate_adaptive(outer, start, cut, 0.45 * target / 2.0, 0.0);
            out.value += r.value;
            out.error += r.error;
            start = cut;
        }
    }
    out.error += inner_tol;
    if (out.error > target) {
        throw QuadratureError("pair integral did not reach its target", out.error, target);
    }
    return out;
}

double expected_abs_difference(const KernelSpec& kernel, double x, double y) {
    if (!kernel.has_density()) throw NoDensityError();
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("needs x, y > 0");
    const auto [lo, hi] = central_range(kernel);
    const auto integrand = [&](double t) {
        const double fx = growth_factor_cdf(kernel, t / x);
        const double fy = growth_factor_cdf(kernel, t / y);
        return fx * (1.0 - fy) + fy * (1.0 - fx);
    };
    const double a = std::min(x, y) * lo;
    const double b = std::max(x, y) * hi;
    return integrate_adaptive(integrand, a, b, 0.0, 1e-11).value;
}

CalibratedBounds calibrate_log_derivative_bounds(const KernelSpec& kernel, double x, double mass,
                                                 std::size_t n_samples, std::uint64_t seed) {
    CalibratedBounds out;
    out.mass = mass;
    out.delta_input =
        calibrate_log_derivative_bound(kernel, x, mass, LogDerivativeSide::Input, n_samples, seed);
    out.delta_output =
        calibrate_log_derivative_bound(kernel, x, mass, LogDerivativeSide::Output, n_samples, seed);
    return out;
}

DiagonalBoundReport diagonal_bound_check(const KernelSpec& kernel, std::span<const double> x_grid,
                                         double gamma, double tolerance) {
    DiagonalBoundReport report;
    report.gamma = gamma;
    report.tolerance = tolerance;
    for (double x : x_grid) {
        DiagonalBoundRow row;
        row.x = x;
        const auto f = pair_split_integral(kernel, x, x, std::min(tolerance, 1e-7 * conditional_mean(kernel, x)));
        row.f_diag = f.value;
        row.f_error = f.error;
        row.slack_mean = f.value - 0.5 * gamma * conditional_mean(kernel, x);
        row.slack_x = f.value - 0.5 * gamma * x;
        row.satisfied = row.slack_mean >= -tolerance && row.slack_x >= -tolerance;
        report.satisfied = report.satisfied && row.satisfied;
        report.rows.push_back(row);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Densities on a ray

DensityOnRay DensityOnRay::extremal(double a) {
    if (!(a > 0.0)) throw DomainError("lower endpoint must be > 0");
    return {a, std::numeric_limits<double>::infinity(), Extremal{}};
}

DensityOnRay DensityOnRay::truncated_pareto(double a, double c, double b) {
    if (!(a > 0.0) || !(b > a) || !(c > 0.0)) throw DomainError("Pareto needs 0 < a < b and c > 0");
    const double norm = std::isinf(b) ? 1.0 : -std::expm1(c * std::log(a / b));
    return {a, b, Pareto{c, norm}};
}

DensityOnRay DensityOnRay::modulated(double a, double b, double c, double amp, double freq,
                                     double phase) {
    if (!(a > 0.0) || !(b > a) || !std::isfinite(b))
        throw DomainError("modulated density needs a finite support 0 < a < b");
    DensityOnRay p(a, b, Modulated{c, amp, freq, phase, 1.0});
    // x p(x) in log coordinates
    const auto f = [&](double u) {
        const double x = a * std::exp(u);
        return x * p.raw(x);
    };
    const double mass = integrate_adaptive(f, 0.0, std::log(b / a), 0.0, 1e-13).value;
    std::get<Modulated>(p.shape_).norm = mass;
    return p;
}

DensityOnRay DensityOnRay::grid(std::vector<double> points, std::vector<double> values) {
    if (points.size() < 2 || points.size() != values.size())
        throw DomainError("grid density needs matching point/value arrays of length >= 2");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i] > 0.0) || (i > 0 && !(points[i] > points[i - 1])))
            throw DomainError("grid points must be positive and increasing");
        if (!(values[i] >= 0.0)) throw DomainError("grid density must be nonnegative");
    }
    const double lo = points.front();
    const double hi = points.back();
    return {lo, hi, Grid{std::move(points), std::move(values)}};
}

bool DensityOnRay::closed_form() const noexcept { return !std::holds_alternative<Grid>(shape_); }

std::string DensityOnRay::describe() const {
    std::ostringstream out;
    out.precision(6);
    if (std::holds_alternative<Extremal>(shape_)) {
        out << "extremal a/y^2, a=" << lower_;
    } else if (const auto* p = std::get_if<Pareto>(&shape_)) {
        out << "pareto c=" << p->c << " on (" << lower_ << ", " << upper_ << ")";
    } else if (const auto* m = std::get_if<Modulated>(&shape_)) {
        out << "modulated c=" << m->c << " amp=" << m->amp << " freq=" << m->freq
            << " phase=" << m->phase;
    } else {
        out << "grid of " << std::get<Grid>(shape_).points.size() << " points";
    }
    return out.str();
}

double DensityOnRay::raw(double x) const {
    if (std::holds_alternative<Extremal>(shape_)) return lower_ / (x * x);
    if (const auto* p = std::get_if<Pareto>(&shape_)) {
        return p->c * std::pow(lower_ / x, p->c) / (x * p->norm);
    }
    if (const auto* m = std::get_if<Modulated>(&shape_)) {
        const double u = std::log(x / lower_);
        return std::pow(lower_ / x, m->c) / x * std::exp(m->amp * std::sin(m->freq * u + m->phase)) /
               m->norm;
    }
    const auto& g = std::get<Grid>(shape_);
    if (x < g.points.front() || x > g.points.back()) return 0.0;
    const auto it = std::upper_bound(g.points.begin(), g.points.end(), x);
    if (it == g.points.end()) return g.values.back();
    const auto k = static_cast<std::size_t>(it - g.points.begin());
    const double w = (x - g.points[k - 1]) / (g.points[k] - g.points[k - 1]);
    return (1.0 - w) * g.values[k - 1] + w * g.values[k];
}

double DensityOnRay::pdf(double x) const {
    if (!(x >= lower_) || x > upper_) return 0.0;
    return raw(x);
}

double DensityOnRay::pdf_extended(double x) const {
    if (!closed_form()) throw DomainError("grid densities have no analytic continuation");
    if (!(x > 0.0)) return 0.0;
    return raw(x);
}

double DensityOnRay::max_log_derivative() const {
    if (std::holds_alternative<Extremal>(shape_)) return 2.0;
    if (const auto* p = std::get_if<Pareto>(&shape_)) return 1.0 + p->c;
    if (const auto* m = std::get_if<Modulated>(&shape_)) {
        const double extent = std::log(upper_ / lower_);
        constexpr int kSamples = 20000;
        double worst = 0.0;
        for (int i = 0; i <= kSamples; ++i) {
            const double u = extent * i / kSamples;
            worst = std::max(worst,
                             std::abs(-(1.0 + m->c) + m->amp * m->freq * std::cos(m->freq * u + m->phase)));
        }
        return worst;
    }
    // Piecewise linear: within a segment the log-derivative is monotone, so endpoints suffice.
    const auto& g = std::get<Grid>(shape_);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < g.points.size(); ++k) {
        const double slope = (g.values[k + 1] - g.values[k]) / (g.points[k + 1] - g.points[k]);
        for (std::size_t e : {k, k + 1}) {
            if (g.values[e] == 0.0) {
                if (slope != 0.0) return std::numeric_limits<double>::infinity();
                continue;
            }
            worst = std::max(worst, std::abs(slope * g.points[e] / g.values[e]));
        }
    }
    return worst;
}

double DensityOnRay::log_extent() const {
    if (std::isfinite(upper_)) return std::log(upper_ / lower_);
    // x p(x) decays like exp(-c u); 40 / c puts the neglected mass near 4e-18.
    if (const auto* p = std::get_if<Pareto>(&shape_)) return 40.0 / p->c;
    return 40.0;
}

double DensityOnRay::total_mass() const {
    if (const auto* g = std::get_if<Grid>(&shape_)) {
        double mass = 0.0;
        for (std::size_t k = 0; k + 1 < g->points.size(); ++k)
            mass += 0.5 * (g->values[k] + g->values[k + 1]) * (g->points[k + 1] - g->points[k]);
        return mass;
    }
    const auto f = [&](double u) {
        const double x = lower_ * std::exp(u);
        return x * raw(x);
    };
    return integrate_adaptive(f, 0.0, log_extent(), 0.0, 1e-13).value;
}

// ---------------------------------------------------------------------------
// Stripe functional

namespace {

// Inner window integral in v = log(y / x), with optional clipping to [lo, hi].
double window_integral(const DensityOnRay& p, double x, double delta, Cutoff cutoff,
                       double rel_tol) {
    double v_lo = -delta;
    double v_hi = delta;
    if (cutoff == Cutoff::Respect) {
        v_lo = std::max(v_lo, std::log(p.lower() / x));
        if (std::isfinite(p.upper())) v_hi = std::min(v_hi, std::log(p.upper() / x));
    }
    if (!(v_hi > v_lo)) return 0.0;
    const auto f = [&](double v) {
        const double yv = x * std::exp(v);
        return yv * (cutoff == Cutoff::Respect ? p.pdf(yv) : p.pdf_extended(yv));
    };
    return integrate_adaptive(f, v_lo, v_hi, 0.0, rel_tol).value;
}

// Extent in u = log(x / a) beyond which the functional's integrand is negligible.
double functional_extent(const DensityOnRay& p, double a) {
    if (std::isfinite(p.upper())) return std::log(p.upper() / a);
    // Integrand ~ x^2 p(x)^2 x ~ exp((1 - 2c) u) for Pareto-like tails.
    const double tail = std::max(1.0, p.max_log_derivative()) - 1.0;  // c for Pareto, 1 for h
    if (!(tail > 0.5)) throw DomainError("functional diverges for tails with index <= 1/2");
    return 40.0 / (2.0 * tail - 1.0);
}

}  // namespace

double window_mass(const DensityOnRay& p, double x, double delta) {
    return window_integral(p, x, delta, Cutoff::Respect, 1e-12);
}

double y_functional(const DensityOnRay& p, double a, double delta, Cutoff cutoff) {
    if (!(delta >= 0.0 && delta < 0.2)) throw DomainError("delta must lie in [0, 0.2)");
    if (!(a > 0.0)) throw DomainError("a must be > 0");
    const double mass = p.total_mass();
    if (std::abs(mass - 1.0) > 1e-6) {
        throw DomainError("density not normalized (mass " + std::to_string(mass) + ")");
    }
    if (delta == 0.0) return 0.0;
    const double start = std::max(a, p.lower());
    const double extent = functional_extent(p, start);
    const double rel_tol = p.closed_form() ? 1e-12 : 1e-8;
    const auto outer = [&](double u) {
        const double x = start * std::exp(u);
        const double px = p.pdf(x);
        if (px == 0.0) return 0.0;
        return x * x * px * window_integral(p, x, delta, cutoff, rel_tol * 0.1);
    };
    double total = 0.0;
    double from = 0.0;
    for (double cut : {delta, extent - delta, extent}) {
        if (cut > from && cut <= extent) {
            total += integrate_adaptive(outer, from, cut, 0.0, rel_tol, 20).value;
            from = cut;
        }
    }
    return total;
}

double extremal_y_closed_form(double a, double delta) { return 2.0 * a * std::sinh(delta); }

MinimalityReport minimality_check_on(double a, double delta,
                                     std::span<const DensityOnRay> densities,
                                     std::span<const std::string> labels, double constant_c) {
    if (!(delta > 0.0 && delta <= 0.05)) throw DomainError("minimality check needs 0 < delta <= 0.05");
    MinimalityReport report;
    report.a = a;
    report.delta = delta;
    report.constant_c = constant_c;
    report.derivative_cap = 1.0 / (10.0 * delta);
    const auto h = DensityOnRay::extremal(a);
    report.y_extremal_ignored = y_functional(h, a, delta, Cutoff::Ignore);
    report.y_extremal_respected = y_functional(h, a, delta, Cutoff::Respect);
    const double floor = report.y_extremal_ignored * (1.0 - constant_c * delta);

    for (std::size_t i = 0; i < densities.size(); ++i) {
        const DensityOnRay& p = densities[i];
        TrialOutcome trial;
        trial.label = i < labels.size() ? labels[i] : p.describe();
        trial.max_log_derivative = p.max_log_derivative();
        if (trial.max_log_derivative > report.derivative_cap) {
            trial.excluded = true;
            ++report.excluded;
            report.trials.push_back(trial);
            continue;
        }
        trial.y = y_functional(p, a, delta, Cutoff::Respect);
        trial.ratio = trial.y / report.y_extremal_ignored;

        // Window identity: with |d log(y p(y)) / d log y| <= D + 1 on the window,
        // window / (x p(x)) lies in [2 (1 - e^{-k delta}) / k, 2 (e^{k delta} - 1) / k], k = D + 1.
        const double k = trial.max_log_derivative + 1.0;
        const double env_lo = 2.0 * (-std::expm1(-k * delta)) / k;
        const double env_hi = 2.0 * std::expm1(k * delta) / k;
        const double u_lo = delta;
        const double u_hi = std::log(p.upper() / std::max(a, p.lower())) - delta;
        trial.window_identity_ok = true;
        constexpr int kProbe = 64;
        const double u_top = std::isfinite(u_hi) ? u_hi : 20.0;
        for (int j = 0; j <= kProbe && u_top > u_lo; ++j) {
            const double x = std::max(a, p.lower()) * std::exp(u_lo + (u_top - u_lo) * j / kProbe);
            const double px = p.pdf(x);
            if (px == 0.0) continue;
            const double ratio = window_mass(p, x, delta) / (x * px);
            trial.window_worst =
                std::max(trial.window_worst, std::abs(ratio / (2.0 * delta) - 1.0));
            if (ratio < env_lo * (1.0 - 1e-10) || ratio > env_hi * (1.0 + 1e-10))
                trial.window_identity_ok = false;
        }
        trial.passed = trial.y >= floor && trial.window_identity_ok;
        report.passed = report.passed && trial.passed;
        report.trials.push_back(trial);
    }
    return report;
}

MinimalityReport extremal_minimality_check(double a, double delta, std::size_t n_trials,
                                           std::uint64_t seed, double constant_c) {
    std::vector<DensityOnRay> densities;
    std::vector<std::string> labels;
    const double b = a * std::exp(12.0);
    for (std::size_t i = 0; i < n_trials; ++i) {
        CounterStream stream(seed, StreamDomain::TrialDensity, 0, i);
        const double c = 0.3 + 2.7 * stream.uniform();
        const double amp = 1.5 * stream.uniform();
        const double freq = 8.0 * stream.uniform();
        const double phase = 2.0 * std::numbers::pi * stream.uniform();
        densities.push_back(DensityOnRay::modulated(a, b, c, amp, freq, phase));
        labels.push_back("trial " + std::to_string(i) + ": " + densities.back().describe());
    }
    return minimality_check_on(a, delta, densities, labels, constant_c);
}

MinimalityReport pareto_minimality_check(double a, double delta, double constant_c) {
    std::vector<DensityOnRay> densities;
    std::vector<std::string> labels;
    for (double c : {0.5, 1.0, 2.0}) {
        densities.push_back(DensityOnRay::truncated_pareto(a, c, 1e6 * a));
        labels.push_back(densities.back().describe());
    }
    return minimality_check_on(a, delta, densities, labels, constant_c);
}

// ---------------------------------------------------------------------------
// Main inequality

MainInequalityReport main_inequality_check(const PopulationState& pop, const KernelSpec& kernel,
                                           const BoundParams& params, std::size_t n_pairs,
                                           std::uint64_t seed) {
    MainInequalityReport report;
    report.pairs_requested = n_pairs;
    if (!kernel.has_density()) {
        report.hypotheses_met = false;
        report.message = "hypotheses not met: no density";
        return report;
    }
    if (!params.epsilon) {
        report.hypotheses_met = false;
        report.message = "hypotheses not met: log-derivative bounds are unbounded";
        return report;
    }
    pop.validate();
    report.mu = mean(pop.wealth);
    report.tail_prob = tail_probability(pop.wealth, params.kappa);
    report.epsilon = *params.epsilon;
    report.rhs = params.delta_stripe * params.kappa * report.mu * params.gamma_inv_logderiv *
                 (1.0 - report.epsilon) * report.tail_prob * report.tail_prob;

    // F vanishes unless the central supports overlap, i.e. poorer * hi >= richer * lo.
    // Rows (the richer agent, in sorted order) are drawn in proportion to their
    // overlapping partner count times the scale of F, partners uniformly among
    // them, and every draw is reweighted so the mean stays unbiased.
    std::vector<double> sorted = pop.wealth;
    sort_nonnegative(sorted);
    const auto range = central_range(kernel);
    const double reach = range.lo / range.hi;
    const std::size_t n = sorted.size();
    std::vector<std::size_t> first(n, 0);
    std::vector<double> cumulative(n, 0.0);
    double total = 0.0;
    std::size_t lo = 0;
    while (lo < n && sorted[lo] <= 0.0) ++lo;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.0;
        if (sorted[i] > 0.0) {
            while (sorted[lo] < sorted[i] * reach) ++lo;
            first[i] = lo;
            w = (2.0 * static_cast<double>(i - lo) + 1.0) *
                (kernel.gamma_disp() * sorted[i] + kernel.beta());
        }
        total += w;
        cumulative[i] = total;
    }
    const double nn = static_cast<double>(n) * static_cast<double>(n);

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t m = 0; m < n_pairs; ++m) {
        CounterStream stream(seed, StreamDomain::PairSampling, 0, m);
        const double target = stream.uniform() * total;
        const auto i = std::min<std::size_t>(
            n - 1, std::upper_bound(cumulative.begin(), cumulative.end(), target) - cumulative.begin());
        const std::size_t slots = 2 * (i - first[i]) + 1;
        const auto k = std::min(slots - 1, static_cast<std::size_t>(stream.uniform() * slots));
        const std::size_t j = k == 0 ? i : first[i] + (k - 1) / 2;
        double f = 0.0;
        try {
            f = pair_split_integral(kernel, sorted[i], sorted[j]).value;
        } catch (const QuadratureError&) {
            ++report.pairs_failed;
            continue;
        }
        const double scale = kernel.gamma_disp() * sorted[i] + kernel.beta();
        const double v = f / scale * total / nn;
        sum += v;
        sum_sq += v * v;
        ++report.pairs_used;
    }
    if (report.pairs_used < 2) {
        report.hypotheses_met = false;
        report.message = "too few pairs evaluated";
        return report;
    }
    const double used = static_cast<double>(report.pairs_used);
    report.mean_f = sum / used;
    const double var = std::max(0.0, (sum_sq - used * report.mean_f * report.mean_f) / (used - 1.0));
    report.standard_error = std::sqrt(var / used);
    report.satisfied = report.mean_f >= report.rhs;
    const double margin = report.mean_f - report.rhs;
    report.margin_in_se = report.standard_error > 0.0
                              ? margin / report.standard_error
                              : (margin > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return report;
}

// ---------------------------------------------------------------------------
// Log-derivative transfer to the wealth density

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi > lo) || n < 2) throw DomainError("log grid needs 0 < lo < hi and n >= 2");
    std::vector<double> out(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) out[k] = lo * std::exp(step * static_cast<double>(k));
    out.back() = hi;
    return out;
}

PropagationReport density_log_derivative_propagation(const PopulationState& pop_prev,
                                                     const KernelSpec& kernel,
                                                     std::span<const double> x_grid,
                                                     double gamma_claimed,
                                                     double relative_tolerance,
                                                     double mass_level) {
    if (!kernel.has_density()) throw NoDensityError();
    if (x_grid.size() < 5) throw DomainError("grid needs at least 5 points");
    if (!(gamma_claimed > 0.0)) throw DomainError("claimed Gamma must be > 0");
    PropagationReport report;
    report.bound = 1.0 / gamma_claimed;
    report.tolerance = relative_tolerance * report.bound;
    report.mass_level = mass_level;

    std::vector<double> agents;
    for (double x : pop_prev.wealth) {
        if (x > 0.0) agents.push_back(x);
    }
    report.point_mass = 1.0 - static_cast<double>(agents.size()) / static_cast<double>(pop_prev.size());
    if (agents.empty()) throw DomainError("every agent sits at zero wealth: no density to check");
    const double weight = 1.0 / static_cast<double>(pop_prev.size());
    const auto pushforward = [&](double x) {
        double acc = 0.0;
        for (double xi : agents) acc += density(kernel, xi, x);
        return acc * weight;
    };

    const std::size_t n = x_grid.size();
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(x_grid[k] > 0.0) || (k > 0 && !(x_grid[k] > x_grid[k - 1])))
            throw DomainError("grid must be positive and increasing");
        p[k] = pushforward(x_grid[k]);
    }

    // Cell masses and coverage.
    std::vector<double> cell(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double left = k > 0 ? x_grid[k] - x_grid[k - 1] : 0.0;
        const double right = k + 1 < n ? x_grid[k + 1] - x_grid[k] : 0.0;
        cell[k] = 0.5 * (left + right) * p[k];
    }
    for (double m : cell) report.grid_mass += m;
    const double continuous_mass = 1.0 - report.point_mass;
    if (std::abs(report.grid_mass - continuous_mass) > 1e-3 * continuous_mass) {
        std::ostringstream msg;
        msg << "grid captures mass " << report.grid_mass << " of " << continuous_mass
            << "; extend or refine the grid";
        throw DomainError(msg.str());
    }

    // Grid log-derivative at every interior node; the bound must hold on a set
    // carrying mass_level of the captured mass, as in the kernel calibration.
    std::vector<double> deriv(n, 0.0);
    std::vector<std::size_t> order;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (!(cell[k] > 0.0)) continue;
        if (!(p[k - 1] > 0.0 && p[k + 1] > 0.0))
            throw DomainError("grid too coarse: zero density next to a point carrying mass");
        deriv[k] = std::abs((std::log(p[k + 1]) - std::log(p[k - 1])) /
                            (std::log(x_grid[k + 1]) - std::log(x_grid[k - 1])));
        order.push_back(k);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return deriv[l] < deriv[r]; });

    double carried = 0.0;
    double worst_gap = 0.0;
    double worst_gap_spacing = 0.0;
    for (std::size_t k : order) {
        if (carried >= mass_level * report.grid_mass) break;
        carried += cell[k];
        ++report.region_points;
        report.quantile_abs_log_derivative = deriv[k];
        const double h = kLogProbeStep;
        const double exact = std::abs((std::log(pushforward(x_grid[k] * std::exp(h))) -
                                       std::log(pushforward(x_grid[k] * std::exp(-h)))) /
                                      (2.0 * h));
        const double gap = std::abs(deriv[k] - exact);
        if (gap > worst_gap) {
            worst_gap = gap;
            worst_gap_spacing = std::log(x_grid[k + 1] / x_grid[k - 1]) / 2.0;
        }
    }
    if (worst_gap > 0.5 * report.tolerance) {
        std::ostringstream msg;
        msg << "grid too coarse: derivative estimate unstable (discrepancy " << worst_gap
            << "); refine the log-spacing to at most " << worst_gap_spacing / 4.0;
        throw DomainError(msg.str());
    }
    for (std::size_t k : order) {
        if (deriv[k] <= report.bound + report.tolerance) report.covered_mass += cell[k];
    }
    report.covered_mass /= report.grid_mass;
    report.satisfied = report.covered_mass >= mass_level;
    return report;
}

}  // namespace wealthdyn
