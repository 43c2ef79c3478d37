#include "wealthdyn/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wealthdyn/error.hpp"
#include "wealthdyn/random.hpp"

namespace wealthdyn {

namespace {

std::string kappa_tag(double kappa) {
    std::ostringstream out;
    out << "k" << kappa;
    return out.str();
}

bool has_linear_form(const RunConfig& config) {
    return config.policy.kind != PolicyKind::FlatTax;
}

bool is_general(const RunConfig& config) {
    return config.policy.kind == PolicyKind::Adaptation || config.policy.kind == PolicyKind::FlatTax;
}

// Linear coefficients (alpha, beta) equivalent to the resolved step, when they exist.
std::pair<double, double> linear_coefficients(const RunConfig& config, const StepResolution& res) {
    if (config.policy.kind == PolicyKind::Adaptation) return {config.kernel.alpha(), config.kernel.beta()};
    return {res.alpha, res.beta};
}

struct Evaluator {
    const RunConfig& config;
    std::vector<BoundParams> params;  // one per kappa
    double leak_fraction;

    explicit Evaluator(const RunConfig& cfg) : config(cfg) {
        for (double k : cfg.kappas) {
            params.push_back(cfg.bound_params(k));
            params.back().validate();
        }
        leak_fraction = 1.0 - cfg.bounds.calibration_mass;
    }

    // Records comparing snapshot t - 1 with snapshot t, for the step resolved at t - 1.
    void transitions(BoundReport& report, const SnapshotMetrics& prev, const SnapshotMetrics& cur,
                     const StepResolution& res, std::span<const double> ascending,
                     std::uint64_t t) const {
        if (!has_linear_form(config)) return;
        const auto [alpha, beta] = linear_coefficients(config, res);
        const double gd = config.kernel.gamma_disp();
        const double cv2 = cur.cv * cur.cv;
        BoundRecord cv = make_record("cv_growth", cv2,
                                     cv_growth_lower_bound(prev.cv, alpha, beta, prev.mu, gd), true,
                                     true);
        // Round-off allowance: deterministic steps preserve CV only up to rounding.
        cv.tolerance = 1e-12 * std::max(std::abs(cv.lhs), std::abs(cv.rhs));
        std::vector<BoundRecord> gini_records;
        bool need_bootstrap = !cv.within_tolerance();
        for (std::size_t k = 0; k < params.size(); ++k) {
            const auto& p = params[k];
            const double tail = prev.tail(p.kappa);
            BoundRecord g = make_record("gini_growth_" + kappa_tag(p.kappa), cur.gini - prev.gini,
                                        gini_growth_lower_bound(prev.gini, beta, prev.mu, cur.mu, p, tail),
                                        true, true);
            g.tolerance = 1e-12 * std::max({std::abs(cur.gini), std::abs(prev.gini), std::abs(g.rhs)});
            need_bootstrap = need_bootstrap || !g.within_tolerance();
            gini_records.push_back(g);
        }
        // Bootstrap only where a theorem is strictly violated; the tolerance is moot otherwise.
        if (need_bootstrap && config.bounds.bootstrap_replicates >= 2) {
            const auto se = bootstrap_standard_errors(ascending, config.bounds.bootstrap_replicates,
                                                      config.seed, t);
            const double m = config.bounds.bootstrap_se_multiple;
            cv.tolerance += m * se.se_cv2;
            for (std::size_t k = 0; k < params.size(); ++k) {
                const auto& p = params[k];
                const double push = zeta_variability_lower_bound(p, prev.mu, prev.tail(p.kappa));
                gini_records[k].tolerance += m * se.se_gini + leak_fraction * push / cur.mu;
            }
        }
        report.records.push_back(cv);
        for (auto& g : gini_records) report.records.push_back(std::move(g));
    }

    // Records evaluated on snapshot t alone.
    void conditions(BoundReport& report, const SnapshotMetrics& cur, const StepResolution& next,
                    std::span<const double> wealth) const {
        const double gd = config.kernel.gamma_disp();
        if (has_linear_form(config)) {
            const auto [alpha, beta] = linear_coefficients(config, next);
            const auto halt = cv_halting_condition(cur.cv, alpha, beta, cur.mu, gd);
            report.records.push_back(make_record("cv_halting", halt.lhs, halt.rhs, true, false));
            for (const auto& p : params) {
                report.records.push_back(make_record(
                    "gini_halting_tail_" + kappa_tag(p.kappa), cur.tail(p.kappa),
                    gini_halting_tail_bound(cur.gini, beta, cur.mu, p), false, false));
            }
        }
        for (const auto& p : params) {
            report.records.push_back(make_record("saturation_" + kappa_tag(p.kappa), cur.gini,
                                                 saturation_lower_bound(1.0 - cur.tail(p.kappa), p.kappa),
                                                 true, true));
        }
        if (is_general(config)) {
            const auto zm = zeta_moments(wealth, next.zeta);
            const auto gc = general_cv_condition(next.gamma, cur.mu, cur.cv, zm.var_zeta,
                                                 zm.cov_x_zeta, gd);
            report.records.push_back(make_record("general_cv", gc.lhs, gc.rhs, false, false));
            for (const auto& p : params) {
                report.records.push_back(make_record(
                    "zeta_variability_" + kappa_tag(p.kappa), zm.mean_abs_diff,
                    zeta_variability_lower_bound(p, cur.mu, cur.tail(p.kappa)), true, false));
            }
        }
    }
};

std::string beta_mode(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Linear: return "schedule";
        case PolicyKind::Proportional: return "feedback";
        default: return "general";
    }
}

}  // namespace

std::vector<std::string> bound_names(const RunConfig& config) {
    std::vector<std::string> names;
    if (has_linear_form(config)) {
        names.push_back("cv_growth");
        for (double k : config.kappas) names.push_back("gini_growth_" + kappa_tag(k));
        names.push_back("cv_halting");
        for (double k : config.kappas) names.push_back("gini_halting_tail_" + kappa_tag(k));
    }
    for (double k : config.kappas) names.push_back("saturation_" + kappa_tag(k));
    if (is_general(config)) {
        names.push_back("general_cv");
        for (double k : config.kappas) names.push_back("zeta_variability_" + kappa_tag(k));
    }
    return names;
}

BootstrapErrors bootstrap_standard_errors(std::span<const double> ascending,
                                          std::size_t replicates, std::uint64_t seed,
                                          std::uint64_t t) {
    const std::size_t n = ascending.size();
    if (n < 2 || replicates < 2) throw DomainError("bootstrap needs N >= 2 and >= 2 replicates");
    std::vector<std::uint32_t> counts(n);
    double s_cv = 0.0, ss_cv = 0.0, s_g = 0.0, ss_g = 0.0;
    std::size_t used = 0;
    const double nd = static_cast<double>(n);
    for (std::size_t r = 0; r < replicates; ++r) {
        std::fill(counts.begin(), counts.end(), 0u);
        CounterStream stream(seed, StreamDomain::Bootstrap, t, r);
        for (std::size_t j = 0; j < n; ++j) {
            const auto idx = static_cast<std::size_t>((static_cast<std::uint64_t>(stream()) * n) >> 32);
            ++counts[idx];
        }
        double sum = 0.0, sum_sq = 0.0, pair = 0.0, before = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[i] == 0) continue;
            const double w = counts[i];
            const double x = ascending[i];
            sum += w * x;
            sum_sq += w * x * x;
            pair += w * x * (2.0 * before + w - nd);
            before += w;
        }
        const double mu = sum / nd;
        if (!(mu > 0.0)) continue;
        const double var = std::max(0.0, sum_sq / nd - mu * mu);
        const double cv2 = var / (mu * mu);
        const double g = pair / (nd * nd * mu);
        s_cv += cv2;
        ss_cv += cv2 * cv2;
        s_g += g;
        ss_g += g * g;
        ++used;
    }
    if (used < 2) return {};
    const double u = static_cast<double>(used);
    const auto sd = [u](double s, double ss) {
        return std::sqrt(std::max(0.0, (ss - s * s / u) / (u - 1.0)));
    };
    return {sd(s_cv, ss_cv), sd(s_g, ss_g)};
}

Trajectory run(const RunConfig& config, const RowObserver& observer) {
    return run_from(config, make_initial_population(config.initial, config.n, config.seed), observer);
}

Trajectory run_from(const RunConfig& config, PopulationState initial, const RowObserver& observer) {
    initial.validate();
    const Evaluator eval(config);
    const GrowthPolicy policy = config.growth_policy();
    Trajectory traj;
    PopulationState pop = std::move(initial);
    std::vector<double> sorted(pop.wealth);
    sort_nonnegative(sorted);

    const auto finish_row = [&](TrajectoryRow& row, const StepResolution& next) {
        row.alpha_t = next.alpha;
        row.beta_t = next.beta;
        row.gamma_t = next.gamma;
        row.beta_mode = beta_mode(config.policy.kind);
        eval.conditions(row.bounds, row.metrics, next, pop.wealth);
        if (observer) observer(row);
        traj.rows.push_back(std::move(row));
    };

    TrajectoryRow first;
    first.metrics = compute_snapshot_sorted(sorted, pop.t, config.kappas);
    StepResolution next = resolve_step(pop, policy);
    finish_row(first, next);

    const std::uint64_t end = pop.t + config.steps;
    while (pop.t < end) {
        auto outcome = step_detailed(pop, config.kernel, policy, config.seed, config.threads);
        pop = std::move(outcome.next);
        sorted = pop.wealth;
        sort_nonnegative(sorted);
        TrajectoryRow row;
        row.metrics = compute_snapshot_sorted(sorted, pop.t, config.kappas);
        if (!(row.metrics.mu > 0.0) || !std::isfinite(row.metrics.mu))
            throw SimulationError("mean wealth left (0, inf) at t = " + std::to_string(pop.t), 0,
                                  row.metrics.mu);
        eval.transitions(row.bounds, traj.rows.back().metrics, row.metrics, outcome.resolution,
                         sorted, pop.t);
        next = resolve_step(pop, policy);
        finish_row(row, next);
    }
    traj.final_population = std::move(pop);
    return traj;
}

}  // namespace wealthdyn
