#include "wealthdyn/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wealthdyn/appendix.hpp"
#include "wealthdyn/error.hpp"
#include "wealthdyn/experiments.hpp"
#include "wealthdyn/report.hpp"

namespace wealthdyn {

namespace {

std::string fmt(double v) { return format_human(v); }

// Kernel of the step leaving `pop`, when the policy has a linear form.
std::optional<KernelSpec> step_kernel(const RunConfig& config, const PopulationState& pop) {
    const auto res = resolve_step(pop, config.growth_policy());
    if (res.mode == PolicyMode::General) {
        if (config.policy.kind == PolicyKind::Adaptation) return config.kernel;
        return std::nullopt;
    }
    return config.kernel.with_growth(res.alpha, res.beta);
}

}  // namespace

PopulationState simulate_population(const RunConfig& config) {
    const GrowthPolicy policy = config.growth_policy();
    PopulationState pop = make_initial_population(config.initial, config.n, config.seed);
    for (std::uint64_t s = 0; s < config.steps; ++s)
        pop = step(pop, config.kernel, policy, config.seed, config.threads);
    return pop;
}

std::vector<BoundSummary> summarize_bounds(const RunConfig& config, const Trajectory& traj) {
    std::vector<BoundSummary> out;
    for (const auto& name : bound_names(config)) {
        BoundSummary s;
        s.name = name;
        bool first = true;
        for (const auto& row : traj.rows) {
            const BoundRecord* r = row.bounds.find(name);
            if (!r) continue;
            s.theorem = r->theorem;
            ++s.evaluated;
            if (r->satisfied) {
                ++s.satisfied;
                if (s.first_satisfied_t < 0) s.first_satisfied_t = static_cast<std::int64_t>(row.metrics.t);
                s.last_satisfied_t = static_cast<std::int64_t>(row.metrics.t);
            }
            if (r->within_tolerance()) ++s.within_tolerance;
            if (first || r->slack < s.worst_slack) {
                s.worst_slack = r->slack;
                s.worst_t = row.metrics.t;
            }
            first = false;
        }
        out.push_back(s);
    }
    return out;
}

VerificationOutcome verify_bounds(const RunConfig& config, const Trajectory& traj,
                                  std::ostream& out) {
    VerificationOutcome outcome;
    SectionReport report(out);
    const auto constants = config.log_derivative_constants();
    report.section("run");
    report.field("name", config.name);
    report.field("n", config.n);
    report.field("steps", static_cast<std::size_t>(config.steps));
    report.field("seed", static_cast<std::size_t>(config.seed));
    report.field("policy", std::string(to_string(config.policy.kind)));
    report.field("gamma_disp", config.kernel.gamma_disp());
    report.field("gamma_inv_logderiv", constants.gamma);
    report.field("delta_logx", constants.delta_logx);
    report.field("delta_logxp", constants.delta_logxp);
    report.field("epsilon", constants.epsilon ? *constants.epsilon : std::nan(""));
    report.field("final_gini", traj.rows.back().metrics.gini);
    report.field("final_cv", traj.rows.back().metrics.cv);

    for (const auto& s : summarize_bounds(config, traj)) {
        report.section("bound." + s.name);
        report.field("kind", std::string(s.theorem ? "theorem" : "condition"));
        report.field("evaluated", s.evaluated);
        report.field("satisfied", s.satisfied);
        if (s.theorem) report.field("within_tolerance", s.within_tolerance);
        report.field("worst_slack", s.worst_slack);
        report.field("worst_t", static_cast<std::size_t>(s.worst_t));
        if (!s.theorem) {
            report.field("first_satisfied_t", std::to_string(s.first_satisfied_t));
            report.field("last_satisfied_t", std::to_string(s.last_satisfied_t));
        }
        if (s.theorem && s.within_tolerance < s.evaluated) {
            std::ostringstream msg;
            msg << s.name << ": " << (s.evaluated - s.within_tolerance) << " of " << s.evaluated
                << " steps violate the bound beyond tolerance (worst slack " << fmt(s.worst_slack)
                << " at t = " << s.worst_t << ")";
            outcome.failures.push_back(msg.str());
        }
    }

    // The general-mode rewrite of the halting condition on every snapshot.
    if (config.policy.kind == PolicyKind::Linear || config.policy.kind == PolicyKind::Proportional) {
        double worst = 0.0;
        std::size_t disagree = 0;
        for (const auto& row : traj.rows) {
            if (!(row.metrics.cv > 0.0)) continue;
            const auto eq = adaptation_equivalence(row.alpha_t, row.beta_t, row.metrics.mu,
                                                   row.metrics.cv, config.kernel.gamma_disp());
            worst = std::max(worst, eq.relative_gap);
            if (!eq.agree) ++disagree;
        }
        report.section("identity.adaptation_equivalence");
        report.field("worst_relative_gap", worst);
        report.field("flag_disagreements", disagree);
        if (worst > 1e-10 || disagree > 0)
            outcome.failures.push_back("adaptation equivalence: relative gap " + fmt(worst));
    }

    report.section("verdict");
    report.field("passed", outcome.passed());
    for (const auto& f : outcome.failures) report.field("failure", f);
    return outcome;
}

VerificationOutcome verify_appendix(const RunConfig& config, std::ostream& out) {
    VerificationOutcome outcome;
    SectionReport report(out);
    const auto& app = config.appendix;
    const KernelSpec& kernel = config.kernel;

    report.section("hypotheses");
    report.field("kernel", std::string(to_string(kernel.family())));
    if (!kernel.has_density()) {
        outcome.hypotheses_met = false;
        report.field("met", false);
        report.field("message", std::string("hypotheses not met: no density"));
        outcome.failures.push_back("hypotheses not met: no density");
        return outcome;
    }
    report.field("met", true);

    // Constants side by side: measured log-derivative inverse and dispersion.
    const auto cal = calibrate_log_derivative_bounds(kernel.with_growth(kernel.alpha(), 0.0), 1.0,
                                                     config.bounds.calibration_mass,
                                                     config.bounds.calibration_samples, config.seed);
    const auto constants = config.log_derivative_constants();
    const double gamma_claimed = constants.gamma;
    report.section("calibration");
    report.field("mass", cal.mass);
    report.field("delta_input", cal.delta_input);
    report.field("delta_output", cal.delta_output);
    report.field("gamma_measured", cal.gamma());
    report.field("gamma_claimed", gamma_claimed);
    report.field("gamma_disp", kernel.gamma_disp());

    const auto record = [&](bool ok, const std::string& what) {
        if (!ok) outcome.failures.push_back(what);
    };

    try {
        const auto diag = diagonal_bound_check(kernel, app.x_grid, gamma_claimed, 1e-6);
        report.section("diagonal_bound");
        report.field("gamma", diag.gamma);
        report.field("tolerance", diag.tolerance);
        for (const auto& row : diag.rows) {
            const std::string p = "x=" + fmt(row.x) + ".";
            report.field(p + "f_diag", row.f_diag);
            report.field(p + "slack_mean", row.slack_mean);
            report.field(p + "slack_x", row.slack_x);
            report.field(p + "satisfied", row.satisfied);
            record(row.satisfied, "diagonal bound fails at x = " + fmt(row.x));
        }
    } catch (const Error& e) {
        record(false, std::string("diagonal bound: ") + e.what());
    }

    try {
        report.section("pair_symmetry");
        const double x = app.x_grid.front();
        for (const auto& [u, v] : {std::pair{x, x}, std::pair{x, 2.0 * x}}) {
            const double fxy = pair_split_integral(kernel, u, v).value;
            const double fyx = pair_split_integral(kernel, v, u).value;
            const double full = expected_abs_difference(kernel, u, v);
            const double gap = std::abs(fxy + fyx - full);
            const double tol = 1e-6 * conditional_mean(kernel, std::max(u, v));
            const std::string p = "x=" + fmt(u) + ",y=" + fmt(v) + ".";
            report.field(p + "f_xy", fxy);
            report.field(p + "f_yx", fyx);
            report.field(p + "expected_abs_difference", full);
            report.field(p + "gap", gap);
            record(gap <= tol, "pair integral symmetry gap " + fmt(gap) + " at " + p);
        }
    } catch (const Error& e) {
        record(false, std::string("pair symmetry: ") + e.what());
    }

    report.section("y_functional_extremal");
    for (double a : {0.5, 1.0, 10.0}) {
        for (double d : {0.001, 0.01, 0.05}) {
            const double q = y_functional(DensityOnRay::extremal(a), a, d, Cutoff::Ignore);
            const double exact = extremal_y_closed_form(a, d);
            const double rel = std::abs(q / exact - 1.0);
            report.field("a=" + fmt(a) + ",delta=" + fmt(d) + ".relative_error", rel);
            record(rel <= 1e-9, "extremal functional off by " + fmt(rel) + " at a = " + fmt(a) +
                                    ", delta = " + fmt(d));
        }
    }

    const auto write_minimality = [&](const std::string& name, const MinimalityReport& m) {
        report.section(name);
        report.field("a", m.a);
        report.field("delta", m.delta);
        report.field("constant_c", m.constant_c);
        report.field("derivative_cap", m.derivative_cap);
        report.field("y_extremal_ignored", m.y_extremal_ignored);
        report.field("y_extremal_respected", m.y_extremal_respected);
        report.field("trials", m.trials.size());
        report.field("excluded", m.excluded);
        for (std::size_t i = 0; i < m.trials.size(); ++i) {
            const auto& t = m.trials[i];
            const std::string p = "trial." + std::to_string(i) + ".";
            report.field(p + "label", t.label);
            if (t.excluded) {
                report.field(p + "excluded", true);
                continue;
            }
            report.field(p + "y", t.y);
            report.field(p + "ratio", t.ratio);
            report.field(p + "window_worst", t.window_worst);
            report.field(p + "passed", t.passed);
        }
        report.field("passed", m.passed);
        record(m.passed, name + " failed");
    };
    try {
        write_minimality("minimality_pareto",
                         pareto_minimality_check(app.y_lower, app.y_delta, app.minimality_constant));
        write_minimality("minimality_random",
                         extremal_minimality_check(app.y_lower, app.y_delta, app.minimality_trials,
                                                   config.seed, app.minimality_constant));
    } catch (const Error& e) {
        record(false, std::string("minimality: ") + e.what());
    }

    // Checks on the simulated ensemble.
    const PopulationState pop = simulate_population(config);
    const auto k_step = step_kernel(config, pop);
    report.section("ensemble");
    report.field("t", static_cast<std::size_t>(pop.t));
    report.field("n", pop.size());
    report.field("gini", gini(pop.wealth));
    report.field("cv", coefficient_of_variation(pop.wealth));
    if (!k_step) {
        report.field("main_inequality", std::string("skipped: policy has no linear form"));
    } else {
        for (double kappa : config.kappas) {
            BoundParams params = config.bound_params(kappa);
            const auto mi = main_inequality_check(pop, *k_step, params, app.pairs, config.seed);
            report.section("main_inequality.k" + fmt(kappa));
            report.field("hypotheses_met", mi.hypotheses_met);
            if (!mi.message.empty()) report.field("message", mi.message);
            report.field("pairs_used", mi.pairs_used);
            report.field("pairs_failed", mi.pairs_failed);
            report.field("mu", mi.mu);
            report.field("tail_prob", mi.tail_prob);
            report.field("epsilon", mi.epsilon);
            report.field("mean_f", mi.mean_f);
            report.field("standard_error", mi.standard_error);
            report.field("rhs", mi.rhs);
            report.field("margin_in_se", mi.margin_in_se);
            report.field("satisfied", mi.satisfied);
            if (!mi.hypotheses_met) {
                outcome.hypotheses_met = false;
                record(false, mi.message);
            } else {
                record(mi.satisfied && mi.margin_in_se > 3.0,
                       "main inequality at kappa = " + fmt(kappa) + ": margin " +
                           fmt(mi.margin_in_se) + " standard errors");
            }
        }

        try {
            // Evenly spaced subsample over the sorted ensemble keeps the mixture affordable.
            std::vector<double> sorted = pop.wealth;
            std::sort(sorted.begin(), sorted.end());
            PopulationState prev;
            const std::size_t m = std::min<std::size_t>(sorted.size(), 1000);
            for (std::size_t i = 0; i < m; ++i)
                prev.wealth.push_back(sorted[(2 * i + 1) * sorted.size() / (2 * m)]);
            prev.t = pop.t;
            double lo = kUnbounded;
            for (double x : prev.wealth)
                if (x > 0.0) lo = std::min(lo, x);
            const double qlo = growth_factor_quantile(*k_step, 1e-9);
            const double qhi = growth_factor_quantile(*k_step, 1.0 - 1e-9);
            const double beta = k_step->beta();
            const auto grid = log_grid(beta + lo * qlo, beta + prev.wealth.back() * qhi,
                                       app.density_grid_points);
            const auto prop = density_log_derivative_propagation(prev, *k_step, grid, gamma_claimed);
            report.section("density_propagation");
            report.field("agents", prev.size());
            report.field("bound", prop.bound);
            report.field("tolerance", prop.tolerance);
            report.field("mass_level", prop.mass_level);
            report.field("covered_mass", prop.covered_mass);
            report.field("quantile_abs_log_derivative", prop.quantile_abs_log_derivative);
            report.field("grid_mass", prop.grid_mass);
            report.field("point_mass", prop.point_mass);
            report.field("region_points", prop.region_points);
            report.field("satisfied", prop.satisfied);
            record(prop.satisfied, "density propagation: bound " + fmt(prop.bound) +
                                       " holds on mass " + fmt(prop.covered_mass) + " only");
        } catch (const Error& e) {
            record(false, std::string("density propagation: ") + e.what());
        }
    }

    report.section("verdict");
    report.field("passed", outcome.passed());
    for (const auto& f : outcome.failures) report.field("failure", f);
    return outcome;
}

VerificationOutcome search_threshold(const RunConfig& config, std::ostream& out,
                                     std::ostream* summary) {
    VerificationOutcome outcome;
    SectionReport report(out);
    const auto& s = config.search;
    report.section("search");
    report.field("c_lo", s.c_lo);
    report.field("c_hi", s.c_hi);
    report.field("tol", s.tol);
    report.field("horizon", static_cast<std::size_t>(s.horizon));
    report.field("grow_tol", s.grow_tol);
    report.field("n", config.n);
    report.field("seed", static_cast<std::size_t>(config.seed));
    try {
        const auto res = find_min_stabilizing_salary_fraction(config, s.c_lo, s.c_hi, s.tol, s.horizon);
        report.section("probes");
        for (const auto& p : res.probe_summaries) {
            const std::string tag = p.scenario == "probe_rising" ? " (rising, counted as diverging)" : "";
            report.field("c=" + p.parameter, std::string(to_string(p.verdict)) + tag +
                                                 " final_gini=" + fmt(p.final.gini) +
                                                 " final_cv=" + fmt(p.final.cv));
        }
        report.section("result");
        report.field("window", res.window);
        report.field("rising_as_diverging", config.search.rising_as_diverging);
        report.field("rising_remapped", res.rising_remapped);
        report.field("c_star", res.c_star);
        report.field("bracket_lo", res.bisection.lo);
        report.field("bracket_hi", res.bisection.hi);
        report.field("plateau_cv", res.plateau_cv);
        report.field("scale", res.scale);
        report.field("ratio", res.ratio);
        report.field("within_factor_3", res.ratio >= 1.0 / 3.0 && res.ratio <= 3.0);
        if (summary) {
            write_summary_header(*summary);
            for (const auto& p : res.probe_summaries) write_summary_row(*summary, p);
        }
    } catch (const SearchError& e) {
        report.section("result");
        report.field("error", std::string(e.what()));
        outcome.failures.push_back(e.what());
    }
    report.section("verdict");
    report.field("passed", outcome.passed());
    for (const auto& f : outcome.failures) report.field("failure", f);
    return outcome;
}

}  // namespace wealthdyn
