#include "wealthdyn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wealthdyn/dynamics.hpp"
#include "wealthdyn/error.hpp"
#include "wealthdyn/report.hpp"

namespace wealthdyn {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Diverging: return "diverging";
        case Verdict::Stabilized: return "stabilized";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

WindowMeans window_means(std::span<const double> gini, std::size_t window) {
    if (window == 0 || gini.size() < 2 * window)
        throw DomainError("trajectory needs at least 2 * window snapshots");
    const auto end = gini.end();
    WindowMeans m;
    const double w = static_cast<double>(window);
    m.last = std::accumulate(end - static_cast<std::ptrdiff_t>(window), end, 0.0) / w;
    m.previous = std::accumulate(end - static_cast<std::ptrdiff_t>(2 * window),
                                 end - static_cast<std::ptrdiff_t>(window), 0.0) /
                 w;
    return m;
}

Verdict classify_trajectory(std::span<const double> gini, std::size_t window, double grow_tol) {
    const auto m = window_means(gini, window);
    const double final_g = gini.back();
    const double diff = m.last - m.previous;
    if (diff > grow_tol && final_g > 0.8) return Verdict::Diverging;
    if (std::abs(diff) < grow_tol && final_g < 0.95) return Verdict::Stabilized;
    return Verdict::Inconclusive;
}

Verdict classify_trajectory(std::span<const SnapshotMetrics> traj, std::size_t window,
                            double grow_tol) {
    std::vector<double> g;
    g.reserve(traj.size());
    for (const auto& s : traj) g.push_back(s.gini);
    return classify_trajectory(g, window, grow_tol);
}

ScenarioResult summarize_scenario(std::string scenario, std::string parameter,
                                  std::span<const SnapshotMetrics> traj, std::size_t window,
                                  double grow_tol) {
    if (traj.empty()) throw DomainError("empty trajectory");
    ScenarioResult r;
    r.scenario = std::move(scenario);
    r.parameter = std::move(parameter);
    r.final = traj.back();
    r.min_gini = r.max_gini = traj.front().gini;
    r.min_cv = r.max_cv = traj.front().cv;
    for (const auto& s : traj) {
        r.min_gini = std::min(r.min_gini, s.gini);
        r.max_gini = std::max(r.max_gini, s.gini);
        r.min_cv = std::min(r.min_cv, s.cv);
        r.max_cv = std::max(r.max_cv, s.cv);
    }
    r.verdict = traj.size() >= 2 * window ? classify_trajectory(traj, window, grow_tol)
                                          : Verdict::Inconclusive;
    return r;
}

void write_summary_header(std::ostream& out) {
    out << "scenario,c_or_beta,final_gini,final_cv,verdict\n";
}

void write_summary_row(std::ostream& out, const ScenarioResult& r) {
    out << r.scenario << ',' << r.parameter << ',' << format_exact(r.final.gini) << ','
        << format_exact(r.final.cv) << ',' << to_string(r.verdict) << '\n';
}

BisectionResult bisect_threshold(const std::function<Verdict(double)>& classify, double lo,
                                 double hi, double tol, std::size_t interior_probes) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");
    if (!(hi > lo)) throw DomainError("bracket needs lo < hi");
    BisectionResult res;

    const auto probe = [&](double c) {
        const Verdict v = classify(c);
        res.probes.push_back({c, v});
        if (v == Verdict::Inconclusive) {
            std::ostringstream msg;
            msg.precision(12);
            msg << "inconclusive probe at c = " << c;
            throw SearchError(msg.str(), c);
        }
        // Monotonicity over everything seen so far.
        for (const auto& p : res.probes) {
            if ((p.verdict == Verdict::Stabilized && v == Verdict::Diverging && p.c < c) ||
                (p.verdict == Verdict::Diverging && v == Verdict::Stabilized && p.c > c)) {
                std::ostringstream msg;
                msg.precision(12);
                msg << "monotonicity violated: stabilized at c = "
                    << (v == Verdict::Stabilized ? c : p.c) << " but diverging at c = "
                    << (v == Verdict::Stabilized ? p.c : c);
                throw SearchError(msg.str(), c);
            }
        }
        return v;
    };
    const auto bracket_probe = [&](double c) {
        const Verdict v = classify(c);
        res.probes.push_back({c, v});
        return v;
    };

    if (bracket_probe(lo) != Verdict::Diverging) {
        std::ostringstream msg;
        msg << "no sign change: c_lo = " << lo << " is " << to_string(res.probes.back().verdict)
            << ", expected diverging";
        throw SearchError(msg.str(), lo);
    }
    if (bracket_probe(hi) != Verdict::Stabilized) {
        std::ostringstream msg;
        msg << "no sign change: c_hi = " << hi << " is " << to_string(res.probes.back().verdict)
            << ", expected stabilized";
        throw SearchError(msg.str(), hi);
    }
    const double span = hi - lo;
    for (std::size_t k = 1; k <= interior_probes && span > tol; ++k) {
        const double c = lo + span * static_cast<double>(k) / static_cast<double>(interior_probes + 1);
        probe(c);
    }
    for (const auto& p : res.probes) {
        if (p.verdict == Verdict::Diverging) lo = std::max(lo, p.c);
    }
    for (const auto& p : res.probes) {
        if (p.verdict == Verdict::Stabilized && p.c > lo) hi = std::min(hi, p.c);
    }
    while (hi - lo >= tol) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid) == Verdict::Diverging) lo = mid;
        else hi = mid;
    }
    res.lo = lo;
    res.hi = hi;
    res.threshold = 0.5 * (lo + hi);
    return res;
}

std::vector<SnapshotMetrics> simulate_metrics(const RunConfig& config) {
    const GrowthPolicy policy = config.growth_policy();
    PopulationState pop = make_initial_population(config.initial, config.n, config.seed);
    std::vector<SnapshotMetrics> out;
    out.reserve(config.steps + 1);
    out.push_back(compute_snapshot(pop.wealth, pop.t, config.kappas));
    for (std::uint64_t s = 0; s < config.steps; ++s) {
        pop = step(pop, config.kernel, policy, config.seed, config.threads);
        out.push_back(compute_snapshot(pop.wealth, pop.t, config.kappas));
    }
    return out;
}

RunConfig proportional_variant(const RunConfig& base, double c, std::uint64_t horizon) {
    RunConfig cfg = base;
    cfg.kernel = base.kernel.with_growth(base.kernel.alpha(), 0.0);
    cfg.policy.kind = PolicyKind::Proportional;
    cfg.policy.salary_fraction = c;
    cfg.steps = horizon;
    return cfg;
}

ThresholdSearchResult find_min_stabilizing_salary_fraction(const RunConfig& base, double c_lo,
                                                           double c_hi, double tol,
                                                           std::uint64_t horizon) {
    ThresholdSearchResult out;
    out.horizon = horizon;
    out.window = base.search.window > 0 ? base.search.window : horizon / 5;
    out.grow_tol = base.search.grow_tol;
    if (out.window == 0) throw DomainError("horizon too short for a classification window");

    std::vector<std::pair<double, double>> plateau;  // (c, plateau CV) of stabilized probes
    const auto classify = [&](double c) {
        const auto traj = simulate_metrics(proportional_variant(base, c, horizon));
        std::ostringstream label;
        label.precision(17);
        label << c;
        out.probe_summaries.push_back(
            summarize_scenario("probe", label.str(), traj, out.window, out.grow_tol));
        Verdict v = out.probe_summaries.back().verdict;
        if (v == Verdict::Inconclusive && base.search.rising_as_diverging) {
            std::vector<double> g;
            g.reserve(traj.size());
            for (const auto& s : traj) g.push_back(s.gini);
            const auto m = window_means(g, out.window);
            if (m.last - m.previous > out.grow_tol) {
                v = Verdict::Diverging;
                out.probe_summaries.back().scenario = "probe_rising";
                ++out.rising_remapped;
            }
        }
        if (v == Verdict::Stabilized) {
            double cv = 0.0;
            for (std::size_t k = traj.size() - out.window; k < traj.size(); ++k) cv += traj[k].cv;
            plateau.emplace_back(c, cv / static_cast<double>(out.window));
        }
        return v;
    };
    out.bisection = bisect_threshold(classify, c_lo, c_hi, tol);
    out.c_star = out.bisection.threshold;
    for (const auto& [c, cv] : plateau) {
        if (c == out.bisection.hi) out.plateau_cv = cv;
    }
    const double g = base.kernel.gamma_disp();
    const double a = base.kernel.alpha();
    out.scale = g * g / (2.0 * a) * (1.0 + 1.0 / (out.plateau_cv * out.plateau_cv));
    out.ratio = out.c_star / out.scale;
    return out;
}

}  // namespace wealthdyn
