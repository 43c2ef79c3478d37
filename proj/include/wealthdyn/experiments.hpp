#pragma once

// Scenario studies: trajectory classification and the search for the
// smallest proportional salary fraction that halts concentration.

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wealthdyn/config.hpp"
#include "wealthdyn/metrics.hpp"

namespace wealthdyn {

enum class Verdict { Diverging, Stabilized, Inconclusive };

std::string_view to_string(Verdict v) noexcept;

struct WindowMeans {
    double previous = 0.0;
    double last = 0.0;
};

/// Mean of G over the last `window` snapshots and over the `window` before them.
WindowMeans window_means(std::span<const double> gini, std::size_t window);

/// diverging: last-window mean exceeds the previous one by more than grow_tol and final G > 0.8.
/// stabilized: the window means differ by less than grow_tol and final G < 0.95.
/// Throws DomainError when fewer than 2 * window snapshots are given.
Verdict classify_trajectory(std::span<const double> gini, std::size_t window, double grow_tol);
Verdict classify_trajectory(std::span<const SnapshotMetrics> traj, std::size_t window,
                            double grow_tol);

struct ScenarioResult {
    std::string scenario;
    std::string parameter;  // c or beta schedule, as written to the summary
    SnapshotMetrics final;
    double min_gini = 0.0;
    double max_gini = 0.0;
    double min_cv = 0.0;
    double max_cv = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

ScenarioResult summarize_scenario(std::string scenario, std::string parameter,
                                  std::span<const SnapshotMetrics> traj, std::size_t window,
                                  double grow_tol);

/// Header and rows of the scenario summary CSV.
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const ScenarioResult& r);

struct ProbeRecord {
    double c = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

struct BisectionResult {
    double threshold = 0.0;  // midpoint of the final bracket
    double lo = 0.0;         // largest c classified diverging
    double hi = 0.0;         // smallest c classified stabilized
    std::vector<ProbeRecord> probes;
};

/// Bisection for the switch from Diverging (at lo) to Stabilized (at hi).
/// The bracket is validated first, then `interior_probes` evenly spaced points
/// check monotonicity. Throws SearchError on "no sign change", on an
/// inconclusive probe, or when a stabilized c lies below a diverging one.
BisectionResult bisect_threshold(const std::function<Verdict(double)>& classify, double lo,
                                 double hi, double tol, std::size_t interior_probes = 3);

/// Snapshot metrics only, no bound evaluation: the fast path for probes.
std::vector<SnapshotMetrics> simulate_metrics(const RunConfig& config);

/// The configuration with a proportional policy at salary fraction c and the given horizon.
RunConfig proportional_variant(const RunConfig& base, double c, std::uint64_t horizon);

struct ThresholdSearchResult {
    BisectionResult bisection;
    double c_star = 0.0;
    double plateau_cv = 0.0;   // mean CV over the last window at the smallest stabilized c
    double scale = 0.0;        // gamma^2 / (2 alpha) (1 + 1 / CV_plateau^2)
    double ratio = 0.0;        // c_star / scale
    std::uint64_t horizon = 0;
    std::size_t window = 0;
    double grow_tol = 0.0;
    std::vector<ScenarioResult> probe_summaries;
    std::size_t rising_remapped = 0;  // inconclusive probes counted as diverging
};

/// Proportional-mode runs of `base` with a fixed seed, one per probe.
/// With base.search.rising_as_diverging, a rising inconclusive probe counts as diverging.
ThresholdSearchResult find_min_stabilizing_salary_fraction(const RunConfig& base, double c_lo,
                                                           double c_hi, double tol,
                                                           std::uint64_t horizon);

}  // namespace wealthdyn
