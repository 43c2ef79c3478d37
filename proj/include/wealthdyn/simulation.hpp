#pragma once

// Trajectory driver: advances the configured ensemble and evaluates the
// snapshot metrics and every bound after each step.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wealthdyn/bounds.hpp"
#include "wealthdyn/config.hpp"
#include "wealthdyn/dynamics.hpp"
#include "wealthdyn/metrics.hpp"

namespace wealthdyn {

struct TrajectoryRow {
    SnapshotMetrics metrics;
    /// Coefficients of the step leaving this snapshot.
    double alpha_t = 0.0;
    double beta_t = 0.0;
    double gamma_t = 0.0;
    std::string beta_mode;  // schedule, feedback or general
    BoundReport bounds;
};

struct Trajectory {
    std::vector<TrajectoryRow> rows;
    PopulationState final_population;
};

using RowObserver = std::function<void(const TrajectoryRow&)>;

/// Names of the bound records a run of `config` produces, in column order.
/// Rows before the first step lack the transition records.
std::vector<std::string> bound_names(const RunConfig& config);

/// Run config.steps steps from the configured initial population. The observer
/// sees each row as soon as it is complete.
Trajectory run(const RunConfig& config, const RowObserver& observer = {});

/// Same, starting from a given population (its t is kept).
Trajectory run_from(const RunConfig& config, PopulationState initial,
                    const RowObserver& observer = {});

struct BootstrapErrors {
    double se_cv2 = 0.0;
    double se_gini = 0.0;
};

/// Nonparametric bootstrap standard errors of CV^2 and G from `replicates`
/// resamples of an ascending-sorted ensemble. O(N) per replicate: resampling
/// only changes the multiplicity of each sorted entry.
BootstrapErrors bootstrap_standard_errors(std::span<const double> ascending,
                                          std::size_t replicates, std::uint64_t seed,
                                          std::uint64_t t);

}  // namespace wealthdyn
