#pragma once

// Orchestration behind the verify-bounds, verify-appendix and
// search-threshold subcommands. Each writes a sectioned report and returns
// the list of failed checks.

#include <ostream>
#include <string>
#include <vector>

#include "wealthdyn/config.hpp"
#include "wealthdyn/simulation.hpp"

namespace wealthdyn {

struct VerificationOutcome {
    bool hypotheses_met = true;
    std::vector<std::string> failures;

    bool passed() const { return hypotheses_met && failures.empty(); }
};

struct BoundSummary {
    std::string name;
    bool theorem = false;
    std::size_t evaluated = 0;
    std::size_t satisfied = 0;         // strictly
    std::size_t within_tolerance = 0;  // theorems only
    double worst_slack = 0.0;
    std::uint64_t worst_t = 0;
    std::int64_t first_satisfied_t = -1;
    std::int64_t last_satisfied_t = -1;
};

/// Per-record tallies over a trajectory, in column order.
std::vector<BoundSummary> summarize_bounds(const RunConfig& config, const Trajectory& traj);

/// Every theorem record of every row must hold within its tolerance.
VerificationOutcome verify_bounds(const RunConfig& config, const Trajectory& traj,
                                  std::ostream& report);

/// The appendix checks on the kernel of `config` and on the final ensemble of its run.
VerificationOutcome verify_appendix(const RunConfig& config, std::ostream& report);

/// Threshold search from config.search; `summary` (optional) receives the probe CSV.
VerificationOutcome search_threshold(const RunConfig& config, std::ostream& report,
                                     std::ostream* summary);

/// Final ensemble of config.steps steps (no bound evaluation).
PopulationState simulate_population(const RunConfig& config);

}  // namespace wealthdyn
