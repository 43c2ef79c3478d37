#pragma once

// Output formats: trajectory CSV, population dumps and the sectioned
// key: value report.

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wealthdyn/simulation.hpp"

namespace wealthdyn {

/// 17 significant digits: parses back to the same double.
std::string format_exact(double v);
/// 12 significant digits for human-facing prints.
std::string format_human(double v);

/// Trajectory CSV: t, mu, sigma, cv, gini, tail_p_<kappa>..., alpha_t, beta_t, beta_mode,
/// then <name>_lhs, <name>_rhs, <name>_satisfied per bound record.
class TrajectoryCsvWriter {
public:
    TrajectoryCsvWriter(std::ostream& out, const RunConfig& config);

    void write_header();
    void write_row(const TrajectoryRow& row);

private:
    std::ostream& out_;
    std::vector<double> kappas_;
    std::vector<std::string> names_;
};

/// One value per line at 17 significant digits.
void write_population(std::ostream& out, std::span<const double> wealth);
/// Reads one value per line; blank lines are skipped. Throws ConfigError naming the line.
std::vector<double> read_population(std::istream& in);

/// Sections of "key: value" lines, headed by "[name]".
class SectionReport {
public:
    explicit SectionReport(std::ostream& out) : out_(out) {}

    void section(const std::string& name);
    void field(const std::string& key, const std::string& value);
    void field(const std::string& key, double value);
    void field(const std::string& key, bool value);
    void field(const std::string& key, std::size_t value);

private:
    std::ostream& out_;
    bool first_ = true;
};

}  // namespace wealthdyn
