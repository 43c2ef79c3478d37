#pragma once

// Run configuration: a YAML document with the sections kernel, policy,
// population, simulation, metrics, bounds, appendix, search and output.
// See configs/README.md for the schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wealthdyn/bounds.hpp"
#include "wealthdyn/dynamics.hpp"
#include "wealthdyn/kernels.hpp"

namespace wealthdyn {

enum class PolicyKind { Linear, Proportional, Adaptation, FlatTax };

std::string_view to_string(PolicyKind kind) noexcept;

/// How the inverse log-derivative constant of the Gini bounds is chosen.
enum class LogDerivSource {
    Calibrated,  // measured on the kernel at the calibration mass
    GammaDisp,   // identified with the dispersion constant
    Explicit,    // given as a number
    Claimed,     // inverse of the kernel's declared delta_logx / delta_logxp
};

struct PolicyConfig {
    PolicyKind kind = PolicyKind::Linear;
    double salary_fraction = 0.0;  // proportional: beta_t = c mu_t
    double tax_rate = 0.0;         // flat tax: zeta(x) = rate (mu - x)
};

struct BoundsConfig {
    double delta = 0.05;
    LogDerivSource source = LogDerivSource::Calibrated;
    double gamma_inv_logderiv = 0.0;  // explicit value
    double calibration_mass = 0.99;
    std::size_t calibration_samples = 200000;
    std::size_t bootstrap_replicates = 32;
    double bootstrap_se_multiple = 5.0;
};

struct AppendixConfig {
    std::size_t pairs = 2000;
    std::vector<double> x_grid{1.0, 10.0, 100.0};
    double y_lower = 1.0;        // a of the stripe functional
    double y_delta = 0.01;       // delta of the stripe functional
    std::size_t minimality_trials = 20;
    double minimality_constant = 5.0;
    std::size_t density_grid_points = 4000;
};

struct SearchConfig {
    double c_lo = 0.0;
    double c_hi = 0.2;
    double tol = 1e-3;
    std::uint64_t horizon = 800;
    std::uint64_t window = 0;  // 0 selects horizon / 5
    double grow_tol = 0.005;
    /// Count an inconclusive probe whose window means still rise by more than
    /// grow_tol as not stabilized, instead of stopping the search.
    bool rising_as_diverging = false;
};

struct OutputConfig {
    std::filesystem::path trajectory;  // simulate
    std::filesystem::path population;  // final ensemble, one value per line
    std::filesystem::path report;      // verify-* and search-threshold
    std::filesystem::path summary;     // scenario summary CSV
};

struct RunConfig {
    std::string name = "run";
    KernelSpec kernel = KernelSpec::lognormal(1.0, 0.0, 0.2);
    PolicyConfig policy;
    std::size_t n = 1000;
    InitialCondition initial;
    std::uint64_t steps = 100;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::vector<double> kappas{0.1, 0.25};
    BoundsConfig bounds;
    AppendixConfig appendix;
    SearchConfig search;
    OutputConfig output;

    /// Growth policy realizing `policy` with the kernel's alpha and beta.
    GrowthPolicy growth_policy() const;
    /// Bound parameters for one kappa, resolving the log-derivative constant.
    BoundParams bound_params(double kappa) const;
    /// Inverse log-derivative constant and the matching epsilon (unset when unbounded).
    struct LogDerivConstants {
        double gamma = 0.0;
        double delta_logx = kUnbounded;
        double delta_logxp = kUnbounded;
        std::optional<double> epsilon;
    };
    LogDerivConstants log_derivative_constants() const;

private:
    mutable std::optional<LogDerivConstants> cached_constants_;
};

/// Parse and validate. Throws ConfigError naming the field path and line.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text);

}  // namespace wealthdyn
