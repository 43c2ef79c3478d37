#pragma once

// Particle representation of the master equation: the distribution of
// wealth at time t is a fixed-size ensemble, and one step moves every
// agent independently through the transition kernel.

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "wealthdyn/kernels.hpp"

namespace wealthdyn {

struct PopulationState {
    std::vector<double> wealth;
    std::uint64_t t = 0;

    std::size_t size() const noexcept { return wealth.size(); }
    /// Throws DomainError unless N >= 2 and every entry is finite and >= 0.
    void validate() const;
};

enum class InitialKind { PointMass, Uniform, Lognormal };

struct InitialCondition {
    InitialKind kind = InitialKind::PointMass;
    double value = 1.0;  // point mass location
    double low = 0.0;    // uniform support
    double high = 1.0;
    double mean = 1.0;   // lognormal mean
    double cv = 0.5;     // lognormal coefficient of variation
};

PopulationState make_initial_population(const InitialCondition& ic, std::size_t n,
                                        std::uint64_t seed);

enum class PolicyMode { Linear, Proportional, General };

std::string_view to_string(PolicyMode mode) noexcept;

/// Growth schedule applied on top of the kernel's noise law.
///
/// Linear: mean alpha_t x + beta_t from explicit schedules.
/// Proportional: beta_t = salary_fraction * mu_t with mu_t the current empirical mean.
/// General: mean gamma_t x + zeta_t(x), zeta recentred to zero empirical mean.
struct GrowthPolicy {
    PolicyMode mode = PolicyMode::Linear;
    std::function<double(std::uint64_t)> alpha_schedule;
    std::function<double(std::uint64_t)> beta_schedule;
    double salary_fraction = 0.0;
    /// gamma_t as a function of (t, mu_t).
    std::function<double(std::uint64_t, double)> gamma_general;
    /// zeta_t(x) as a function of (t, x, mu_t).
    std::function<double(std::uint64_t, double, double)> zeta;

    static GrowthPolicy linear(double alpha, double beta);
    static GrowthPolicy proportional(double alpha, double salary_fraction);
    static GrowthPolicy general(std::function<double(std::uint64_t, double)> gamma,
                                std::function<double(std::uint64_t, double, double)> zeta);
    /// General-mode rewrite of a linear policy: gamma = alpha + beta / mu,
    /// zeta(x) = beta (1 - x / mu).
    static GrowthPolicy adaptation(double alpha, double beta);
    /// General mode with a flat wealth tax: gamma = alpha, zeta(x) = rate (mu - x).
    static GrowthPolicy flat_tax(double alpha, double rate);
};

/// Growth coefficients realized for one step.
struct StepResolution {
    PolicyMode mode = PolicyMode::Linear;
    double mu = 0.0;     // empirical mean before the step
    double alpha = 0.0;  // Linear / Proportional
    double beta = 0.0;
    double gamma = 0.0;  // General
    std::vector<double> zeta;  // General, recentred, one per agent
};

/// Resolve the policy on the current ensemble. Throws DomainError for
/// alpha_t < 1 or beta_t < 0, SimulationError for a negative general-mode mean.
StepResolution resolve_step(const PopulationState& pop, const GrowthPolicy& policy);

/// Conditional mean of agent i under a resolved step.
double resolved_mean(const StepResolution& res, double x, std::size_t agent);

struct StepOutcome {
    PopulationState next;
    StepResolution resolution;
};

/// Advance one step. Agent i at time t draws from the stream keyed by
/// (master_seed, t, i), so the result is identical for any thread count.
StepOutcome step_detailed(const PopulationState& pop, const KernelSpec& kernel,
                          const GrowthPolicy& policy, std::uint64_t master_seed,
                          unsigned threads = 1);

PopulationState step(const PopulationState& pop, const KernelSpec& kernel,
                     const GrowthPolicy& policy, std::uint64_t master_seed, unsigned threads = 1);

/// mu_{t+1} = alpha mu_t + beta.
double mean_evolution(double mu, double alpha, double beta);

}  // namespace wealthdyn
