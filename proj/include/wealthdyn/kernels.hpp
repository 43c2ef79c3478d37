#pragma once

// Transition kernels w(x -> x') for one-body wealth dynamics.
//
// Every shipped family has the form x' = x * L + beta where the growth
// factor L has mean alpha and standard deviation gamma_disp. The
// conditional mean is therefore alpha * x + beta and the conditional
// variance is gamma_disp^2 * x^2, which saturates the dispersion
// condition with equality.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

#include "wealthdyn/random.hpp"

namespace wealthdyn {

enum class KernelFamily { Deterministic, LognormalMultiplicative, GammaMultiplicative };

std::string_view to_string(KernelFamily family) noexcept;
KernelFamily parse_family(std::string_view name);

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Immutable, validated kernel parameters.
class KernelSpec {
public:
    /// Throws DomainError on alpha < 1, beta < 0, gamma_disp < 0, a noisy
    /// deterministic kernel or a noiseless stochastic one.
    KernelSpec(KernelFamily family, double alpha, double beta, double gamma_disp,
               double delta_logx = kUnbounded, double delta_logxp = kUnbounded);

    static KernelSpec deterministic(double alpha, double beta) {
        return {KernelFamily::Deterministic, alpha, beta, 0.0};
    }
    static KernelSpec lognormal(double alpha, double beta, double gamma_disp) {
        return {KernelFamily::LognormalMultiplicative, alpha, beta, gamma_disp};
    }
    static KernelSpec gamma(double alpha, double beta, double gamma_disp) {
        return {KernelFamily::GammaMultiplicative, alpha, beta, gamma_disp};
    }

    KernelFamily family() const noexcept { return family_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double gamma_disp() const noexcept { return gamma_disp_; }
    /// Claimed bound on |d log w / d log x| (input side).
    double delta_logx() const noexcept { return delta_logx_; }
    /// Claimed bound on |d log w / d log x'| (output side).
    double delta_logxp() const noexcept { return delta_logxp_; }
    bool has_density() const noexcept { return family_ != KernelFamily::Deterministic; }

    /// Same family and dispersion, different growth coefficients.
    KernelSpec with_growth(double alpha, double beta) const;
    KernelSpec with_log_derivative_bounds(double delta_logx, double delta_logxp) const;

private:
    KernelFamily family_;
    double alpha_;
    double beta_;
    double gamma_disp_;
    double delta_logx_;
    double delta_logxp_;
};

/// Moment-matched parameters of the growth-factor law.
struct LognormalParams {
    double m;  // mean of log L
    double s;  // sd of log L
};
struct GammaParams {
    double shape;
    double scale;
};
LognormalParams lognormal_params(double mean, double sd);
GammaParams gamma_params(double mean, double sd);

/// Draw from `family` with the given mean and standard deviation
/// (a point mass at `mean` when sd == 0 or the family is deterministic).
double draw_with_moments(KernelFamily family, double mean, double sd, CounterStream& stream);

/// x' ~ w(x -> .). Throws DomainError for negative x.
double sample_transition(const KernelSpec& kernel, double x, CounterStream& stream);

double conditional_mean(const KernelSpec& kernel, double x);
double conditional_variance(const KernelSpec& kernel, double x);

/// Density of the growth factor L at u (no salary shift, no scaling).
double growth_factor_density(const KernelSpec& kernel, double u);
/// Quantile of the growth factor L.
double growth_factor_quantile(const KernelSpec& kernel, double p);
/// CDF of the growth factor L.
double growth_factor_cdf(const KernelSpec& kernel, double u);

/// w(x -> xp). Zero for xp <= beta.
/// Throws NoDensityError (deterministic) or DegenerateKernelError (x == 0).
double density(const KernelSpec& kernel, double x, double xp);

enum class LogDerivativeSide { Input, Output };

inline constexpr double kLogProbeStep = 1e-5;

/// d log w / d log x (Input) or d log w / d log x' (Output) by central
/// differences in log coordinates. Throws OutsideSupportError where w = 0.
double log_derivative_probe(const KernelSpec& kernel, double x, double xp, LogDerivativeSide which);

struct HighProbabilityMass {
    double mass = 0.0;       // fraction of draws with |probe| <= bound
    double undefined = 0.0;  // fraction of draws where the probe is undefined
};

/// Monte Carlo mass of x' ~ w(x -> .) on which the log-derivative stays within `bound`.
/// Draws come from a fixed stream, so the result is nondecreasing in `bound`.
HighProbabilityMass high_probability_mass(const KernelSpec& kernel, double x, double bound,
                                          LogDerivativeSide which, std::size_t n_samples,
                                          std::uint64_t seed = 0);

/// Smallest bound whose high-probability mass reaches `mass`
/// (the `mass` quantile of |probe| over the same draws).
double calibrate_log_derivative_bound(const KernelSpec& kernel, double x, double mass,
                                      LogDerivativeSide which, std::size_t n_samples,
                                      std::uint64_t seed = 0);

}  // namespace wealthdyn
