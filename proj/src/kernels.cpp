#include "wealthdyn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>

#include "wealthdyn/error.hpp"

namespace wealthdyn {

std::string_view to_string(KernelFamily family) noexcept {
    switch (family) {
        case KernelFamily::Deterministic: return "deterministic";
        case KernelFamily::LognormalMultiplicative: return "lognormal";
        case KernelFamily::GammaMultiplicative: return "gamma";
    }
    return "unknown";
}

KernelFamily parse_family(std::string_view name) {
    if (name == "deterministic") return KernelFamily::Deterministic;
    if (name == "lognormal") return KernelFamily::LognormalMultiplicative;
    if (name == "gamma") return KernelFamily::GammaMultiplicative;
    throw DomainError("unknown kernel family '" + std::string(name) +
                      "' (expected deterministic, lognormal or gamma)");
}

KernelSpec::KernelSpec(KernelFamily family, double alpha, double beta, double gamma_disp,
                       double delta_logx, double delta_logxp)
    : family_(family),
      alpha_(alpha),
      beta_(beta),
      gamma_disp_(gamma_disp),
      delta_logx_(delta_logx),
      delta_logxp_(delta_logxp) {
    if (!std::isfinite(alpha) || alpha < 1.0) throw DomainError("alpha must be >= 1");
    if (!std::isfinite(beta) || beta < 0.0) throw DomainError("beta must be >= 0");
    if (!std::isfinite(gamma_disp) || gamma_disp < 0.0)
        throw DomainError("gamma_disp must be >= 0");
    if (family == KernelFamily::Deterministic && gamma_disp != 0.0)
        throw DomainError("deterministic kernel requires gamma_disp = 0");
    if (family != KernelFamily::Deterministic && gamma_disp == 0.0)
        throw DomainError("stochastic kernel requires gamma_disp > 0");
    if (!(delta_logx > 0.0) || !(delta_logxp > 0.0))
        throw DomainError("log-derivative bounds must be positive");
}

KernelSpec KernelSpec::with_growth(double alpha, double beta) const {
    return {family_, alpha, beta, gamma_disp_, delta_logx_, delta_logxp_};
}

KernelSpec KernelSpec::with_log_derivative_bounds(double delta_logx, double delta_logxp) const {
    return {family_, alpha_, beta_, gamma_disp_, delta_logx, delta_logxp};
}

LognormalParams lognormal_params(double mean, double sd) {
    const double s2 = std::log1p((sd * sd) / (mean * mean));
    return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

GammaParams gamma_params(double mean, double sd) {
    const double var = sd * sd;
    return {mean * mean / var, var / mean};
}

double draw_with_moments(KernelFamily family, double mean, double sd, CounterStream& stream) {
    if (family == KernelFamily::Deterministic || sd == 0.0 || mean == 0.0) return mean;
    if (family == KernelFamily::LognormalMultiplicative) {
        const auto p = lognormal_params(mean, sd);
        std::normal_distribution<double> normal(p.m, p.s);
        return std::exp(normal(stream));
    }
    const auto p = gamma_params(mean, sd);
    std::gamma_distribution<double> gamma(p.shape, p.scale);
    return gamma(stream);
}

double sample_transition(const KernelSpec& kernel, double x, CounterStream& stream) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("wealth must be finite and >= 0");
    if (x == 0.0) return kernel.beta();
    return x * draw_with_moments(kernel.family(), kernel.alpha(), kernel.gamma_disp(), stream) +
           kernel.beta();
}

double conditional_mean(const KernelSpec& kernel, double x) {
    return kernel.alpha() * x + kernel.beta();
}

double conditional_variance(const KernelSpec& kernel, double x) {
    const double sd = kernel.gamma_disp() * x;
    return sd * sd;
}

double growth_factor_density(const KernelSpec& kernel, double u) {
    if (!kernel.has_density()) throw NoDensityError();
    if (!(u > 0.0)) return 0.0;
    if (kernel.family() == KernelFamily::LognormalMultiplicative) {
        const auto p = lognormal_params(kernel.alpha(), kernel.gamma_disp());
        const double z = (std::log(u) - p.m) / p.s;
        return std::exp(-0.5 * z * z) / (u * p.s * std::sqrt(2.0 * std::numbers::pi));
    }
    const auto p = gamma_params(kernel.alpha(), kernel.gamma_disp());
    return std::exp((p.shape - 1.0) * std::log(u) - u / p.scale - std::lgamma(p.shape) -
                    p.shape * std::log(p.scale));
}

double growth_factor_quantile(const KernelSpec& kernel, double prob) {
    if (!kernel.has_density()) return kernel.alpha();
    if (kernel.family() == KernelFamily::LognormalMultiplicative) {
        const auto p = lognormal_params(kernel.alpha(), kernel.gamma_disp());
        return boost::math::quantile(boost::math::lognormal_distribution<double>(p.m, p.s), prob);
    }
    const auto p = gamma_params(kernel.alpha(), kernel.gamma_disp());
    return boost::math::quantile(boost::math::gamma_distribution<double>(p.shape, p.scale), prob);
}

double growth_factor_cdf(const KernelSpec& kernel, double u) {
    if (!kernel.has_density()) return u >= kernel.alpha() ? 1.0 : 0.0;
    if (!(u > 0.0)) return 0.0;
    if (kernel.family() == KernelFamily::LognormalMultiplicative) {
        const auto p = lognormal_params(kernel.alpha(), kernel.gamma_disp());
        return boost::math::cdf(boost::math::lognormal_distribution<double>(p.m, p.s), u);
    }
    const auto p = gamma_params(kernel.alpha(), kernel.gamma_disp());
    return boost::math::cdf(boost::math::gamma_distribution<double>(p.shape, p.scale), u);
}

double density(const KernelSpec& kernel, double x, double xp) {
    if (!kernel.has_density()) throw NoDensityError();
    if (!(x >= 0.0)) throw DomainError("wealth must be >= 0");
    if (x == 0.0) throw DegenerateKernelError(kernel.beta());
    const double u = (xp - kernel.beta()) / x;
    if (!(u > 0.0)) return 0.0;
    return growth_factor_density(kernel, u) / x;
}

namespace {

double log_density_or_throw(const KernelSpec& kernel, double x, double xp) {
    const double w = density(kernel, x, xp);
    if (!(w > 0.0)) throw OutsideSupportError();
    return std::log(w);
}

}  // namespace

double log_derivative_probe(const KernelSpec& kernel, double x, double xp, LogDerivativeSide which) {
    log_density_or_throw(kernel, x, xp);
    const double up = std::exp(kLogProbeStep);
    const double down = std::exp(-kLogProbeStep);
    double hi = 0.0;
    double lo = 0.0;
    if (which == LogDerivativeSide::Input) {
        hi = log_density_or_throw(kernel, x * up, xp);
        lo = log_density_or_throw(kernel, x * down, xp);
    } else {
        hi = log_density_or_throw(kernel, x, xp * up);
        lo = log_density_or_throw(kernel, x, xp * down);
    }
    return (hi - lo) / (2.0 * kLogProbeStep);
}

namespace {

// |probe| at each draw; +inf marks an undefined probe.
std::vector<double> probe_magnitudes(const KernelSpec& kernel, double x, LogDerivativeSide which,
                                     std::size_t n_samples, std::uint64_t seed) {
    if (!kernel.has_density()) throw NoDensityError();
    if (n_samples < 1000) throw DomainError("high-probability mass needs at least 1000 samples");
    if (x == 0.0) throw DegenerateKernelError(kernel.beta());
    CounterStream stream(seed, StreamDomain::KernelProbe, 0, 0);
    std::vector<double> out;
    out.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double xp = sample_transition(kernel, x, stream);
        try {
            out.push_back(std::abs(log_derivative_probe(kernel, x, xp, which)));
        } catch (const OutsideSupportError&) {
            out.push_back(kUnbounded);
        }
    }
    return out;
}

}  // namespace

HighProbabilityMass high_probability_mass(const KernelSpec& kernel, double x, double bound,
                                          LogDerivativeSide which, std::size_t n_samples,
                                          std::uint64_t seed) {
    const auto mags = probe_magnitudes(kernel, x, which, n_samples, seed);
    std::size_t inside = 0;
    std::size_t undefined = 0;
    for (double m : mags) {
        if (std::isinf(m)) {
            ++undefined;
        } else if (m <= bound) {
            ++inside;
        }
    }
    const double n = static_cast<double>(mags.size());
    return {static_cast<double>(inside) / n, static_cast<double>(undefined) / n};
}

double calibrate_log_derivative_bound(const KernelSpec& kernel, double x, double mass,
                                      LogDerivativeSide which, std::size_t n_samples,
                                      std::uint64_t seed) {
    if (!(mass > 0.0 && mass <= 1.0)) throw DomainError("mass must lie in (0, 1]");
    auto mags = probe_magnitudes(kernel, x, which, n_samples, seed);
    const auto k = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(mags.size())));
    const auto nth = mags.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(k, 1) - 1);
    std::nth_element(mags.begin(), nth, mags.end());
    return *nth;
}

}  // namespace wealthdyn
