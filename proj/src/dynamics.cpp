#include "wealthdyn/dynamics.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include "wealthdyn/error.hpp"
#include "wealthdyn/metrics.hpp"
#include "wealthdyn/parallel.hpp"

namespace wealthdyn {

void PopulationState::validate() const {
    if (wealth.size() < 2) throw DomainError("population needs at least 2 agents");
    for (std::size_t i = 0; i < wealth.size(); ++i) {
        if (!std::isfinite(wealth[i]) || wealth[i] < 0.0) {
            std::ostringstream msg;
            msg << "agent " << i << " has invalid wealth " << wealth[i];
            throw DomainError(msg.str());
        }
    }
}

PopulationState make_initial_population(const InitialCondition& ic, std::size_t n,
                                        std::uint64_t seed) {
    PopulationState pop;
    pop.wealth.resize(n);
    switch (ic.kind) {
        case InitialKind::PointMass:
            if (!(ic.value > 0.0)) throw DomainError("point-mass initial wealth must be > 0");
            std::fill(pop.wealth.begin(), pop.wealth.end(), ic.value);
            break;
        case InitialKind::Uniform:
            if (!(ic.low >= 0.0 && ic.high > ic.low))
                throw DomainError("uniform initial condition needs 0 <= low < high");
            for (std::size_t i = 0; i < n; ++i) {
                CounterStream stream(seed, StreamDomain::Initial, 0, i);
                pop.wealth[i] = ic.low + (ic.high - ic.low) * stream.uniform();
            }
            break;
        case InitialKind::Lognormal: {
            if (!(ic.mean > 0.0 && ic.cv >= 0.0))
                throw DomainError("lognormal initial condition needs mean > 0 and cv >= 0");
            for (std::size_t i = 0; i < n; ++i) {
                CounterStream stream(seed, StreamDomain::Initial, 0, i);
                pop.wealth[i] = draw_with_moments(KernelFamily::LognormalMultiplicative, ic.mean,
                                                  ic.cv * ic.mean, stream);
            }
            break;
        }
    }
    pop.validate();
    return pop;
}

std::string_view to_string(PolicyMode mode) noexcept {
    switch (mode) {
        case PolicyMode::Linear: return "linear";
        case PolicyMode::Proportional: return "proportional";
        case PolicyMode::General: return "general";
    }
    return "unknown";
}

GrowthPolicy GrowthPolicy::linear(double alpha, double beta) {
    GrowthPolicy p;
    p.mode = PolicyMode::Linear;
    p.alpha_schedule = [alpha](std::uint64_t) { return alpha; };
    p.beta_schedule = [beta](std::uint64_t) { return beta; };
    return p;
}

GrowthPolicy GrowthPolicy::proportional(double alpha, double salary_fraction) {
    if (!(salary_fraction >= 0.0)) throw DomainError("salary fraction must be >= 0");
    GrowthPolicy p;
    p.mode = PolicyMode::Proportional;
    p.alpha_schedule = [alpha](std::uint64_t) { return alpha; };
    p.salary_fraction = salary_fraction;
    return p;
}

GrowthPolicy GrowthPolicy::general(std::function<double(std::uint64_t, double)> gamma,
                                   std::function<double(std::uint64_t, double, double)> zeta) {
    GrowthPolicy p;
    p.mode = PolicyMode::General;
    p.gamma_general = std::move(gamma);
    p.zeta = std::move(zeta);
    return p;
}

GrowthPolicy GrowthPolicy::adaptation(double alpha, double beta) {
    return general([alpha, beta](std::uint64_t, double mu) { return alpha + beta / mu; },
                   [beta](std::uint64_t, double x, double mu) { return beta * (1.0 - x / mu); });
}

GrowthPolicy GrowthPolicy::flat_tax(double alpha, double rate) {
    return general([alpha](std::uint64_t, double) { return alpha; },
                   [rate](std::uint64_t, double x, double mu) { return rate * (mu - x); });
}

StepResolution resolve_step(const PopulationState& pop, const GrowthPolicy& policy) {
    StepResolution res;
    res.mode = policy.mode;
    res.mu = mean(pop.wealth);
    switch (policy.mode) {
        case PolicyMode::Linear:
            res.alpha = policy.alpha_schedule(pop.t);
            res.beta = policy.beta_schedule(pop.t);
            break;
        case PolicyMode::Proportional:
            res.alpha = policy.alpha_schedule(pop.t);
            res.beta = policy.salary_fraction * res.mu;
            break;
        case PolicyMode::General: {
            if (!(res.mu > 0.0)) throw DomainError("general mode needs a positive mean");
            res.gamma = policy.gamma_general(pop.t, res.mu);
            res.zeta.resize(pop.size());
            for (std::size_t i = 0; i < pop.size(); ++i)
                res.zeta[i] = policy.zeta(pop.t, pop.wealth[i], res.mu);
            const double offset = mean(res.zeta);
            for (double& z : res.zeta) z -= offset;
            for (std::size_t i = 0; i < pop.size(); ++i) {
                const double m = resolved_mean(res, pop.wealth[i], i);
                if (m < 0.0) {
                    std::ostringstream msg;
                    msg << "agent " << i << " has negative conditional mean " << m
                        << " (wealth " << pop.wealth[i] << ")";
                    throw SimulationError(msg.str(), i, m);
                }
            }
            return res;
        }
    }
    if (!(res.alpha >= 1.0)) throw DomainError("alpha_t must be >= 1");
    if (!(res.beta >= 0.0)) throw DomainError("beta_t must be >= 0");
    return res;
}

double resolved_mean(const StepResolution& res, double x, std::size_t agent) {
    if (res.mode == PolicyMode::General) return res.gamma * x + res.zeta[agent];
    return res.alpha * x + res.beta;
}

StepOutcome step_detailed(const PopulationState& pop, const KernelSpec& kernel,
                          const GrowthPolicy& policy, std::uint64_t master_seed,
                          unsigned threads) {
    StepOutcome out;
    out.resolution = resolve_step(pop, policy);
    const StepResolution& res = out.resolution;
    out.next.t = pop.t + 1;
    out.next.wealth.resize(pop.size());
    const std::uint64_t t = pop.t;

    if (res.mode == PolicyMode::General) {
        parallel_for(pop.size(), threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                CounterStream stream(master_seed, StreamDomain::Transition, t, i);
                const double x = pop.wealth[i];
                out.next.wealth[i] = draw_with_moments(kernel.family(), resolved_mean(res, x, i),
                                                       kernel.gamma_disp() * x, stream);
            }
        });
    } else {
        const KernelSpec k = kernel.with_growth(res.alpha, res.beta);
        parallel_for(pop.size(), threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                CounterStream stream(master_seed, StreamDomain::Transition, t, i);
                out.next.wealth[i] = sample_transition(k, pop.wealth[i], stream);
            }
        });
    }
    return out;
}

PopulationState step(const PopulationState& pop, const KernelSpec& kernel,
                     const GrowthPolicy& policy, std::uint64_t master_seed, unsigned threads) {
    return step_detailed(pop, kernel, policy, master_seed, threads).next;
}

double mean_evolution(double mu, double alpha, double beta) { return alpha * mu + beta; }

}  // namespace wealthdyn
