#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "wealthdyn/appendix.hpp"
#include "wealthdyn/error.hpp"
#include "wealthdyn/random.hpp"

using namespace wealthdyn;
using doctest::Approx;

TEST_CASE("pair integral needs a density") {
    CHECK_THROWS_AS(pair_split_integral(KernelSpec::deterministic(1.0, 0.0), 1.0, 1.0),
                    NoDensityError);
    CHECK_THROWS_AS(pair_split_integral(KernelSpec::lognormal(1.0, 0.0, 0.2), 0.0, 1.0), DomainError);
}

TEST_CASE("diagonal pair integral against Monte Carlo") {
    const auto k = KernelSpec::lognormal(1.02, 0.5, 0.2);
    const double x = 2.0;
    const double f = pair_split_integral(k, x, x).value;
    CounterStream s(99, StreamDomain::PairSampling, 0, 0);
    const int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = 0.5 * std::abs(sample_transition(k, x, s) - sample_transition(k, x, s));
        sum += d;
        sum2 += d * d;
    }
    const double m = sum / n;
    const double se = std::sqrt((sum2 / n - m * m) / n);
    CHECK(std::abs(f - m) < 3.0 * se);
}

TEST_CASE("near-normal kernel diagonal") {
    const auto k = KernelSpec::lognormal(1.0, 0.0, 0.02);
    const double x = 5.0;
    const double approx = 0.02 * x / std::sqrt(M_PI);
    CHECK(std::abs(pair_split_integral(k, x, x).value / approx - 1.0) < 0.05);
}

TEST_CASE("pair integral splits the full expectation") {
    const auto k = KernelSpec::gamma(1.02, 0.2, 0.25);
    for (auto [x, y] : {std::pair{1.0, 1.0}, std::pair{1.0, 1.7}, std::pair{10.0, 3.0}}) {
        const double full = expected_abs_difference(k, x, y);
        const double sum = pair_split_integral(k, x, y).value + pair_split_integral(k, y, x).value;
        CHECK(std::abs(sum - full) < 1e-6 * (1.02 * std::max(x, y) + 0.2));
    }
    const double diag = pair_split_integral(k, 4.0, 4.0).value;
    CHECK(std::abs(diag - 0.5 * expected_abs_difference(k, 4.0, 4.0)) < 1e-6 * 4.3);
}

TEST_CASE("diagonal bound") {
    const std::vector<double> xs{1.0, 10.0, 100.0};
    const auto lognormal = KernelSpec::lognormal(1.0, 0.0, 0.2);
    const auto zero = diagonal_bound_check(lognormal, xs, 0.0);
    CHECK(zero.satisfied);
    for (const auto& r : zero.rows) CHECK(r.slack_x == Approx(r.f_diag));

    const auto g = KernelSpec::gamma(1.0, 0.0, 0.2);
    const auto cal = calibrate_log_derivative_bounds(g);
    const auto rep = diagonal_bound_check(g, xs, cal.gamma());
    CHECK(rep.satisfied);
    for (const auto& r : rep.rows) CHECK(r.slack_x > 1e-6);

    // Degree-1 homogeneity of F for salary-free kernels.
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const double scale = rep.rows[i].x / rep.rows[0].x;
        CHECK(std::abs(rep.rows[i].slack_x / scale / rep.rows[0].slack_x - 1.0) < 1e-3);
    }
}

TEST_CASE("extremal functional closed form") {
    CHECK(extremal_y_closed_form(1.0, 0.01) == Approx(0.020000333335).epsilon(1e-12));
    for (double a : {0.5, 1.0, 10.0}) {
        for (double d : {0.001, 0.01, 0.05}) {
            const double y = y_functional(DensityOnRay::extremal(a), a, d, Cutoff::Ignore);
            CHECK(std::abs(y / extremal_y_closed_form(a, d) - 1.0) < 1e-9);
        }
    }
    // (Y / 2 a delta) - 1 shrinks like delta^2.
    std::vector<double> dev;
    for (double d : {0.1, 0.01, 0.001})
        dev.push_back(y_functional(DensityOnRay::extremal(1.0), 1.0, d, Cutoff::Ignore) / (2 * d) - 1.0);
    CHECK(dev[0] > dev[1]);
    CHECK(dev[1] > dev[2]);
    CHECK(dev[0] / dev[1] == Approx(100.0).epsilon(0.01));
}

TEST_CASE("y functional edge cases") {
    CHECK(y_functional(DensityOnRay::truncated_pareto(1.0, 1.5), 1.0, 0.0) == 0.0);
    // A bump much narrower than the window pairs entirely with itself.
    const double x0 = 5.0, w = 5e-4;
    const auto bump = DensityOnRay::grid({x0 - w, x0, x0 + w}, {0.0, 1.0 / w, 0.0});
    CHECK(y_functional(bump, 1.0, 0.01) == Approx(x0).epsilon(1e-3));
    const auto unnormalized = DensityOnRay::grid({1.0, 2.0}, {1.0, 1.0});
    CHECK_NOTHROW(y_functional(unnormalized, 1.0, 0.01));
    const auto heavy = DensityOnRay::grid({1.0, 2.0}, {2.0, 2.0});
    CHECK_THROWS_AS(y_functional(heavy, 1.0, 0.01), DomainError);
}

TEST_CASE("truncated pareto with c = 1 against hand integration") {
    const double a = 1.0, b = 1e6, d = 0.01;
    const double k = 1.0 / (1.0 - a / b);
    const double hand = k * k * a * a *
                        ((d + 1.0 - std::exp(-d)) / a + (1.0 - std::exp(d) - d) / b);
    const double y = y_functional(DensityOnRay::truncated_pareto(a, 1.0, b), a, d);
    CHECK(y == Approx(hand).epsilon(1e-8));
}

TEST_CASE("minimality checks") {
    const auto pareto = pareto_minimality_check(1.0, 0.01);
    CHECK(pareto.passed);
    REQUIRE(pareto.trials.size() == 3);
    for (const auto& t : pareto.trials) CHECK(t.y >= 0.02000033 * 0.95);

    const auto none = extremal_minimality_check(1.0, 0.01, 0);
    CHECK(none.trials.empty());
    CHECK(none.passed);

    const auto random = extremal_minimality_check(1.0, 0.01, 5, 3);
    CHECK(random.passed);

    const std::vector<DensityOnRay> self{DensityOnRay::extremal(1.0)};
    const std::vector<std::string> labels{"extremal"};
    const auto own = minimality_check_on(1.0, 0.01, self, labels);
    REQUIRE(own.trials.size() == 1);
    CHECK(own.trials[0].y == Approx(own.y_extremal_respected).epsilon(1e-9));
}

TEST_CASE("main inequality hypotheses") {
    PopulationState pop;
    pop.wealth = {1.0, 2.0, 3.0, 4.0};
    BoundParams p;
    p.gamma_inv_logderiv = 0.1;
    p.epsilon = 0.1;
    const auto det = main_inequality_check(pop, KernelSpec::deterministic(1.0, 0.0), p, 10);
    CHECK_FALSE(det.hypotheses_met);

    const auto ok = main_inequality_check(pop, KernelSpec::lognormal(1.0, 0.0, 0.2), p, 200, 4);
    CHECK(ok.hypotheses_met);
    CHECK(ok.pairs_used == 200);
    CHECK(ok.tail_prob == 1.0);
    CHECK(ok.rhs == Approx(0.05 * 0.25 * 2.5 * 0.1 * 0.9));
    CHECK(ok.satisfied);
}

TEST_CASE("main inequality estimate against the exact pair sum") {
    const auto k = KernelSpec::lognormal(1.02, 0.1, 0.2);
    PopulationState pop;
    CounterStream s(12, StreamDomain::Initial, 0, 0);
    for (int i = 0; i < 40; ++i) pop.wealth.push_back(std::exp(3.0 * (s.uniform() - 0.3)));
    pop.wealth.push_back(0.0);
    double exact = 0.0;
    for (double x : pop.wealth) {
        for (double y : pop.wealth) {
            if (std::min(x, y) > 0.0) exact += pair_split_integral(k, std::max(x, y), std::min(x, y)).value;
        }
    }
    exact /= static_cast<double>(pop.size() * pop.size());
    BoundParams p;
    p.gamma_inv_logderiv = 0.1;
    p.epsilon = 0.1;
    const auto r = main_inequality_check(pop, k, p, 4000, 9);
    CHECK(std::abs(r.mean_f - exact) < 3.0 * r.standard_error);
    CHECK(r.standard_error < 0.05 * exact);
}

TEST_CASE("density propagation") {
    const auto k = KernelSpec::lognormal(1.0, 0.0, 0.2);
    const double bound = calibrate_log_derivative_bound(k, 1.0, 0.99, LogDerivativeSide::Output, 200000);
    PopulationState single;
    single.wealth = {1.0, 1.0};
    const auto grid = log_grid(0.2, 5.0, 4000);
    const auto one = density_log_derivative_propagation(single, k, grid, 1.0 / bound);
    CHECK(one.satisfied);
    CHECK(one.quantile_abs_log_derivative == Approx(bound).epsilon(0.01));

    PopulationState two;
    two.wealth = {1.0, 1000.0};
    const auto wide = log_grid(0.2, 5000.0, 8000);
    CHECK(density_log_derivative_propagation(two, k, wide, 1.0 / bound).satisfied);

    CHECK_THROWS_AS(density_log_derivative_propagation(single, KernelSpec::deterministic(1.0, 0.0),
                                                       grid, 1.0),
                    NoDensityError);
    const auto coarse = log_grid(0.2, 5.0, 20);
    CHECK_THROWS_AS(density_log_derivative_propagation(single, k, coarse, 1.0 / bound), DomainError);
}
