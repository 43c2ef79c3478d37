#include <doctest.h>

#include <cmath>

#include "wealthdyn/bounds.hpp"
#include "wealthdyn/error.hpp"
#include "wealthdyn/kernels.hpp"
#include "wealthdyn/random.hpp"

using namespace wealthdyn;
using doctest::Approx;

namespace {
BoundParams params(double delta, double kappa, double gamma) {
    BoundParams p;
    p.delta_stripe = delta;
    p.kappa = kappa;
    p.gamma_inv_logderiv = gamma;
    return p;
}
}  // namespace

TEST_CASE("cv growth lower bound") {
    const double cv = 1.3, a = 1.02, g = 0.2;
    CHECK(cv_growth_lower_bound(cv, a, 0.0, 5.0, g) ==
          Approx((1 + g * g / (a * a)) * cv * cv + g * g / (a * a)));
    CHECK(cv_growth_lower_bound(cv, a, 0.0, 5.0, g) > cv * cv);
    CHECK(cv_growth_lower_bound(cv, a, 0.0, 5.0, 0.0) == Approx(cv * cv));
    CHECK(cv_growth_lower_bound(1.0, 1.0, 0.1, 1.0, 0.1) == Approx(1.02 / 1.21).epsilon(1e-12));
}

TEST_CASE("cv halting condition") {
    const auto r = cv_halting_condition(2.0, 1.02, 0.0, 5.0, 0.2);
    CHECK_FALSE(r.satisfied);
    CHECK(r.slack == Approx(-(0.04 / (1.02 * 1.02)) * (1 + 0.25)));
    CHECK_FALSE(cv_halting_condition(0.0, 1.0, 5.0, 1.0, 0.1).satisfied);
    CHECK(cv_halting_condition(0.7, 1.0, 0.0, 1.0, 0.0).satisfied);
    CHECK(cv_halting_condition(0.7, 1.0, 3.0, 1.0, 0.0).satisfied);
    const double b = min_salary_exact(1.0, 1.0, 1.0, 0.1);
    CHECK(b == Approx(std::sqrt(1.02) - 1.0).epsilon(1e-12));
    CHECK(cv_halting_condition(1.0, 1.0, b * (1 + 1e-9), 1.0, 0.1).satisfied);
    CHECK_FALSE(cv_halting_condition(1.0, 1.0, b * (1 - 1e-9), 1.0, 0.1).satisfied);
}

TEST_CASE("small gamma salary threshold") {
    CHECK(min_salary_small_gamma(1.0, 1.0, 100.0, 0.1).value == Approx(1.0));
    CHECK_FALSE(min_salary_small_gamma(1.0, 1.0, 100.0, 0.1).outside_regime);
    CHECK(min_salary_small_gamma(1.0, 1.0, 100.0, 0.0).value == 0.0);
    CHECK(min_salary_small_gamma(1e8, 1.0, 100.0, 0.1).value == Approx(0.5));
    CHECK(min_salary_small_gamma(0.5, 1.0, 100.0, 0.1).outside_regime);
}

TEST_CASE("gini growth bounds") {
    const auto p = params(0.05, 0.25, 5.0);
    CHECK(gini_growth_lower_bound(0.5, 1.0, 10.0, 11.0, p, 0.4) ==
          Approx(-0.4 / 11.0).epsilon(1e-12));
    CHECK(gini_growth_lower_bound(0.5, 0.0, 10.0, 11.0, p, 0.4) >= 0.0);
    CHECK(gini_growth_lower_bound(0.5, 1.0, 10.0, 11.0, p, 0.0) == Approx(-0.5 / 11.0));
    CHECK(gini_halting_tail_bound(0.5, 0.2, 10.0, p) == Approx(0.4).epsilon(1e-12));
    CHECK(gini_halting_tail_bound(0.5, 0.0, 10.0, p) == 0.0);
    CHECK(gini_halting_tail_bound(0.9, 1e6, 10.0, p) == 1.0);
}

TEST_CASE("saturation chain") {
    CHECK(saturation_lower_bound(0.8, 0.25) == Approx(0.4));
    CHECK(saturation_lower_bound(0.0, 0.25) == 0.0);
    CHECK(saturation_lower_bound(1.0, 1e-12) == Approx(1.0));
}

TEST_CASE("general mode conditions") {
    CHECK_FALSE(general_cv_condition(1.0, 10.0, 0.5, 0.0, 0.0, 0.2).satisfied);
    const auto zero = general_cv_condition(1.0, 10.0, 0.5, 0.0, 0.0, 0.0);
    CHECK(zero.satisfied);
    CHECK(zero.slack == 0.0);

    const auto a = adaptation_substitution(1.05, 2.0, 10.0, 0.5);
    CHECK(a.gamma_t == Approx(1.25));
    CHECK(a.var_zeta == Approx(1.0));
    CHECK(a.cov_x_zeta == Approx(-5.0));
    const auto none = adaptation_substitution(1.05, 0.0, 10.0, 0.5);
    CHECK(none.gamma_t == 1.05);
    CHECK(none.var_zeta == 0.0);
    CHECK(none.cov_x_zeta == 0.0);

    CHECK(zeta_variability_lower_bound(params(0.05, 0.25, 5.0), 10.0, 0.4) == Approx(0.1));
    CHECK(zeta_variability_lower_bound(params(0.05, 0.25, 5.0), 10.0, 0.0) == 0.0);
}

TEST_CASE("adaptation equivalence over random tuples") {
    CounterStream s(8, StreamDomain::KernelProbe, 0, 0);
    for (int i = 0; i < 1000; ++i) {
        const double alpha = 1.0 + 0.2 * s.uniform();
        const double beta = 5.0 * s.uniform();
        const double mu = 0.1 + 100.0 * s.uniform();
        const double cv = 0.05 + 5.0 * s.uniform();
        const double g = 0.5 * s.uniform();
        const auto e = adaptation_equivalence(alpha, beta, mu, cv, g);
        CHECK(e.relative_gap <= 1e-10);
        CHECK(e.agree);
    }
}

TEST_CASE("zeta moments of the adaptation term") {
    const std::vector<double> w{1, 2, 3, 6};
    const double mu = 3.0, beta = 2.0;
    std::vector<double> z;
    for (double x : w) z.push_back(beta * (1.0 - x / mu));
    const auto m = zeta_moments(w, z);
    const double cv2 = (4.0 + 1.0 + 0.0 + 9.0) / 4.0 / 9.0;
    CHECK(m.var_zeta == Approx(beta * beta * cv2));
    CHECK(m.cov_x_zeta == Approx(-beta * mu * cv2));
}

TEST_CASE("bound parameter validation") {
    CHECK_THROWS_AS(params(0.05, 0.5, 1.0).validate(), DomainError);
    auto p = params(0.05, 0.25, 1.0);
    p.epsilon = 1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.epsilon = 0.05 * 4.0;
    CHECK_NOTHROW(p.check_epsilon_consistency(4.0, 3.0));
    CHECK_THROWS_AS(p.check_epsilon_consistency(5.0, 3.0), DomainError);
    CHECK(*epsilon_from_bounds(0.05, 4.0, 6.0) == Approx(0.3));
    CHECK_FALSE(epsilon_from_bounds(0.05, kUnbounded, 6.0).has_value());
}

TEST_CASE("records within tolerance") {
    const auto r = make_record("x", 1.0, 1.0 + 1e-9, true, true, 1e-8);
    CHECK_FALSE(r.satisfied);
    CHECK(r.within_tolerance());
    CHECK(r.slack == Approx(-1e-9));
}
