#include <doctest.h>

#include "wealthdyn/config.hpp"
#include "wealthdyn/error.hpp"

using namespace wealthdyn;

namespace {
std::string error_of(const std::string& text) {
    try {
        parse_config_string(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}
}  // namespace

TEST_CASE("minimal config takes defaults") {
    const auto cfg = parse_config_string(R"(
kernel:
  family: lognormal
  alpha: 1.02
  gamma_disp: 0.2
  beta: 0
population:
  n: 1000
simulation:
  steps: 100
  seed: 7
)");
    CHECK(cfg.n == 1000);
    CHECK(cfg.steps == 100);
    CHECK(cfg.seed == 7);
    CHECK(cfg.kappas == std::vector<double>{0.1, 0.25});
    CHECK(cfg.bounds.delta == 0.05);
    CHECK(cfg.policy.kind == PolicyKind::Linear);
    CHECK(cfg.kernel.alpha() == 1.02);
}

TEST_CASE("config errors name the field") {
    const auto low_alpha = error_of("kernel:\n  family: lognormal\n  alpha: 0.9\n  gamma_disp: 0.2\n");
    CHECK(low_alpha.find("alpha must be >= 1") != std::string::npos);
    CHECK(low_alpha.find("line 3") != std::string::npos);

    const auto typo = error_of("kernel:\n  family: lognormal\n  aplha: 1.02\n  gamma_disp: 0.2\n");
    CHECK(typo.find("aplha") != std::string::npos);

    CHECK(error_of("kernel: {family: lognormal, gamma_disp: 0.2}\nfoo: 1\n").find("foo") !=
          std::string::npos);
    CHECK(error_of("kernel: {family: pareto}\n").find("kernel.family") != std::string::npos);
    CHECK(error_of("kernel: {family: lognormal, gamma_disp: 0.2, beta: 1}\npolicy: {mode: proportional}\n") !=
          "");
    CHECK(error_of("kernel: {family: lognormal, gamma_disp: 0.2}\nmetrics: {kappa: [0.6]}\n") != "");
    CHECK(error_of("kernel: {family: lognormal, gamma_disp: 0.2}\npopulation: {n: many}\n") != "");
    CHECK(error_of("population: {n: 10}\n").find("kernel") != std::string::npos);
}

TEST_CASE("log-derivative sources") {
    const auto gd = parse_config_string(
        "kernel: {family: lognormal, alpha: 1.0, gamma_disp: 0.2}\nbounds: {gamma_inv_logderiv: gamma_disp}\n");
    CHECK(gd.bound_params(0.25).gamma_inv_logderiv == 0.2);
    CHECK(*gd.bound_params(0.25).epsilon == doctest::Approx(0.05 / 0.2));

    const auto num = parse_config_string(
        "kernel: {family: lognormal, alpha: 1.0, gamma_disp: 0.2}\nbounds: {gamma_inv_logderiv: 0.5}\n");
    CHECK(num.bound_params(0.1).gamma_inv_logderiv == 0.5);

    const auto claimed = parse_config_string(
        "kernel: {family: lognormal, alpha: 1.0, gamma_disp: 0.2, delta_logx: 4, delta_logxp: 5}\n"
        "bounds: {gamma_inv_logderiv: claimed}\n");
    CHECK(claimed.bound_params(0.1).gamma_inv_logderiv == doctest::Approx(0.2));
    CHECK(*claimed.bound_params(0.1).epsilon == doctest::Approx(0.25));

    const auto cal = parse_config_string("kernel: {family: lognormal, alpha: 1.0, gamma_disp: 0.2}\n");
    const auto c = cal.log_derivative_constants();
    CHECK(c.gamma > 0.0);
    CHECK(c.epsilon.has_value());

    // delta * Delta >= 1 is rejected when the file is read.
    CHECK(error_of("kernel: {family: lognormal, gamma_disp: 0.2}\nbounds: {delta: 0.1, gamma_inv_logderiv: 0.05}\n") != "");
}

TEST_CASE("shipped configs parse") {
    for (const char* name : {"saturation", "constant_salary", "proportional", "threshold_search",
                             "appendix", "deterministic", "adaptation", "flat_tax"}) {
        CAPTURE(name);
        CHECK_NOTHROW(parse_config(std::string(WEALTHDYN_CONFIGS) + "/" + name + ".yaml"));
    }
}
