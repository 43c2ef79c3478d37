#include "wealthdyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "wealthdyn/appendix.hpp"
#include "wealthdyn/error.hpp"

namespace wealthdyn {

std::string_view to_string(PolicyKind kind) noexcept {
    switch (kind) {
        case PolicyKind::Linear: return "linear";
        case PolicyKind::Proportional: return "proportional";
        case PolicyKind::Adaptation: return "adaptation";
        case PolicyKind::FlatTax: return "flat_tax";
    }
    return "?";
}

GrowthPolicy RunConfig::growth_policy() const {
    switch (policy.kind) {
        case PolicyKind::Linear: return GrowthPolicy::linear(kernel.alpha(), kernel.beta());
        case PolicyKind::Proportional:
            return GrowthPolicy::proportional(kernel.alpha(), policy.salary_fraction);
        case PolicyKind::Adaptation: return GrowthPolicy::adaptation(kernel.alpha(), kernel.beta());
        case PolicyKind::FlatTax: return GrowthPolicy::flat_tax(kernel.alpha(), policy.tax_rate);
    }
    throw DomainError("unknown policy");
}

RunConfig::LogDerivConstants RunConfig::log_derivative_constants() const {
    if (cached_constants_) return *cached_constants_;
    LogDerivConstants out;
    switch (bounds.source) {
        case LogDerivSource::Explicit:
            out.gamma = bounds.gamma_inv_logderiv;
            out.delta_logx = out.delta_logxp = out.gamma > 0.0 ? 1.0 / out.gamma : kUnbounded;
            break;
        case LogDerivSource::GammaDisp:
            out.gamma = kernel.gamma_disp();
            out.delta_logx = out.delta_logxp = out.gamma > 0.0 ? 1.0 / out.gamma : kUnbounded;
            break;
        case LogDerivSource::Claimed:
            out.delta_logx = kernel.delta_logx();
            out.delta_logxp = kernel.delta_logxp();
            out.gamma = 1.0 / std::max(out.delta_logx, out.delta_logxp);
            break;
        case LogDerivSource::Calibrated:
            if (kernel.has_density()) {
                // The salary-free law: the shift only inflates the probe where x is small next to beta.
                const auto cal = calibrate_log_derivative_bounds(kernel.with_growth(kernel.alpha(), 0.0),
                                                                 1.0, bounds.calibration_mass,
                                                                 bounds.calibration_samples, seed);
                out.delta_logx = cal.delta_input;
                out.delta_logxp = cal.delta_output;
                out.gamma = cal.gamma();
            }
            break;
    }
    out.epsilon = epsilon_from_bounds(bounds.delta, out.delta_logx, out.delta_logxp);
    cached_constants_ = out;
    return out;
}

BoundParams RunConfig::bound_params(double kappa) const {
    const auto constants = log_derivative_constants();
    BoundParams p;
    p.kappa = kappa;
    p.delta_stripe = bounds.delta;
    p.gamma_inv_logderiv = constants.gamma;
    p.epsilon = constants.epsilon;
    return p;
}

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : -1; }

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void require_map(const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) throw ConfigError(path, "expected a mapping", line_of(node));
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
    require_map(node, path);
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return key == a; });
        if (!known) throw ConfigError(join(path, key), "unknown key '" + key + "'", line_of(kv.first));
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) throw ConfigError(path, "expected a scalar", line_of(node));
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(path, "cannot parse '" + node.Scalar() + "'", line_of(node));
    }
}

double number(const YAML::Node& node, const std::string& path) {
    const auto v = scalar<double>(node, path);
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite", line_of(node));
    return v;
}

std::uint64_t count(const YAML::Node& node, const std::string& path) {
    const auto text = scalar<std::string>(node, path);
    if (text.empty() || text.front() == '-')
        throw ConfigError(path, "must be a nonnegative integer", line_of(node));
    return scalar<std::uint64_t>(node, path);
}

double bound_value(const YAML::Node& node, const std::string& path) {
    const auto text = scalar<std::string>(node, path);
    if (text == "unbounded" || text == "inf") return kUnbounded;
    const double v = number(node, path);
    if (!(v > 0.0)) throw ConfigError(path, "must be > 0 or 'unbounded'", line_of(node));
    return v;
}

std::vector<double> number_list(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence() || node.size() == 0)
        throw ConfigError(path, "expected a nonempty list", line_of(node));
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(number(node[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// Re-raise a module invariant violation with the config location.
template <class F>
auto checked(const YAML::Node& node, const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what(), line_of(node));
    }
}

void parse_kernel(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "kernel",
               {"family", "alpha", "beta", "gamma_disp", "delta_logx", "delta_logxp"});
    if (!node["family"]) throw ConfigError("kernel.family", "required", line_of(node));
    const auto family = checked(node["family"], "kernel.family", [&] {
        return parse_family(scalar<std::string>(node["family"], "kernel.family"));
    });
    const double alpha = node["alpha"] ? number(node["alpha"], "kernel.alpha") : 1.0;
    if (!(alpha >= 1.0))
        throw ConfigError("kernel.alpha", "alpha must be >= 1", line_of(node["alpha"]));
    const double beta = node["beta"] ? number(node["beta"], "kernel.beta") : 0.0;
    if (!(beta >= 0.0)) throw ConfigError("kernel.beta", "beta must be >= 0", line_of(node["beta"]));
    const double gd = node["gamma_disp"] ? number(node["gamma_disp"], "kernel.gamma_disp") : 0.0;
    const double dx = node["delta_logx"] ? bound_value(node["delta_logx"], "kernel.delta_logx")
                                         : kUnbounded;
    const double dxp = node["delta_logxp"] ? bound_value(node["delta_logxp"], "kernel.delta_logxp")
                                           : kUnbounded;
    cfg.kernel = checked(node, "kernel", [&] { return KernelSpec(family, alpha, beta, gd, dx, dxp); });
}

void parse_policy(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "policy", {"mode", "salary_fraction", "tax_rate"});
    if (node["mode"]) {
        const auto mode = scalar<std::string>(node["mode"], "policy.mode");
        if (mode == "linear") cfg.policy.kind = PolicyKind::Linear;
        else if (mode == "proportional") cfg.policy.kind = PolicyKind::Proportional;
        else if (mode == "adaptation") cfg.policy.kind = PolicyKind::Adaptation;
        else if (mode == "flat_tax") cfg.policy.kind = PolicyKind::FlatTax;
        else
            throw ConfigError("policy.mode",
                              "unknown mode '" + mode +
                                  "' (expected linear, proportional, adaptation or flat_tax)",
                              line_of(node["mode"]));
    }
    if (node["salary_fraction"]) {
        cfg.policy.salary_fraction = number(node["salary_fraction"], "policy.salary_fraction");
        if (!(cfg.policy.salary_fraction >= 0.0))
            throw ConfigError("policy.salary_fraction", "must be >= 0",
                              line_of(node["salary_fraction"]));
    }
    if (node["tax_rate"]) cfg.policy.tax_rate = number(node["tax_rate"], "policy.tax_rate");
}

void parse_population(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "population", {"n", "initial"});
    if (node["n"]) cfg.n = count(node["n"], "population.n");
    if (cfg.n < 2) throw ConfigError("population.n", "needs at least 2 agents", line_of(node["n"]));
    if (const auto ic = node["initial"]) {
        check_keys(ic, "population.initial", {"kind", "value", "low", "high", "mean", "cv"});
        const auto kind = ic["kind"] ? scalar<std::string>(ic["kind"], "population.initial.kind")
                                     : std::string("point_mass");
        if (kind == "point_mass") cfg.initial.kind = InitialKind::PointMass;
        else if (kind == "uniform") cfg.initial.kind = InitialKind::Uniform;
        else if (kind == "lognormal") cfg.initial.kind = InitialKind::Lognormal;
        else
            throw ConfigError("population.initial.kind", "unknown kind '" + kind + "'",
                              line_of(ic["kind"]));
        if (ic["value"]) cfg.initial.value = number(ic["value"], "population.initial.value");
        if (ic["low"]) cfg.initial.low = number(ic["low"], "population.initial.low");
        if (ic["high"]) cfg.initial.high = number(ic["high"], "population.initial.high");
        if (ic["mean"]) cfg.initial.mean = number(ic["mean"], "population.initial.mean");
        if (ic["cv"]) cfg.initial.cv = number(ic["cv"], "population.initial.cv");
        checked(ic, "population.initial", [&] { return make_initial_population(cfg.initial, 2, 0); });
    }
}

void parse_simulation(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "simulation", {"steps", "seed", "threads", "name"});
    if (node["steps"]) cfg.steps = count(node["steps"], "simulation.steps");
    if (node["seed"]) cfg.seed = count(node["seed"], "simulation.seed");
    if (node["threads"]) {
        cfg.threads = static_cast<unsigned>(count(node["threads"], "simulation.threads"));
        if (cfg.threads == 0)
            throw ConfigError("simulation.threads", "must be >= 1", line_of(node["threads"]));
    }
    if (node["name"]) cfg.name = scalar<std::string>(node["name"], "simulation.name");
}

void parse_metrics(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "metrics", {"kappa"});
    if (node["kappa"]) {
        cfg.kappas = number_list(node["kappa"], "metrics.kappa");
        for (double k : cfg.kappas) {
            if (!(k > 0.0 && k < 0.5))
                throw ConfigError("metrics.kappa", "every kappa must lie in (0, 1/2)",
                                  line_of(node["kappa"]));
        }
    }
}

void parse_bounds(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "bounds",
               {"delta", "gamma_inv_logderiv", "calibration_mass", "calibration_samples",
                "bootstrap_replicates", "bootstrap_se_multiple"});
    auto& b = cfg.bounds;
    if (node["delta"]) {
        b.delta = number(node["delta"], "bounds.delta");
        if (!(b.delta > 0.0 && b.delta < 0.2))
            throw ConfigError("bounds.delta", "must lie in (0, 0.2)", line_of(node["delta"]));
    }
    if (const auto g = node["gamma_inv_logderiv"]) {
        const auto text = scalar<std::string>(g, "bounds.gamma_inv_logderiv");
        if (text == "auto") b.source = LogDerivSource::Calibrated;
        else if (text == "gamma_disp") b.source = LogDerivSource::GammaDisp;
        else if (text == "claimed") b.source = LogDerivSource::Claimed;
        else {
            b.source = LogDerivSource::Explicit;
            b.gamma_inv_logderiv = number(g, "bounds.gamma_inv_logderiv");
            if (!(b.gamma_inv_logderiv >= 0.0))
                throw ConfigError("bounds.gamma_inv_logderiv", "must be >= 0", line_of(g));
        }
    }
    if (node["calibration_mass"]) {
        b.calibration_mass = number(node["calibration_mass"], "bounds.calibration_mass");
        if (!(b.calibration_mass > 0.0 && b.calibration_mass < 1.0))
            throw ConfigError("bounds.calibration_mass", "must lie in (0, 1)",
                              line_of(node["calibration_mass"]));
    }
    if (node["calibration_samples"]) {
        b.calibration_samples = count(node["calibration_samples"], "bounds.calibration_samples");
        if (b.calibration_samples < 1000)
            throw ConfigError("bounds.calibration_samples", "must be >= 1000",
                              line_of(node["calibration_samples"]));
    }
    if (node["bootstrap_replicates"]) {
        b.bootstrap_replicates = count(node["bootstrap_replicates"], "bounds.bootstrap_replicates");
        if (b.bootstrap_replicates < 2)
            throw ConfigError("bounds.bootstrap_replicates", "must be >= 2",
                              line_of(node["bootstrap_replicates"]));
    }
    if (node["bootstrap_se_multiple"])
        b.bootstrap_se_multiple = number(node["bootstrap_se_multiple"], "bounds.bootstrap_se_multiple");
    if (b.source == LogDerivSource::Claimed &&
        (!std::isfinite(cfg.kernel.delta_logx()) || !std::isfinite(cfg.kernel.delta_logxp())))
        throw ConfigError("bounds.gamma_inv_logderiv",
                          "'claimed' needs finite kernel.delta_logx and kernel.delta_logxp",
                          line_of(node["gamma_inv_logderiv"]));
}

void parse_appendix(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "appendix",
               {"pairs", "x_grid", "y_lower", "y_delta", "minimality_trials", "minimality_constant",
                "density_grid_points"});
    auto& a = cfg.appendix;
    if (node["pairs"]) a.pairs = count(node["pairs"], "appendix.pairs");
    if (node["x_grid"]) {
        a.x_grid = number_list(node["x_grid"], "appendix.x_grid");
        for (double x : a.x_grid)
            if (!(x > 0.0))
                throw ConfigError("appendix.x_grid", "grid values must be > 0", line_of(node["x_grid"]));
    }
    if (node["y_lower"]) {
        a.y_lower = number(node["y_lower"], "appendix.y_lower");
        if (!(a.y_lower > 0.0))
            throw ConfigError("appendix.y_lower", "must be > 0", line_of(node["y_lower"]));
    }
    if (node["y_delta"]) {
        a.y_delta = number(node["y_delta"], "appendix.y_delta");
        if (!(a.y_delta > 0.0 && a.y_delta <= 0.05))
            throw ConfigError("appendix.y_delta", "must lie in (0, 0.05]", line_of(node["y_delta"]));
    }
    if (node["minimality_trials"])
        a.minimality_trials = count(node["minimality_trials"], "appendix.minimality_trials");
    if (node["minimality_constant"])
        a.minimality_constant = number(node["minimality_constant"], "appendix.minimality_constant");
    if (node["density_grid_points"]) {
        a.density_grid_points = count(node["density_grid_points"], "appendix.density_grid_points");
        if (a.density_grid_points < 5)
            throw ConfigError("appendix.density_grid_points", "must be >= 5",
                              line_of(node["density_grid_points"]));
    }
}

void parse_search(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "search", {"c_lo", "c_hi", "tol", "horizon", "window", "grow_tol", "rising_as_diverging"});
    auto& s = cfg.search;
    if (node["c_lo"]) s.c_lo = number(node["c_lo"], "search.c_lo");
    if (node["c_hi"]) s.c_hi = number(node["c_hi"], "search.c_hi");
    if (node["tol"]) s.tol = number(node["tol"], "search.tol");
    if (node["horizon"]) s.horizon = count(node["horizon"], "search.horizon");
    if (node["window"]) s.window = count(node["window"], "search.window");
    if (node["grow_tol"]) s.grow_tol = number(node["grow_tol"], "search.grow_tol");
    if (node["rising_as_diverging"])
        s.rising_as_diverging = scalar<bool>(node["rising_as_diverging"], "search.rising_as_diverging");
    if (!(s.c_lo >= 0.0 && s.c_hi > s.c_lo))
        throw ConfigError("search", "needs 0 <= c_lo < c_hi", line_of(node));
    if (!(s.tol > 0.0)) throw ConfigError("search.tol", "must be > 0", line_of(node["tol"]));
    if (!(s.grow_tol > 0.0)) throw ConfigError("search.grow_tol", "must be > 0", line_of(node));
}

void parse_output(const YAML::Node& node, RunConfig& cfg) {
    check_keys(node, "output", {"trajectory", "population", "report", "summary"});
    if (node["trajectory"]) cfg.output.trajectory = scalar<std::string>(node["trajectory"], "output.trajectory");
    if (node["population"]) cfg.output.population = scalar<std::string>(node["population"], "output.population");
    if (node["report"]) cfg.output.report = scalar<std::string>(node["report"], "output.report");
    if (node["summary"]) cfg.output.summary = scalar<std::string>(node["summary"], "output.summary");
}

RunConfig parse_root(const YAML::Node& root) {
    if (root.IsNull()) throw ConfigError("", "empty configuration");
    check_keys(root, "",
               {"kernel", "policy", "population", "simulation", "metrics", "bounds", "appendix",
                "search", "output"});
    if (!root["kernel"]) throw ConfigError("kernel", "required section missing");
    RunConfig cfg;
    // kernel first: other sections validate against it
    parse_kernel(root["kernel"], cfg);
    if (root["policy"]) parse_policy(root["policy"], cfg);
    if (root["population"]) parse_population(root["population"], cfg);
    if (root["simulation"]) parse_simulation(root["simulation"], cfg);
    if (root["metrics"]) parse_metrics(root["metrics"], cfg);
    if (root["bounds"]) parse_bounds(root["bounds"], cfg);
    if (root["appendix"]) parse_appendix(root["appendix"], cfg);
    if (root["search"]) parse_search(root["search"], cfg);
    if (root["output"]) parse_output(root["output"], cfg);

    if (cfg.policy.kind == PolicyKind::Proportional && cfg.kernel.beta() != 0.0)
        throw ConfigError("kernel.beta",
                          "proportional policy sets beta_t = salary_fraction * mu_t; leave kernel.beta at 0",
                          line_of(root["kernel"]["beta"]));
    if (cfg.policy.kind == PolicyKind::FlatTax &&
        !(cfg.policy.tax_rate >= 0.0 && cfg.policy.tax_rate <= cfg.kernel.alpha()))
        throw ConfigError("policy.tax_rate", "must lie in [0, alpha] to keep means nonnegative",
                          root["policy"] ? line_of(root["policy"]) : -1);
    checked(root["bounds"] ? root["bounds"] : root, "bounds", [&] {
        for (double k : cfg.kappas) cfg.bound_params(k).validate();
        return 0;
    });
    return cfg;
}

}  // namespace

RunConfig parse_config_string(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.msg, e.mark.line + 1);
    }
    return parse_root(root);
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_string(text.str());
}

}  // namespace wealthdyn
