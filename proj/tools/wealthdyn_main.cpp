// wealthdyn: simulate wealth dynamics and check the concentration bounds.
//
// Exit codes: 0 success, 1 runtime or verification failure, 2 usage or config error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "wealthdyn/config.hpp"
#include "wealthdyn/error.hpp"
#include "wealthdyn/experiments.hpp"
#include "wealthdyn/metrics.hpp"
#include "wealthdyn/report.hpp"
#include "wealthdyn/simulation.hpp"
#include "wealthdyn/verification.hpp"

namespace {

using namespace wealthdyn;

constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "run configuration (YAML)")->required();
    cmd->add_option("--out", c.out, "output file (default: config output path or stdout)");
    cmd->add_option("--seed", c.seed, "master seed, overrides the config");
    cmd->add_option("--threads", c.threads, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
}

RunConfig load(const Common& c) {
    RunConfig cfg = parse_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.threads) cfg.threads = *c.threads;
    return cfg;
}

// Opens `path` or falls back to stdout when it is empty.
class Sink {
public:
    explicit Sink(const std::filesystem::path& path) {
        if (path.empty()) return;
        file_.open(path);
        if (!file_) throw ConfigError("--out", "cannot write '" + path.string() + "'");
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::filesystem::path pick(const std::string& flag, const std::filesystem::path& fallback) {
    return flag.empty() ? fallback : std::filesystem::path(flag);
}

int report_failures(const VerificationOutcome& outcome) {
    if (outcome.passed()) return 0;
    if (!outcome.hypotheses_met) std::cerr << "hypotheses not met\n";
    for (const auto& f : outcome.failures) std::cerr << "FAIL " << f << '\n';
    return kFailure;
}

int cmd_simulate(const Common& c, const std::string& dump, const std::string& summary) {
    const RunConfig cfg = load(c);
    Sink sink(pick(c.out, cfg.output.trajectory));
    std::ostream& out = sink.stream();
    TrajectoryCsvWriter writer(out, cfg);
    writer.write_header();
    Trajectory traj;
    try {
        traj = run(cfg, [&](const TrajectoryRow& row) { writer.write_row(row); });
    } catch (const Error& e) {
        out.flush();
        std::cerr << "simulation failed: " << e.what() << '\n';
        return kFailure;
    }
    out.flush();
    if (const auto path = pick(dump, cfg.output.population); !path.empty()) {
        std::ofstream pop(path);
        if (!pop) throw ConfigError("--dump-population", "cannot write '" + path.string() + "'");
        write_population(pop, traj.final_population.wealth);
    }
    if (const auto path = pick(summary, cfg.output.summary); !path.empty()) {
        std::ofstream sum(path);
        if (!sum) throw ConfigError("--summary", "cannot write '" + path.string() + "'");
        std::vector<SnapshotMetrics> snaps;
        for (const auto& row : traj.rows) snaps.push_back(row.metrics);
        const std::size_t window = cfg.search.window > 0 ? cfg.search.window : snaps.size() / 5;
        std::string parameter;
        if (cfg.policy.kind == PolicyKind::Proportional) parameter = "c=" + format_exact(cfg.policy.salary_fraction);
        else if (cfg.policy.kind == PolicyKind::FlatTax) parameter = "tax=" + format_exact(cfg.policy.tax_rate);
        else parameter = "beta=" + format_exact(cfg.kernel.beta());
        write_summary_header(sum);
        write_summary_row(sum, summarize_scenario(cfg.name, parameter, snaps, std::max<std::size_t>(window, 1),
                                                  cfg.search.grow_tol));
    }
    return 0;
}

int cmd_gini(const std::string& input) {
    std::ifstream in(input);
    if (!in) throw ConfigError("--input", "cannot open '" + input + "'");
    const auto wealth = read_population(in);
    if (wealth.size() < 2) throw ConfigError("--input", "needs at least 2 values");
    for (double x : wealth)
        if (x < 0.0) throw ConfigError("--input", "wealth values must be >= 0");
    std::cout << "gini: " << format_human(gini(wealth)) << '\n';
    std::cout << "cv: " << format_human(coefficient_of_variation(wealth)) << '\n';
    return 0;
}

int cmd_verify_bounds(const Common& c) {
    const RunConfig cfg = load(c);
    Trajectory traj;
    std::optional<std::ofstream> csv;
    std::optional<TrajectoryCsvWriter> writer;
    if (!cfg.output.trajectory.empty()) {
        csv.emplace(cfg.output.trajectory);
        writer.emplace(*csv, cfg);
        writer->write_header();
    }
    try {
        traj = run(cfg, [&](const TrajectoryRow& row) {
            if (writer) writer->write_row(row);
        });
    } catch (const Error& e) {
        std::cerr << "simulation failed: " << e.what() << '\n';
        return kFailure;
    }
    Sink sink(pick(c.out, cfg.output.report));
    return report_failures(verify_bounds(cfg, traj, sink.stream()));
}

int cmd_verify_appendix(const Common& c) {
    const RunConfig cfg = load(c);
    Sink sink(pick(c.out, cfg.output.report));
    return report_failures(verify_appendix(cfg, sink.stream()));
}

int cmd_search(const Common& c, const std::string& summary) {
    const RunConfig cfg = load(c);
    Sink sink(pick(c.out, cfg.output.report));
    std::optional<std::ofstream> sum;
    if (const auto path = pick(summary, cfg.output.summary); !path.empty()) {
        sum.emplace(path);
        if (!*sum) throw ConfigError("--summary", "cannot write '" + path.string() + "'");
    }
    return report_failures(search_threshold(cfg, sink.stream(), sum ? &*sum : nullptr));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo wealth dynamics and concentration bounds"};
    app.require_subcommand(1);

    Common sim_opts, vb_opts, va_opts, st_opts;
    std::string dump, sim_summary, st_summary, gini_input;

    auto* sim = app.add_subcommand("simulate", "run the dynamics and write the trajectory CSV");
    add_common(sim, sim_opts);
    sim->add_option("--dump-population", dump, "write the final ensemble, one value per line");
    sim->add_option("--summary", sim_summary, "write a one-row scenario summary CSV");

    auto* gcmd = app.add_subcommand("gini", "Gini coefficient and CV of a wealth file");
    gcmd->add_option("--input", gini_input, "one wealth value per line")->required();

    auto* vb = app.add_subcommand("verify-bounds", "check every bound along a simulated run");
    add_common(vb, vb_opts);
    auto* va = app.add_subcommand("verify-appendix", "numerical checks of the pair-splitting bounds");
    add_common(va, va_opts);
    auto* st = app.add_subcommand("search-threshold", "bisect the stabilizing salary fraction");
    add_common(st, st_opts);
    st->add_option("--summary", st_summary, "probe summary CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*sim) return cmd_simulate(sim_opts, dump, sim_summary);
        if (*gcmd) return cmd_gini(gini_input);
        if (*vb) return cmd_verify_bounds(vb_opts);
        if (*va) return cmd_verify_appendix(va_opts);
        if (*st) return cmd_search(st_opts, st_summary);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
