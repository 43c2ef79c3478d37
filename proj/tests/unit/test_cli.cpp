#include <doctest.h>

#include <string>
#include <vector>

#include "cli_support.hpp"
#include "wealthdyn/report.hpp"

namespace {

const std::string kSmallRun = R"(kernel:
  family: lognormal
  alpha: 1.02
  gamma_disp: 0.2
population:
  n: 2000
simulation:
  steps: 40
  seed: 17
)";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("gini subcommand") {
    const auto a = cli::write_file("a.txt", "1\n2\n3\n4\n");
    auto r = cli::run("gini --input '" + a.string() + "'");
    CHECK(r.status == 0);
    CHECK(r.out.find("gini: 0.25\n") != std::string::npos);

    const auto b = cli::write_file("b.txt", "5\n5\n");
    r = cli::run("gini --input '" + b.string() + "'");
    CHECK(r.status == 0);
    CHECK(r.out.find("gini: 0\n") != std::string::npos);

    const auto c = cli::write_file("c.txt", "0\n0\n0\n1\n");
    r = cli::run("gini --input '" + c.string() + "'");
    CHECK(r.out.find("gini: 0.75\n") != std::string::npos);

    const auto bad = cli::write_file("bad.txt", "1\n2\nthree\n");
    r = cli::run("gini --input '" + bad.string() + "'");
    CHECK(r.status == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("usage and config errors exit 2") {
    CHECK(cli::run("simulate").status == 2);
    CHECK(cli::run("frobnicate").status == 2);
    const auto typo = cli::write_file("typo.yaml", "kernel:\n  family: lognormal\n  aplha: 1.02\n");
    const auto r = cli::run("simulate --config '" + typo.string() + "'");
    CHECK(r.status == 2);
    CHECK(r.err.find("aplha") != std::string::npos);
}

TEST_CASE("simulate then gini round trip") {
    const auto cfg = cli::write_file("small.yaml", kSmallRun);
    const auto csv = cli::scratch("small.csv");
    const auto pop = cli::scratch("small_pop.txt");
    auto r = cli::run("simulate --config '" + cfg.string() + "' --out '" + csv.string() +
                      "' --dump-population '" + pop.string() + "'");
    REQUIRE(r.status == 0);

    const std::string text = cli::slurp(csv);
    const auto lines = split(text.substr(0, text.size() - 1), '\n');
    REQUIRE(lines.size() == 42);
    const auto header = split(lines.front(), ',');
    CHECK(header[0] == "t");
    CHECK(header[4] == "gini");
    const double last_gini = std::stod(split(lines.back(), ',')[4]);

    r = cli::run("gini --input '" + pop.string() + "'");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("gini: " + wealthdyn::format_human(last_gini) + "\n") != std::string::npos);
}

TEST_CASE("identical invocations give identical bytes") {
    const auto cfg = cli::write_file("det.yaml", kSmallRun);
    const auto a = cli::scratch("det_a.csv");
    const auto b = cli::scratch("det_b.csv");
    REQUIRE(cli::run("simulate --config '" + cfg.string() + "' --out '" + a.string() + "'").status == 0);
    REQUIRE(cli::run("simulate --config '" + cfg.string() + "' --out '" + b.string() +
                     "' --threads 3").status == 0);
    CHECK(cli::slurp(a) == cli::slurp(b));
    const auto c = cli::scratch("det_c.csv");
    REQUIRE(cli::run("simulate --config '" + cfg.string() + "' --out '" + c.string() +
                     "' --seed 18").status == 0);
    CHECK(cli::slurp(a) != cli::slurp(c));
}

TEST_CASE("verification subcommands") {
    const std::string configs = WEALTHDYN_CONFIGS;
    auto r = cli::run("verify-bounds --config '" + configs + "/deterministic.yaml'");
    CHECK(r.status == 0);
    CHECK(r.out.find("passed: true") != std::string::npos);

    r = cli::run("verify-appendix --config '" + configs + "/deterministic.yaml'");
    CHECK(r.status == 1);
    CHECK(r.err.find("hypotheses not met") != std::string::npos);

    const auto bracket = cli::write_file("bracket.yaml", R"(kernel: {family: lognormal, alpha: 1.02, gamma_disp: 0.2}
population: {n: 500}
search: {c_lo: 0.5, c_hi: 0.6, horizon: 100}
)");
    r = cli::run("search-threshold --config '" + bracket.string() + "'");
    CHECK(r.status == 1);
    CHECK(r.err.find("no sign change") != std::string::npos);
}
