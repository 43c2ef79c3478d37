#include "wealthdyn/report.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "wealthdyn/error.hpp"

namespace wealthdyn {

namespace {

std::string format_digits(double v, int digits) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string format_exact(double v) { return format_digits(v, 17); }
std::string format_human(double v) { return format_digits(v, 12); }

TrajectoryCsvWriter::TrajectoryCsvWriter(std::ostream& out, const RunConfig& config)
    : out_(out), kappas_(config.kappas), names_(bound_names(config)) {}

void TrajectoryCsvWriter::write_header() {
    out_ << "t,mu,sigma,cv,gini";
    for (double k : kappas_) {
        std::ostringstream tag;
        tag << k;
        out_ << ",tail_p_" << tag.str();
    }
    out_ << ",alpha_t,beta_t,beta_mode";
    for (const auto& n : names_) out_ << ',' << n << "_lhs," << n << "_rhs," << n << "_satisfied";
    out_ << '\n';
}

void TrajectoryCsvWriter::write_row(const TrajectoryRow& row) {
    const auto& m = row.metrics;
    out_ << m.t << ',' << format_exact(m.mu) << ',' << format_exact(m.sigma) << ','
         << format_exact(m.cv) << ',' << format_exact(m.gini);
    for (double k : kappas_) out_ << ',' << format_exact(m.tail(k));
    const bool general = row.beta_mode == "general";
    out_ << ',' << format_exact(general ? row.gamma_t : row.alpha_t) << ','
         << (general ? std::string() : format_exact(row.beta_t)) << ',' << row.beta_mode;
    for (const auto& n : names_) {
        if (const BoundRecord* r = row.bounds.find(n)) {
            // A theorem counts as satisfied within its Monte Carlo tolerance.
            const bool ok = r->theorem ? r->within_tolerance() : r->satisfied;
            out_ << ',' << format_exact(r->lhs) << ',' << format_exact(r->rhs) << ','
                 << (ok ? 1 : 0);
        } else {
            out_ << ",,,";
        }
    }
    out_ << '\n';
}

void write_population(std::ostream& out, std::span<const double> wealth) {
    for (double x : wealth) out << format_exact(x) << '\n';
}

std::vector<double> read_population(std::istream& in) {
    std::vector<double> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        const std::string text = line.substr(first, last - first + 1);
        double v = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
            throw ConfigError("input", "non-numeric value '" + text + "'", line_no);
        out.push_back(v);
    }
    return out;
}

void SectionReport::section(const std::string& name) {
    if (!first_) out_ << '\n';
    first_ = false;
    out_ << '[' << name << "]\n";
}

void SectionReport::field(const std::string& key, const std::string& value) {
    out_ << key << ": " << value << '\n';
}

void SectionReport::field(const std::string& key, double value) { field(key, format_exact(value)); }

void SectionReport::field(const std::string& key, bool value) {
    field(key, std::string(value ? "true" : "false"));
}

void SectionReport::field(const std::string& key, std::size_t value) {
    field(key, std::to_string(value));
}

}  // namespace wealthdyn
