#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wealthdyn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on a numeric argument was violated.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The kernel has no density (deterministic family).
class NoDensityError : public Error {
public:
    NoDensityError() : Error("no density") {}
};

/// The kernel degenerates to a point mass at the salary (x = 0).
class DegenerateKernelError : public Error {
public:
    explicit DegenerateKernelError(double beta)
        : Error("degenerate at beta = " + std::to_string(beta)) {}
};

/// A density probe was requested at a point of zero density.
class OutsideSupportError : public Error {
public:
    OutsideSupportError() : Error("outside support") {}
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved, double target)
        : Error(what + " (achieved error " + std::to_string(achieved) + ", target " +
                std::to_string(target) + ")"),
          achieved_(achieved),
          target_(target) {}

    double achieved() const noexcept { return achieved_; }
    double target() const noexcept { return target_; }

private:
    double achieved_;
    double target_;
};

/// Raised by the dynamics when an agent would be assigned a negative mean.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t agent, double value)
        : Error(what), agent_(agent), value_(value) {}

    std::size_t agent() const noexcept { return agent_; }
    double value() const noexcept { return value_; }

private:
    std::size_t agent_;
    double value_;
};

/// The threshold search could not bracket or classify a probe.
class SearchError : public Error {
public:
    SearchError(const std::string& what, double c) : Error(what), c_(c) {}

    double c() const noexcept { return c_; }

private:
    double c_;
};

/// Configuration schema or invariant violation; `field` is a dotted path.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what, int line = -1)
        : Error(format(field, what, line)), field_(field), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& field, const std::string& what, int line) {
        std::string msg;
        if (line > 0) msg += "line " + std::to_string(line) + ": ";
        if (!field.empty()) msg += field + ": ";
        return msg + what;
    }

    std::string field_;
    int line_;
};

}  // namespace wealthdyn
