#pragma once

#include <functional>

namespace wealthdyn {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

/// Adaptive 31-point Gauss-Kronrod on [a, b], refining until the error
/// estimate drops below max(abs_tol, rel_tol * L1) or the depth limit is hit.
/// Throws QuadratureError if the achieved error exceeds the target.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol = 0.0,
                                    unsigned max_depth = 18);

}  // namespace wealthdyn
