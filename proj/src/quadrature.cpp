#include "wealthdyn/quadrature.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wealthdyn/error.hpp"

namespace wealthdyn {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
using Gauss = boost::math::quadrature::gauss<double, 15>;

struct Segment {
    double a;
    double b;
    double value;
    double error;

    bool operator<(const Segment& other) const { return error < other.error; }
};

// Fixed 31-point Kronrod rule with its embedded 15-point Gauss rule on [a, b].
// Node table: abscissa()[0] = 0, even indices are shared with Gauss, odd are Kronrod-only.
Segment rule(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const auto& xk = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    const double f0 = f(mid);
    double kronrod = f0 * wk[0];
    double gauss = f0 * wg[0];  // the 15-point Gauss rule also has a node at 0
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double fp = f(mid + half * xk[i]);
        const double fm = f(mid - half * xk[i]);
        kronrod += (fp + fm) * wk[i];
        if (i % 2 == 0) gauss += (fp + fm) * wg[i / 2];
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, unsigned max_depth) {
    if (!(b > a)) return {0.0, 0.0};
    const std::size_t max_segments = std::size_t{1} << std::min(max_depth, 20u);
    std::priority_queue<Segment> heap;
    Segment first = rule(f, a, b);
    double total = first.value;
    double total_error = first.error;
    heap.push(first);
    while (total_error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (heap.size() >= max_segments) {
            throw QuadratureError("adaptive quadrature did not converge on [" + std::to_string(a) +
                                      ", " + std::to_string(b) + "]",
                                  total_error, std::max(abs_tol, rel_tol * std::abs(total)));
        }
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw QuadratureError("interval collapsed below floating-point resolution",
                                  total_error, std::max(abs_tol, rel_tol * std::abs(total)));
        }
        const Segment left = rule(f, worst.a, mid);
        const Segment right = rule(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Recompute sums from the leaves so cancellation in the running update does not linger.
    double value = 0.0;
    double error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error};
}

}  // namespace wealthdyn
