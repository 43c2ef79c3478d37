#pragma once

// Exact estimators on a finite wealth ensemble.
//
// Conventions: population variance (divisor N) and the Gini coefficient
// over ordered pairs drawn with replacement, G = sum |x_i - x_j| / (2 N^2 mu),
// whose maximum at finite N is (N - 1) / N.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace wealthdyn {

double mean(std::span<const double> values);
double population_sd(std::span<const double> values);

/// Ascending sort of nonnegative finite values (LSD radix sort on the bit
/// patterns, which order like the values; std::sort for small inputs).
void sort_nonnegative(std::vector<double>& values);

/// O(N log N) Gini via the sorted-rank identity. Throws DomainError when N < 2 or mean == 0.
double gini(std::span<const double> wealth);
/// Same, for an already ascending-sorted ensemble (no copy).
double gini_sorted(std::span<const double> ascending);
/// Direct O(N^2) double sum; reference for tests.
double gini_pairwise_oracle(std::span<const double> wealth);

/// Mean absolute difference over ordered pairs with replacement, (1/N^2) sum |v_i - v_j|.
/// Works for values of any sign.
double mean_abs_difference(std::span<const double> values);

double coefficient_of_variation(std::span<const double> wealth);

/// Fraction of agents with wealth strictly above kappa * mean.
double tail_probability(std::span<const double> wealth, double kappa);

struct SnapshotMetrics {
    std::uint64_t t = 0;
    double mu = 0.0;
    double sigma = 0.0;
    double cv = 0.0;
    double gini = 0.0;
    /// (kappa, P(z / mu > kappa)) in the configured kappa order.
    std::vector<std::pair<double, double>> tail_probs;

    double tail(double kappa) const;
};

SnapshotMetrics compute_snapshot(std::span<const double> wealth, std::uint64_t t,
                                 std::span<const double> kappas);
/// Same, for an already ascending-sorted ensemble.
SnapshotMetrics compute_snapshot_sorted(std::span<const double> ascending, std::uint64_t t,
                                        std::span<const double> kappas);

}  // namespace wealthdyn
