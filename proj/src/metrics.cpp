#include "wealthdyn/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "wealthdyn/error.hpp"

namespace wealthdyn {

double mean(std::span<const double> values) {
    if (values.empty()) throw DomainError("mean of an empty ensemble");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_sd(std::span<const double> values) {
    const double mu = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

namespace {

void require_gini_domain(std::span<const double> wealth, double mu) {
    if (wealth.size() < 2) throw DomainError("Gini undefined: need at least 2 agents");
    if (!(mu > 0.0)) throw DomainError("Gini undefined: zero mean");
}

// sum_i (2i - N - 1) v_(i) over ascending order, 1-based i; equals
// half the ordered-pair sum of |v_i - v_j|.
double sorted_rank_sum(std::span<const double> ascending) {
    const double n = static_cast<double>(ascending.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < ascending.size(); ++i) {
        acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * ascending[i];
    }
    return acc;
}

}  // namespace

double gini_sorted(std::span<const double> ascending) {
    const double mu = mean(ascending);
    require_gini_domain(ascending, mu);
    const double n = static_cast<double>(ascending.size());
    return sorted_rank_sum(ascending) / (n * n * mu);
}

double gini(std::span<const double> wealth) {
    std::vector<double> sorted(wealth.begin(), wealth.end());
    std::sort(sorted.begin(), sorted.end());
    return gini_sorted(sorted);
}

double gini_pairwise_oracle(std::span<const double> wealth) {
    const double mu = mean(wealth);
    require_gini_domain(wealth, mu);
    double total = 0.0;
    for (double xi : wealth) {
        for (double xj : wealth) total += std::abs(xi - xj);
    }
    const double n = static_cast<double>(wealth.size());
    return total / (2.0 * n * n * mu);
}

double mean_abs_difference(std::span<const double> values) {
    if (values.empty()) throw DomainError("mean absolute difference of an empty ensemble");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    return 2.0 * sorted_rank_sum(sorted) / (n * n);
}

double coefficient_of_variation(std::span<const double> wealth) {
    const double mu = mean(wealth);
    if (!(mu > 0.0)) throw DomainError("coefficient of variation undefined: zero mean");
    return population_sd(wealth) / mu;
}

double tail_probability(std::span<const double> wealth, double kappa) {
    const double threshold = kappa * mean(wealth);
    const auto above = std::count_if(wealth.begin(), wealth.end(),
                                     [threshold](double x) { return x > threshold; });
    return static_cast<double>(above) / static_cast<double>(wealth.size());
}

double SnapshotMetrics::tail(double kappa) const {
    for (const auto& [k, p] : tail_probs) {
        if (k == kappa) return p;
    }
    throw DomainError("kappa " + std::to_string(kappa) + " not in the snapshot grid");
}

void sort_nonnegative(std::vector<double>& values) {
    constexpr std::size_t kRadixMin = 4096;
    if (values.size() < kRadixMin) {
        std::sort(values.begin(), values.end());
        return;
    }
    constexpr int kBits = 11;
    constexpr std::size_t kBuckets = std::size_t{1} << kBits;
    constexpr int kPasses = (64 + kBits - 1) / kBits;
    const std::size_t n = values.size();
    std::vector<std::uint64_t> keys(n), scratch(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(values[i] >= 0.0)) throw DomainError("radix sort needs nonnegative values");
        keys[i] = std::bit_cast<std::uint64_t>(values[i] + 0.0);  // folds -0.0 into +0.0
    }
    std::vector<std::size_t> counts(kBuckets * kPasses, 0);
    for (const auto k : keys) {
        for (int p = 0; p < kPasses; ++p) ++counts[p * kBuckets + ((k >> (p * kBits)) & (kBuckets - 1))];
    }
    for (int p = 0; p < kPasses; ++p) {
        std::size_t* c = &counts[p * kBuckets];
        // A pass where every key lands in one bucket is the identity.
        if (std::any_of(c, c + kBuckets, [n](std::size_t v) { return v == n; })) continue;
        std::size_t offset = 0;
        for (std::size_t b = 0; b < kBuckets; ++b) {
            const std::size_t count = c[b];
            c[b] = offset;
            offset += count;
        }
        for (const auto k : keys) scratch[c[(k >> (p * kBits)) & (kBuckets - 1)]++] = k;
        keys.swap(scratch);
    }
    for (std::size_t i = 0; i < n; ++i) values[i] = std::bit_cast<double>(keys[i]);
}

SnapshotMetrics compute_snapshot(std::span<const double> wealth, std::uint64_t t,
                                 std::span<const double> kappas) {
    std::vector<double> sorted(wealth.begin(), wealth.end());
    sort_nonnegative(sorted);
    return compute_snapshot_sorted(sorted, t, kappas);
}

SnapshotMetrics compute_snapshot_sorted(std::span<const double> ascending, std::uint64_t t,
                                        std::span<const double> kappas) {
    SnapshotMetrics snap;
    snap.t = t;
    snap.mu = mean(ascending);
    snap.sigma = population_sd(ascending);
    snap.cv = snap.sigma / snap.mu;
    snap.gini = gini_sorted(ascending);
    for (double kappa : kappas) {
        const double threshold = kappa * snap.mu;
        const auto first_above = std::upper_bound(ascending.begin(), ascending.end(), threshold);
        const auto count = std::distance(first_above, ascending.end());
        snap.tail_probs.emplace_back(kappa,
                                     static_cast<double>(count) / static_cast<double>(ascending.size()));
    }
    return snap;
}

}  // namespace wealthdyn
