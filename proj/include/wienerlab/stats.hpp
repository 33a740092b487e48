#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace wienerlab {

/// Wilson score interval for k successes in n trials (z = 1.96 by default).
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope x. Needs at least two distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Unbiased sample variance.
double variance(std::span<const double> v);
double median(std::vector<double> v);

/// Number of worker threads: WIENERLAB_THREADS if set, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads. Each index is
/// handled exactly once, so results written to slot i are schedule-independent.
/// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wienerlab
