#include "wienerlab/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "wienerlab/errors.hpp"

namespace wienerlab {

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
    require(n > 0, "wilson_interval: no trials");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "linear_fit: size mismatch");
    require(x.size() >= 2, "linear_fit: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0, "linear_fit: x values are all equal");
    LinearFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - fit.intercept - fit.slope * x[i];
        sse += e * e;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    fit.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return fit;
}

double mean(std::span<const double> v) {
    require(!v.empty(), "mean: empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    require(v.size() >= 2, "variance: need at least two values");
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

double median(std::vector<double> v) {
    require(!v.empty(), "median: empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

std::size_t worker_count() {
    if (const char* env = std::getenv("WIENERLAB_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            if (failed.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace wienerlab
