#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace lapdiag {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Each index is
/// processed exactly once; results must be written to per-index slots so the
/// outcome is independent of the worker count. The first exception thrown by
/// any task is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t pool = std::min<std::size_t>(workers, count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Streaming mean/variance (Welford), mergeable with Chan's update.
struct RunningStats {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const RunningStats& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double n_a = static_cast<double>(count);
        const double n_b = static_cast<double>(other.count);
        const double total = n_a + n_b;
        const double delta = other.mean - mean;
        mean += delta * n_b / total;
        m2 += other.m2 + delta * delta * n_a * n_b / total;
        count += other.count;
    }

    double sample_variance() const {
        return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    }

    double standard_error() const {
        return count > 0 ? std::sqrt(sample_variance() / static_cast<double>(count)) : 0.0;
    }
};

/// Pairwise tree reduction in index order; the merge order depends only on
/// parts.size().
template <class T, class Merge>
T tree_reduce(std::vector<T> parts, Merge&& merge) {
    if (parts.empty()) return T{};
    std::size_t width = parts.size();
    while (width > 1) {
        const std::size_t half = (width + 1) / 2;
        for (std::size_t i = 0; i + half < width; ++i) {
            merge(parts[i], parts[i + half]);
        }
        width = half;
    }
    return parts.front();
}

inline RunningStats reduce_stats(std::vector<RunningStats> parts) {
    return tree_reduce(std::move(parts),
                       [](RunningStats& a, const RunningStats& b) { a.merge(b); });
}

/// Monte Carlo samples are generated in fixed-size blocks; block b draws
/// from stream (seed, b). The block size is part of the reproducibility
/// contract and never depends on the worker count.
inline constexpr std::size_t kMonteCarloBlock = 1024;

inline std::size_t block_count(std::size_t samples) {
    return (samples + kMonteCarloBlock - 1) / kMonteCarloBlock;
}

}  // namespace lapdiag
