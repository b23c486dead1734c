#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace curvflow {

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OperatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Number of worker threads, bounded by the CURVFLOW_THREADS environment
/// variable (0 or unset = hardware concurrency).
inline int max_threads() {
    static const int n = [] {
        const char* env = std::getenv("CURVFLOW_THREADS");
        long requested = 0;
        if (env && *env) requested = std::strtol(env, nullptr, 10);
        long hw = static_cast<long>(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 1;
        if (requested <= 0) return static_cast<int>(hw);
        return static_cast<int>(requested < hw ? requested : hw);
    }();
    return n;
}

namespace detail {

// Persistent pool; parallel_for hands out fixed [begin,end) ranges, so the
// work decomposition never depends on scheduling order.
class ThreadPool {
public:
    static ThreadPool& instance() {
        static ThreadPool pool(max_threads() - 1);
        return pool;
    }

    void run(std::size_t njobs, const std::function<void(std::size_t)>& job) {
        if (njobs == 0) return;
        if (workers_.empty() || njobs == 1) {
            for (std::size_t i = 0; i < njobs; ++i) job(i);
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            job_ = &job;
            next_ = 0;
            pending_ = njobs;
            total_ = njobs;
            ++generation_;
        }
        wake_.notify_all();
        work_loop();
        std::unique_lock<std::mutex> lock(mutex_);
        done_.wait(lock, [&] { return pending_ == 0; });
        job_ = nullptr;
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
        }
        wake_.notify_all();
        for (auto& t : workers_) t.join();
    }

private:
    explicit ThreadPool(int extra_workers) {
        for (int i = 0; i < extra_workers; ++i)
            workers_.emplace_back([this] { worker(); });
    }

    void work_loop() {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lock(mutex_);
                if (next_ >= total_) return;
                idx = next_++;
            }
            (*job_)(idx);
            std::lock_guard<std::mutex> lock(mutex_);
            if (--pending_ == 0) done_.notify_all();
        }
    }

    void worker() {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lock(mutex_);
                wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
            }
            work_loop();
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_, done_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t next_ = 0, pending_ = 0, total_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

} // namespace detail

/// Runs fn(begin, end) over disjoint chunks of [0, n). Chunk boundaries
/// depend only on n and grain, so per-chunk results are reproducible; callers
/// that reduce must combine chunk results in chunk order.
template <class Fn>
void parallel_for(std::size_t n, const Fn& fn, std::size_t grain = 2048) {
    if (n == 0) return;
    const std::size_t threads = static_cast<std::size_t>(max_threads());
    if (threads <= 1 || n <= grain) {
        fn(std::size_t{0}, n);
        return;
    }
    std::size_t chunks = (n + grain - 1) / grain;
    if (chunks > 4 * threads) chunks = 4 * threads;
    const std::size_t step = (n + chunks - 1) / chunks;
    std::function<void(std::size_t)> job = [&](std::size_t c) {
        const std::size_t b = c * step;
        const std::size_t e = (b + step < n) ? b + step : n;
        if (b < e) fn(b, e);
    };
    detail::ThreadPool::instance().run(chunks, job);
}

/// Deterministic sum of term(i) for i in [0, n): fixed-size chunks summed
/// serially, chunk subtotals combined in order.
template <class Term>
double chunked_sum(std::size_t n, const Term& term, std::size_t chunk = 4096) {
    double total = 0.0;
    for (std::size_t b = 0; b < n; b += chunk) {
        const std::size_t e = (b + chunk < n) ? b + chunk : n;
        double partial = 0.0;
        for (std::size_t i = b; i < e; ++i) partial += term(i);
        total += partial;
    }
    return total;
}

/// Shortest decimal form that round-trips a double (up to 17 significant
/// digits); used for every CSV and mesh file we emit.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

} // namespace curvflow
