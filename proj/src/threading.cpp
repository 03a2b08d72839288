#include "msens/threading.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace msens {

int worker_count(int task_count) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("MSM_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1 && cap < hw) hw = cap;
        } catch (...) {
            // unparsable cap is ignored
        }
    }
    return task_count < hw ? (task_count < 1 ? 1 : task_count) : hw;
}

namespace {
thread_local bool inside_parallel_region = false;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    const int workers = inside_parallel_region ? 1 : worker_count(n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&]() {
        inside_parallel_region = true;
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                break;
            }
        }
        inside_parallel_region = false;
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace msens
