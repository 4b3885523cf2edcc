#include "dropdecomp/exec.hpp"

#include <omp.h>

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

namespace dd {

namespace {
std::once_flag env_once;

void read_env() {
    if (const char* s = std::getenv("DROPDECOMP_THREADS")) {
        try {
            int n = std::stoi(s);
            if (n > 0) omp_set_num_threads(n);
        } catch (...) {
            // ignore malformed values; OpenMP defaults stay in place
        }
    }
}
}  // namespace

int thread_count() {
    std::call_once(env_once, read_env);
    return omp_get_max_threads();
}

void set_thread_count(int n) {
    std::call_once(env_once, read_env);
    if (n > 0) omp_set_num_threads(n);
}

void for_each_index(std::size_t n, Exec exec, const std::function<void(std::size_t)>& body) {
    if (exec == Exec::serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    thread_count();
    const long long m = static_cast<long long>(n);
    // exceptions may not cross the parallel region; keep the lowest index
    std::exception_ptr first;
    long long first_at = m;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < m; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(dd_exec_error)
            if (i < first_at) {
                first_at = i;
                first = std::current_exception();
            }
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace dd
