#include "presetforge/threads.hpp"

#include <cstdlib>
#include <string>
#include <thread>

#include <omp.h>

#include "presetforge/error.hpp"

namespace presetforge {

int resolve_thread_count(std::optional<int> requested, bool strict) {
    if (strict) return 1;
    if (requested) {
        if (*requested < 1) throw Error(Errc::InvalidParameter, "thread count must be at least 1");
        return *requested;
    }
    if (const char* env = std::getenv("PRESETFORGE_THREADS"); env && *env) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        throw Error(Errc::InvalidParameter, std::string("bad PRESETFORGE_THREADS value: ") + env);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_count(int n) { omp_set_num_threads(n < 1 ? 1 : n); }

int thread_count() { return omp_get_max_threads(); }

}  // namespace presetforge
