#pragma once

#include <optional>

namespace presetforge {

/// Thread count from --threads, then PRESETFORGE_THREADS, then the number of
/// available cores. Strict mode always yields 1.
int resolve_thread_count(std::optional<int> requested, bool strict);

/// Applies the count to OpenMP for the rest of the process.
void set_thread_count(int n);
int thread_count();

}  // namespace presetforge
