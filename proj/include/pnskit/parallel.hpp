#pragma once

#include <optional>

namespace pnskit {

// Sets the OpenMP team size for later parallel kernels (n >= 1).
void set_thread_count(int n);
int thread_count();

// Value of PNS_TOOLKIT_THREADS, when set to a positive integer.
std::optional<int> threads_from_env();

}  // namespace pnskit
