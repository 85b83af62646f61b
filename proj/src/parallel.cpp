#include "pnskit/parallel.hpp"

#include <cstdlib>
#include <omp.h>
#include <string>

namespace pnskit {

void set_thread_count(int n) { omp_set_num_threads(n < 1 ? 1 : n); }

int thread_count() { return omp_get_max_threads(); }

std::optional<int> threads_from_env() {
  const char* v = std::getenv("PNS_TOOLKIT_THREADS");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(v, &used);
    if (used == std::char_traits<char>::length(v) && n > 0) return n;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

}  // namespace pnskit
