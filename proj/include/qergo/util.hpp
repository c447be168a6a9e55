#ifndef QERGO_UTIL_HPP
#define QERGO_UTIL_HPP

#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace qergo {

// Shortest round-trip decimal representation, stable across platforms for
// deterministic CSV bytes.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // try shorter forms
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

// Deterministic parallel map: item i writes only slot i, blocks are static,
// results do not depend on the thread count.
inline void parallel_for(int n, int threads,
                         const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += workers) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace qergo

#endif  // QERGO_UTIL_HPP
