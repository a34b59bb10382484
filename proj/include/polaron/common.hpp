#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace polaron {

inline constexpr const char* kVersion = "polaron 0.1.0";

// Thrown when a discretized solve loses validity (divergence, nonconvergence,
// ill-conditioning). Maps to CLI exit code 3.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a clone ensemble dies out completely. Maps to CLI exit code 4.
class extinction_error : public std::runtime_error {
 public:
  extinction_error(const std::string& what, double time_of_death)
      : std::runtime_error(what), time_of_death(time_of_death) {}
  double time_of_death;
};

// Thrown on config/argument validation failures. Maps to CLI exit code 2.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a requested problem size exceeds a hard capacity bound.
class capacity_error : public std::invalid_argument {
 public:
  explicit capacity_error(const std::string& what) : std::invalid_argument(what) {}
};

// Static-split parallel for. Work items must be independent; determinism of
// callers is guaranteed by keying all randomness on the item index, never on
// the executing thread.
inline void parallel_for(std::int64_t n, int n_threads, const std::function<void(std::int64_t)>& body) {
  if (n <= 0) return;
  if (n_threads <= 0) n_threads = static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int workers = static_cast<int>(std::min<std::int64_t>(n_threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::int64_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace polaron
