#include "kanto/parallel.hpp"

#include <cstdlib>
#include <string>

namespace kanto {

namespace {

unsigned initial_count() {
  if (const char* env = std::getenv("KANTO_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<unsigned>& count_slot() {
  static std::atomic<unsigned> slot{initial_count()};
  return slot;
}

}  // namespace

void set_thread_count(unsigned n) { count_slot().store(n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n); }

unsigned thread_count() { return count_slot().load(); }

bool& detail::in_parallel() {
  thread_local bool flag = false;
  return flag;
}

}  // namespace kanto
