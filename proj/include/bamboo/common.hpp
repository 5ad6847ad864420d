#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace bamboo {

using Key = uint64_t;
using TxnUid = uint64_t;  // unique per transaction attempt; 0 means "no transaction"
using Ts = uint64_t;      // priority timestamp; smaller = higher priority
inline constexpr Ts kTsUnassigned = 0;

using Payload = std::vector<uint8_t>;
using PayloadView = std::span<const uint8_t>;

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Small deterministic RNG; good enough statistically for workload sampling
// and fully reproducible across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }

  // Uniform in [0, n)
  uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next() % n; }

  // Uniform in [0, 1)
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

inline int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#elif defined(__aarch64__)
  asm volatile("yield" ::: "memory");
#else
  std::this_thread::yield();
#endif
}

// Spin helper: pause a few times, then yield to stay live when
// oversubscribed.
inline void spin_backoff(unsigned& spins) {
  if (++spins < 64) {
    cpu_relax();
  } else {
    spins = 0;
    std::this_thread::yield();
  }
}

}  // namespace bamboo
