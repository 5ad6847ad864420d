#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bamboo {

enum class LockMode : uint8_t { SH = 0, EX = 1 };

constexpr bool conflicts(LockMode a, LockMode b) {
  return a == LockMode::EX || b == LockMode::EX;
}

inline const char* mode_name(LockMode m) { return m == LockMode::SH ? "SH" : "EX"; }

enum class ProtocolKind : uint8_t { BAMBOO = 0, WOUND_WAIT, WAIT_DIE, NO_WAIT };

// Optimization flags. Only BAMBOO honors the retire-related flags;
// dynamic timestamp assignment applies to every timestamp-based policy.
struct PolicyFlags {
  bool read_autoretire = false;  // reads land in retired inside LockAcquire
  bool delta_retire = false;     // skip retiring trailing writes
  double delta = 0.15;
  bool no_raw_abort = false;     // SH requests never wound EX holders
  bool dynamic_ts = false;       // assign timestamps on first conflict

  bool operator==(const PolicyFlags&) const = default;
};

struct ProtocolPolicy {
  ProtocolKind kind = ProtocolKind::BAMBOO;
  PolicyFlags flags;

  bool is_bamboo() const { return kind == ProtocolKind::BAMBOO; }

  bool uses_timestamps() const { return kind != ProtocolKind::NO_WAIT; }

  // Non-BAMBOO policies force every optimization flag except dynamic_ts off.
  ProtocolPolicy normalized() const {
    ProtocolPolicy p = *this;
    if (p.kind != ProtocolKind::BAMBOO) {
      bool dyn = p.flags.dynamic_ts;
      p.flags = PolicyFlags{};
      p.flags.dynamic_ts = dyn;
      p.flags.delta_retire = false;
    }
    if (p.flags.delta < 0.0 || p.flags.delta > 1.0) {
      throw std::invalid_argument("delta must be in [0,1]");
    }
    return p;
  }

  std::string name() const {
    switch (kind) {
      case ProtocolKind::BAMBOO: return "bamboo";
      case ProtocolKind::WOUND_WAIT: return "wound_wait";
      case ProtocolKind::WAIT_DIE: return "wait_die";
      case ProtocolKind::NO_WAIT: return "no_wait";
    }
    return "?";
  }

  static ProtocolKind parse_kind(const std::string& s) {
    if (s == "bamboo") return ProtocolKind::BAMBOO;
    if (s == "wound_wait") return ProtocolKind::WOUND_WAIT;
    if (s == "wait_die") return ProtocolKind::WAIT_DIE;
    if (s == "no_wait") return ProtocolKind::NO_WAIT;
    throw std::invalid_argument("unknown policy: " + s);
  }
};

}  // namespace bamboo
