#pragma once

#include <string>

namespace bamboo::model {

// Inputs of the contention model: K lock requests per transaction, N
// concurrent transactions, D data items, t mean time between lock
// requests.
struct ModelParams {
  double k = 16;
  double n = 32;
  double d = 1e6;
  double t = 1.0;
};

// The closed-form approximations leave their validity regime for extreme
// inputs; probabilities clamp to [0,1] with an explicit flag instead of
// silently lying.
struct ClampedProb {
  double value = 0;
  bool clamped = false;
};

// P_conflict ~ N*K^2 / (2*D)
ClampedProb p_conflict(const ModelParams& p);

// P_deadlock ~ N*K^4 / (4*D^2)
ClampedProb p_deadlock(const ModelParams& p);

// Upper bound on the cascading-abort probability: N * P_conflict * P_deadlock.
double cas_abort_bound(const ModelParams& p);

struct BenefitResult {
  bool holds = false;
  double margin = 0;  // rhs - lhs of  N^2*K^4/(2*D^2) < (K-1)/(K+1)
  std::string note;
};

// Retiring pays off when N^2*K^4 / (2*D^2) < (K-1)/(K+1).
BenefitResult bamboo_benefit_holds(const ModelParams& p);

struct ThroughputResult {
  double value = 0;
  bool clamped = false;
};

// Relative throughput: N/((K+1)*t) * (1 - A*P_conflict - B*P_abort).
ThroughputResult throughput_proportional(const ModelParams& p, double a, double p_conf, double b,
                                         double p_abort);

// Wait-fraction presets: a retiring transaction blocks for about one
// access, a conventional one for half the transaction on average.
inline double preset_a_bb(const ModelParams& p) { return 1.0 / (p.k + 1.0); }
inline double preset_a_ww(const ModelParams&) { return 0.5; }

}  // namespace bamboo::model
