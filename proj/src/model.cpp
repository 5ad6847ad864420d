#include "bamboo/model.hpp"

#include <stdexcept>

namespace bamboo::model {

namespace {

void check(const ModelParams& p) {
  if (p.k <= 0 || p.n < 0 || p.d <= 0 || p.t <= 0) {
    throw std::invalid_argument("model: K, D, t must be positive and N >= 0");
  }
}

ClampedProb clamp01(double v) {
  if (v < 0) return {0, true};
  if (v > 1) return {1, true};
  return {v, false};
}

}  // namespace

ClampedProb p_conflict(const ModelParams& p) {
  check(p);
  return clamp01(p.n * p.k * p.k / (2.0 * p.d));
}

ClampedProb p_deadlock(const ModelParams& p) {
  check(p);
  return clamp01(p.n * p.k * p.k * p.k * p.k / (4.0 * p.d * p.d));
}

double cas_abort_bound(const ModelParams& p) {
  return p.n * p_conflict(p).value * p_deadlock(p).value;
}

BenefitResult bamboo_benefit_holds(const ModelParams& p) {
  check(p);
  BenefitResult r;
  double lhs = p.n * p.n * p.k * p.k * p.k * p.k / (2.0 * p.d * p.d);
  double rhs = (p.k - 1.0) / (p.k + 1.0);
  r.margin = rhs - lhs;
  r.holds = lhs < rhs;
  if (p.k <= 1.0) {
    r.holds = false;
    r.note = "single-access transactions gain nothing from retiring";
  }
  return r;
}

ThroughputResult throughput_proportional(const ModelParams& p, double a, double p_conf, double b,
                                         double p_abort) {
  check(p);
  if (a < 0 || a > 1 || b < 0 || b > 1 || p_conf < 0 || p_conf > 1 || p_abort < 0 ||
      p_abort > 1) {
    throw std::invalid_argument("model: A, B and probabilities must be in [0,1]");
  }
  double v = p.n / ((p.k + 1.0) * p.t) * (1.0 - a * p_conf - b * p_abort);
  if (v < 0) return {0, true};
  return {v, false};
}

}  // namespace bamboo::model
