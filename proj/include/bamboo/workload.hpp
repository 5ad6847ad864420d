#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "bamboo/common.hpp"
#include "bamboo/retire_planner.hpp"

namespace bamboo {

// Zipfian sampler over ranks 1..N with p(i) proportional to 1/i^theta,
// exact via an alias table; ranks map to keys through a fixed seeded
// permutation so popular keys are spread over the key space.
class ZipfSampler {
 public:
  ZipfSampler(uint64_t n, double theta, uint64_t seed);

  uint64_t sample_rank(Rng& rng) const;  // 1-based rank
  Key sample(Rng& rng) const { return perm_[sample_rank(rng) - 1]; }
  Key key_for_rank(uint64_t rank) const { return perm_[rank - 1]; }
  uint64_t size() const { return perm_.size(); }

 private:
  std::vector<double> accept_;
  std::vector<uint32_t> alias_;
  std::vector<Key> perm_;
};

struct HotspotDef {
  double pos = 0.0;  // fractional position in [0,1]
  Key key = 0;
};

// Synthetic single/two-hotspot workload: K accesses, read-modify-write
// hotspots at floor(pos*(K-1)), fillers sampled uniformly over the table
// excluding hotspot keys.
struct SyntheticSpec {
  uint32_t txn_len = 16;
  std::vector<HotspotDef> hotspots;
  double filler_read_ratio = 1.0;
  double user_abort_prob = 0.0;
};

struct YcsbSpec {
  double theta = 0.0;
  double read_ratio = 0.5;
  uint32_t txn_len = 16;
  double user_abort_prob = 0.0;
};

struct TemplateWorkload {
  TxnTemplate tmpl;  // parameters bound uniformly at random per instance
};

using SimpleWorkload = std::variant<SyntheticSpec, YcsbSpec, TemplateWorkload>;

struct MixtureComponent {
  double prob = 1.0;
  SimpleWorkload workload;
};

struct WorkloadSpec {
  std::vector<MixtureComponent> components;

  static WorkloadSpec single(SimpleWorkload w) {
    WorkloadSpec s;
    s.components.push_back(MixtureComponent{1.0, std::move(w)});
    return s;
  }
};

// Plan-time knobs applied to generated instances.
struct PlanParams {
  double delta = 0.0;       // 0 disables the trailing-access cut
  bool retire_writes = true;  // false: no write ever carries a retire plan
};

class InstanceGenerator {
 public:
  virtual ~InstanceGenerator() = default;
  virtual TxnInstance next() = 0;
};

// Deterministic per (seed, worker): each worker draws an independent
// sub-stream so multi-threaded runs are reproducible in aggregate.
std::unique_ptr<InstanceGenerator> make_generator(const WorkloadSpec& spec, uint64_t table_rows,
                                                  uint32_t table_id, uint64_t seed,
                                                  unsigned worker, const PlanParams& plan);

WorkloadSpec parse_workload_json(const std::string& text);
WorkloadSpec load_workload_file(const std::string& path);
std::string workload_summary(const WorkloadSpec& spec);

}  // namespace bamboo
