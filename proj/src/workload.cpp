#include "bamboo/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace bamboo {

ZipfSampler::ZipfSampler(uint64_t n, double theta, uint64_t seed) {
  if (n == 0) throw std::invalid_argument("zipf: table size must be >= 1");
  if (theta < 0) throw std::invalid_argument("zipf: theta must be >= 0");

  // Vose alias method over w_i = i^-theta
  std::vector<double> w(n);
  double sum = 0;
  for (uint64_t i = 0; i < n; ++i) {
    w[i] = std::pow(static_cast<double>(i + 1), -theta);
    sum += w[i];
  }
  accept_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<uint32_t> small, large;
  std::vector<double> scaled(n);
  for (uint64_t i = 0; i < n; ++i) {
    scaled[i] = w[i] * static_cast<double>(n) / sum;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    uint32_t s = small.back();
    small.pop_back();
    uint32_t l = large.back();
    large.pop_back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = scaled[l] + scaled[s] - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (uint32_t i : large) accept_[i] = 1.0;
  for (uint32_t i : small) accept_[i] = 1.0;

  perm_.resize(n);
  for (uint64_t i = 0; i < n; ++i) perm_[i] = i;
  Rng rng(seed ^ 0x5d2f3c1a9b8e7d6cULL);
  for (uint64_t i = n; i > 1; --i) std::swap(perm_[i - 1], perm_[rng.next_below(i)]);
}

uint64_t ZipfSampler::sample_rank(Rng& rng) const {
  uint64_t n = perm_.size();
  uint64_t col = rng.next_below(n);
  return (rng.next_double() < accept_[col] ? col : alias_[col]) + 1;
}

namespace {

size_t delta_cutoff(size_t n, double delta) {
  size_t skipped = static_cast<size_t>(std::floor(delta * static_cast<double>(n) + 1e-9));
  return n - skipped;  // 1-based positions <= cutoff keep their retire plan
}

void apply_plan(TxnInstance& inst, const PlanParams& plan) {
  size_t cutoff = delta_cutoff(inst.accesses.size(), plan.delta);
  for (size_t i = 0; i < inst.accesses.size(); ++i) {
    auto& a = inst.accesses[i];
    if (a.mode != LockMode::EX) {
      a.retire = false;  // reads retire through policy flags, not plans
      continue;
    }
    a.retire = plan.retire_writes && (i + 1) <= cutoff;
  }
}

class SyntheticGen final : public InstanceGenerator {
 public:
  SyntheticGen(SyntheticSpec spec, uint64_t rows, uint32_t table, uint64_t seed, unsigned worker,
               PlanParams plan)
      : spec_(spec), rows_(rows), table_(table), plan_(plan),
        rng_(splitmix64(seed) ^ (0x9e3779b97f4a7c15ULL * (worker + 1))) {
    if (spec_.txn_len < 1) throw std::invalid_argument("synthetic: txn_len must be >= 1");
    hot_ordinal_.assign(spec_.txn_len, -1);
    for (size_t h = 0; h < spec_.hotspots.size(); ++h) {
      const auto& hs = spec_.hotspots[h];
      if (hs.pos < 0.0 || hs.pos > 1.0) {
        throw std::invalid_argument("synthetic: hotspot position must be in [0,1]");
      }
      if (hs.key >= rows_) throw std::invalid_argument("synthetic: hotspot key out of range");
      auto ord = static_cast<size_t>(std::floor(hs.pos * (spec_.txn_len - 1)));
      if (hot_ordinal_[ord] >= 0) {
        throw std::invalid_argument("synthetic: hotspots collide on ordinal " +
                                    std::to_string(ord));
      }
      hot_ordinal_[ord] = static_cast<int>(h);
      hot_keys_.push_back(hs.key);
    }
  }

  TxnInstance next() override {
    TxnInstance inst;
    inst.accesses.reserve(spec_.txn_len);
    std::vector<Key> used = hot_keys_;
    for (uint32_t i = 0; i < spec_.txn_len; ++i) {
      InstanceAccess a;
      a.table = table_;
      if (hot_ordinal_[i] >= 0) {
        // read-modify-write hotspot
        a.key = spec_.hotspots[hot_ordinal_[i]].key;
        a.mode = LockMode::EX;
      } else {
        Key k;
        do {
          k = rng_.next_below(rows_);
        } while (std::find(used.begin(), used.end(), k) != used.end());
        used.push_back(k);
        a.key = k;
        a.mode = rng_.next_double() < spec_.filler_read_ratio ? LockMode::SH : LockMode::EX;
      }
      inst.accesses.push_back(a);
    }
    inst.user_abort = spec_.user_abort_prob > 0 && rng_.next_double() < spec_.user_abort_prob;
    apply_plan(inst, plan_);
    return inst;
  }

 private:
  SyntheticSpec spec_;
  uint64_t rows_;
  uint32_t table_;
  PlanParams plan_;
  Rng rng_;
  std::vector<int> hot_ordinal_;
  std::vector<Key> hot_keys_;
};

class YcsbGen final : public InstanceGenerator {
 public:
  YcsbGen(YcsbSpec spec, uint64_t rows, uint32_t table, uint64_t seed, unsigned worker,
          PlanParams plan)
      : spec_(spec), table_(table), plan_(plan),
        rng_(splitmix64(seed) ^ (0xbf58476d1ce4e5b9ULL * (worker + 1))),
        zipf_(rows, spec.theta, seed) {
    if (spec_.txn_len > rows) {
      throw std::invalid_argument("ycsb: txn_len exceeds table size (keys are distinct)");
    }
  }

  TxnInstance next() override {
    TxnInstance inst;
    inst.accesses.reserve(spec_.txn_len);
    used_.clear();
    for (uint32_t i = 0; i < spec_.txn_len; ++i) {
      Key k = zipf_.sample(rng_);
      int tries = 0;
      while (used_.count(k)) {
        // duplicates within one transaction resample; after a burst of
        // collisions (tiny hot sets) fall back to a linear probe
        if (++tries > 64) {
          k = (k + 1) % zipf_.size();
        } else {
          k = zipf_.sample(rng_);
        }
      }
      used_.insert(k);
      InstanceAccess a;
      a.table = table_;
      a.key = k;
      a.mode = rng_.next_double() < spec_.read_ratio ? LockMode::SH : LockMode::EX;
      inst.accesses.push_back(a);
    }
    inst.user_abort = spec_.user_abort_prob > 0 && rng_.next_double() < spec_.user_abort_prob;
    apply_plan(inst, plan_);
    return inst;
  }

 private:
  YcsbSpec spec_;
  uint32_t table_;
  PlanParams plan_;
  Rng rng_;
  ZipfSampler zipf_;
  std::unordered_set<Key> used_;
};

class TemplateGen final : public InstanceGenerator {
 public:
  TemplateGen(TemplateWorkload spec, uint64_t rows, uint32_t table, uint64_t seed,
              unsigned worker, PlanParams plan)
      : tmpl_(std::move(spec.tmpl)), rows_(rows), table_(table), plan_(plan),
        rng_(splitmix64(seed) ^ (0x94d049bb133111ebULL * (worker + 1))) {
    decisions_ = plan_retires(tmpl_);
    if (plan.delta > 0) apply_delta(decisions_, plan.delta);
  }

  TxnInstance next() override {
    Binding b;
    b.keys.resize(tmpl_.key_params);
    for (auto& k : b.keys) k = rng_.next_below(rows_);
    b.flags.resize(tmpl_.flag_params);
    for (size_t i = 0; i < b.flags.size(); ++i) b.flags[i] = rng_.next_below(2) == 1;
    b.deriveds.resize(tmpl_.derived_slots);
    for (auto& k : b.deriveds) k = rng_.next_below(rows_);
    TxnInstance inst = instantiate(tmpl_, decisions_, b, table_);
    if (!plan_.retire_writes) {
      for (auto& a : inst.accesses) a.retire = false;
    }
    inst.user_abort =
        tmpl_.user_abort_prob > 0 && rng_.next_double() < tmpl_.user_abort_prob;
    return inst;
  }

 private:
  TxnTemplate tmpl_;
  std::vector<RetireDecision> decisions_;
  uint64_t rows_;
  uint32_t table_;
  PlanParams plan_;
  Rng rng_;
};

class MixtureGen final : public InstanceGenerator {
 public:
  MixtureGen(std::vector<double> probs, std::vector<std::unique_ptr<InstanceGenerator>> gens,
             uint64_t seed, unsigned worker)
      : probs_(std::move(probs)), gens_(std::move(gens)),
        rng_(splitmix64(seed ^ 0x123456789abcdefULL) ^ (worker + 1)) {}

  TxnInstance next() override {
    double x = rng_.next_double();
    double acc = 0;
    for (size_t i = 0; i < probs_.size(); ++i) {
      acc += probs_[i];
      if (x < acc) return gens_[i]->next();
    }
    return gens_.back()->next();
  }

 private:
  std::vector<double> probs_;
  std::vector<std::unique_ptr<InstanceGenerator>> gens_;
  Rng rng_;
};

std::unique_ptr<InstanceGenerator> make_simple(const SimpleWorkload& w, uint64_t rows,
                                               uint32_t table, uint64_t seed, unsigned worker,
                                               const PlanParams& plan) {
  if (const auto* s = std::get_if<SyntheticSpec>(&w)) {
    return std::make_unique<SyntheticGen>(*s, rows, table, seed, worker, plan);
  }
  if (const auto* y = std::get_if<YcsbSpec>(&w)) {
    return std::make_unique<YcsbGen>(*y, rows, table, seed, worker, plan);
  }
  return std::make_unique<TemplateGen>(std::get<TemplateWorkload>(w), rows, table, seed, worker,
                                       plan);
}

}  // namespace

std::unique_ptr<InstanceGenerator> make_generator(const WorkloadSpec& spec, uint64_t table_rows,
                                                  uint32_t table_id, uint64_t seed,
                                                  unsigned worker, const PlanParams& plan) {
  if (spec.components.empty()) throw std::invalid_argument("workload: no components");
  double total = 0;
  for (const auto& c : spec.components) total += c.prob;
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("workload: component probabilities must sum to 1");
  }
  if (spec.components.size() == 1) {
    return make_simple(spec.components[0].workload, table_rows, table_id, seed, worker, plan);
  }
  std::vector<double> probs;
  std::vector<std::unique_ptr<InstanceGenerator>> gens;
  for (size_t i = 0; i < spec.components.size(); ++i) {
    probs.push_back(spec.components[i].prob);
    gens.push_back(make_simple(spec.components[i].workload, table_rows, table_id,
                               seed + 7919 * (i + 1), worker, plan));
  }
  return std::make_unique<MixtureGen>(std::move(probs), std::move(gens), seed, worker);
}

namespace {

SimpleWorkload parse_simple(const nlohmann::json& j) {
  std::string type = j.value("type", "ycsb");
  if (type == "synthetic") {
    SyntheticSpec s;
    s.txn_len = j.value("txn_len", 16u);
    s.filler_read_ratio = j.value("filler_read_ratio", 1.0);
    s.user_abort_prob = j.value("user_abort_prob", 0.0);
    if (j.contains("hotspots")) {
      for (const auto& h : j["hotspots"]) {
        s.hotspots.push_back(HotspotDef{h.value("pos", 0.0), h.value("key", Key{0})});
      }
    }
    return s;
  }
  if (type == "ycsb") {
    YcsbSpec y;
    y.theta = j.value("theta", 0.0);
    y.read_ratio = j.value("read_ratio", 0.5);
    y.txn_len = j.value("txn_len", 16u);
    y.user_abort_prob = j.value("user_abort_prob", 0.0);
    return y;
  }
  if (type == "template") {
    TemplateWorkload t;
    t.tmpl = parse_template_json(j.at("template").dump());
    return t;
  }
  throw std::invalid_argument("workload type must be synthetic|ycsb|template|mixture");
}

}  // namespace

WorkloadSpec parse_workload_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  WorkloadSpec spec;
  if (j.value("type", "") == "mixture") {
    for (const auto& c : j.at("components")) {
      spec.components.push_back(
          MixtureComponent{c.value("prob", 0.0), parse_simple(c.at("workload"))});
    }
  } else {
    spec.components.push_back(MixtureComponent{1.0, parse_simple(j)});
  }
  return spec;
}

WorkloadSpec load_workload_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open workload file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_workload_json(os.str());
}

std::string workload_summary(const WorkloadSpec& spec) {
  std::ostringstream os;
  for (size_t i = 0; i < spec.components.size(); ++i) {
    if (i) os << " + ";
    const auto& c = spec.components[i];
    if (spec.components.size() > 1) os << c.prob << "*";
    if (const auto* s = std::get_if<SyntheticSpec>(&c.workload)) {
      os << "synthetic(K=" << s->txn_len << ",hotspots=" << s->hotspots.size() << ")";
    } else if (const auto* y = std::get_if<YcsbSpec>(&c.workload)) {
      os << "ycsb(theta=" << y->theta << ",rr=" << y->read_ratio << ",K=" << y->txn_len << ")";
    } else {
      os << "template(" << std::get<TemplateWorkload>(c.workload).tmpl.name << ")";
    }
  }
  return os.str();
}

}  // namespace bamboo
