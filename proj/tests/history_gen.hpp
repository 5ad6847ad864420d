#pragma once

#include <algorithm>
#include <vector>

#include "bamboo/common.hpp"
#include "bamboo/history.hpp"

namespace bamboo::testing {

// Random committed history: per tuple a random install order, plus reads
// observing arbitrary versions (including the initial one), so both
// serializable and non-serializable histories come out. At most one
// access per (txn, tuple); commit sequence numbers are a random
// permutation.
inline HistoryBuffer random_history(uint64_t seed, int max_txns = 5, int keys = 3) {
  Rng rng(seed);
  int n = 2 + static_cast<int>(rng.next_below(static_cast<uint64_t>(max_txns - 1)));
  HistoryBuffer h;

  struct Acc {
    bool writes = false;
    bool reads = false;
    TxnUid observed = 0;
    uint64_t installed_seq = 0;
  };
  std::vector<std::vector<Acc>> acc(static_cast<size_t>(n) + 1,
                                    std::vector<Acc>(static_cast<size_t>(keys)));

  for (int k = 0; k < keys; ++k) {
    std::vector<int> writers;
    for (int t = 1; t <= n; ++t) {
      if (rng.next_below(100) < 40) writers.push_back(t);
    }
    for (size_t i = writers.size(); i > 1; --i) {
      std::swap(writers[i - 1], writers[rng.next_below(i)]);
    }
    for (size_t i = 0; i < writers.size(); ++i) {
      Acc& a = acc[writers[i]][k];
      a.writes = true;
      a.installed_seq = i + 1;
      // RMW observation: any version other than its own
      std::vector<TxnUid> choices{0};
      for (size_t j = 0; j < writers.size(); ++j) {
        if (j != i) choices.push_back(static_cast<TxnUid>(writers[j]));
      }
      a.observed = choices[rng.next_below(choices.size())];
    }
    for (int t = 1; t <= n; ++t) {
      Acc& a = acc[t][k];
      if (a.writes) continue;
      if (rng.next_below(100) < 40) {
        a.reads = true;
        std::vector<TxnUid> choices{0};
        for (int w : writers) {
          if (w != t) choices.push_back(static_cast<TxnUid>(w));
        }
        a.observed = choices[rng.next_below(choices.size())];
      }
    }
  }

  std::vector<uint64_t> seqs(n);
  for (int i = 0; i < n; ++i) seqs[i] = i + 1;
  for (size_t i = seqs.size(); i > 1; --i) std::swap(seqs[i - 1], seqs[rng.next_below(i)]);

  for (int t = 1; t <= n; ++t) {
    HistTxn txn;
    txn.uid = static_cast<TxnUid>(t);
    txn.ts = static_cast<Ts>(t);
    txn.status = TxnStatus::COMMITTED;
    txn.commit_seq = seqs[t - 1];
    txn.acc_begin = static_cast<uint32_t>(h.accesses.size());
    for (int k = 0; k < keys; ++k) {
      const Acc& a = acc[t][k];
      if (!a.writes && !a.reads) continue;
      HistAccess ha;
      ha.key = static_cast<Key>(k);
      ha.table = 0;
      ha.mode = a.writes ? LockMode::EX : LockMode::SH;
      ha.observed = a.observed;
      ha.installed_seq = a.installed_seq;
      h.accesses.push_back(ha);
    }
    txn.acc_end = static_cast<uint32_t>(h.accesses.size());
    h.txns.push_back(txn);
  }
  return h;
}

}  // namespace bamboo::testing
