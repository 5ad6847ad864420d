#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bamboo/history.hpp"

namespace bamboo {

enum class EdgeKind : uint8_t { WR, WW, RW };

struct Edge {
  TxnUid from = 0;
  TxnUid to = 0;
  EdgeKind kind = EdgeKind::WR;
  uint32_t table = 0;
  Key key = 0;
};

struct SerializationGraph {
  std::vector<TxnUid> nodes;  // committed transactions
  std::vector<Edge> edges;
};

struct ValidationReport {
  bool acyclic = true;
  uint64_t integrity_violations = 0;      // committed read of a missing/aborted write
  uint64_t commit_order_violations = 0;   // edge (i,j) with seq(i) >= seq(j)
  uint64_t version_order_violations = 0;  // install order vs commit-point order
  uint64_t committed = 0;
  uint64_t aborted = 0;
  std::vector<TxnUid> cycle_witness;      // non-empty when !acyclic (explicit graph path)
  std::string method;                     // "graph" or "streaming-audit"

  bool ok() const {
    return acyclic && integrity_violations == 0 && commit_order_violations == 0 &&
           version_order_violations == 0;
  }
};

// Explicit conflict-graph construction over committed transactions:
// WR writer->reader per version read, WW per adjacent installed versions,
// RW reader->next writer. Throws std::runtime_error if a committed reader
// observed a version whose writer is missing or aborted (cascade leak).
SerializationGraph build_graph(const HistoryBuffer& history);

// Cycle detection; fills `witness` with one cycle (node sequence) if any.
bool check_acyclic(const SerializationGraph& graph, std::vector<TxnUid>* witness = nullptr);

// Brute-force serial-equivalence oracle, independent of graph
// construction: some permutation of the committed transactions must agree
// with every recorded version order and read. Refuses > limit txns.
bool oracle_serializable(const HistoryBuffer& history, size_t limit = 8);

// Commit-point ordering: every edge (i,j) needs seq(i) < seq(j).
uint64_t check_commit_ordering(const SerializationGraph& graph,
                               const HistoryBuffer& history);

// Full post-run pass. Histories up to `graph_node_limit` committed txns are
// additionally checked through the explicit graph; larger ones rely on the
// streaming per-tuple audit (every edge respecting commit order implies
// acyclicity, since commit sequence numbers form a topological order).
ValidationReport validate_history(const HistoryBuffer& history,
                                  size_t graph_node_limit = 200000);

}  // namespace bamboo
