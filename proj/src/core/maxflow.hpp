#ifndef SEGOPT_CORE_MAXFLOW_HPP
#define SEGOPT_CORE_MAXFLOW_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "core/errors.hpp"

namespace segopt {

/// Exact s-t min-cut / max-flow on sparse graphs with floating point
/// capacities. Augmenting paths with two search trees and orphan adoption
/// (Boykov-Kolmogorov style); terminal capacities are stored per node as a
/// signed residual.
class FlowNetwork {
 public:
  enum class Side { Source, Sink };

  FlowNetwork() = default;
  explicit FlowNetwork(std::size_t node_count) { add_nodes(node_count); }

  /// Appends `count` nodes and returns the index of the first one.
  std::size_t add_nodes(std::size_t count);
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Adds a directed arc pair u->v / v->u with the given capacities.
  /// Parallel calls accumulate capacity on separate arc pairs.
  void add_edge(std::size_t u, std::size_t v, double cap, double rev_cap);

  /// Accumulates terminal capacities; the overlapping part min(source, sink)
  /// is routed immediately and counted in the flow value.
  void add_terminal(std::size_t u, double source_cap, double sink_cap);

  /// Runs the solver (idempotent) and returns the max-flow value.
  double max_flow();

  bool solved() const noexcept { return solved_; }

  /// Min-cut side of a node; unreachable (free) nodes go to the sink side.
  Side cut_side(std::size_t u) const;

  double terminal_residual(std::size_t u) const;

  /// DIMACS max text format ("p max", "n .. s/t", "a u v cap"), 1-based ids
  /// with source and sink appended after the real nodes. Debug surface.
  void write_dimacs(std::ostream& out) const;
  static FlowNetwork read_dimacs(std::istream& in);

 private:
  // Residual capacities at or below this are treated as saturated so that
  // floating-point dust cannot produce endless augmentations.
  static constexpr double kSaturated = 1e-12;
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;
  enum : std::int8_t { kFree = 0, kSource = 1, kSink = 2 };

  struct Node {
    int first_arc = kNone;
    int parent_arc = kNone;  // kTerminal / kOrphan / kNone or arc index
    std::uint64_t timestamp = 0;
    std::uint32_t dist = 0;
    std::int8_t tree = kFree;
    double tr_cap = 0.0;  // > 0: residual from source; < 0: residual to sink
  };
  struct Arc {
    int head;
    int next;
    double r_cap;
  };

  int sister(int a) const noexcept { return a ^ 1; }
  void check_node(std::size_t u) const;
  void check_mutable() const;

  void set_active(int i);
  int next_active();
  void augment(int middle_arc);
  void process_orphan(int i);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<int> active_;
  std::size_t head_ = 0;
  std::vector<std::uint8_t> in_active_;
  std::vector<int> orphans_;
  std::uint64_t time_ = 0;
  double flow_ = 0.0;
  bool solved_ = false;
};

}  // namespace segopt

#endif
