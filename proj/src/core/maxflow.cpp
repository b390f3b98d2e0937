#include "core/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace segopt {

namespace {
void check_capacity(double cap, const char* what) {
  require(std::isfinite(cap) && cap >= 0.0, ErrorCode::InvalidArgument,
          std::string(what) + " capacity must be finite and nonnegative");
}
}  // namespace

void FlowNetwork::check_node(std::size_t u) const {
  require(u < nodes_.size(), ErrorCode::InvalidArgument,
          "node index out of range");
}

void FlowNetwork::check_mutable() const {
  require(!solved_, ErrorCode::State,
          "network is finalized; construct a new one to modify");
}

std::size_t FlowNetwork::add_nodes(std::size_t count) {
  check_mutable();
  const std::size_t first = nodes_.size();
  nodes_.resize(first + count);
  in_active_.resize(first + count, 0);
  return first;
}

void FlowNetwork::add_edge(std::size_t u, std::size_t v, double cap,
                           double rev_cap) {
  check_mutable();
  check_node(u);
  check_node(v);
  require(u != v, ErrorCode::InvalidArgument, "self-loops are not allowed");
  check_capacity(cap, "edge");
  check_capacity(rev_cap, "edge");
  const int a = static_cast<int>(arcs_.size());
  arcs_.push_back({static_cast<int>(v), nodes_[u].first_arc, cap});
  arcs_.push_back({static_cast<int>(u), nodes_[v].first_arc, rev_cap});
  nodes_[u].first_arc = a;
  nodes_[v].first_arc = a + 1;
}

void FlowNetwork::add_terminal(std::size_t u, double source_cap,
                               double sink_cap) {
  check_mutable();
  check_node(u);
  check_capacity(source_cap, "terminal");
  check_capacity(sink_cap, "terminal");
  const double delta = nodes_[u].tr_cap;
  if (delta > 0.0) {
    source_cap += delta;
  } else {
    sink_cap -= delta;
  }
  flow_ += std::min(source_cap, sink_cap);
  nodes_[u].tr_cap = source_cap - sink_cap;
}

void FlowNetwork::set_active(int i) {
  if (!in_active_[i]) {
    in_active_[i] = 1;
    active_.push_back(i);
  }
}

int FlowNetwork::next_active() {
  while (head_ < active_.size()) {
    const int i = active_[head_++];
    in_active_[i] = 0;
    if (nodes_[i].tree != kFree) return i;
  }
  // Compact the consumed prefix lazily.
  active_.clear();
  head_ = 0;
  return kNone;
}

double FlowNetwork::max_flow() {
  if (solved_) return flow_;
  solved_ = true;

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.tr_cap > kSaturated) {
      n.tree = kSource;
      n.parent_arc = kTerminal;
      n.dist = 1;
      n.timestamp = 0;
      set_active(static_cast<int>(i));
    } else if (n.tr_cap < -kSaturated) {
      n.tree = kSink;
      n.parent_arc = kTerminal;
      n.dist = 1;
      n.timestamp = 0;
      set_active(static_cast<int>(i));
    }
  }

  int current = kNone;
  while (true) {
    int i = current;
    if (i != kNone && nodes_[i].tree == kFree) i = kNone;
    if (i == kNone) {
      i = next_active();
      if (i == kNone) break;
    }
    current = kNone;

    // Growth: scan residual arcs out of i for a free node or the other tree.
    int middle = kNone;
    const bool from_source = nodes_[i].tree == kSource;
    for (int a = nodes_[i].first_arc; a != kNone; a = arcs_[a].next) {
      const double usable =
          from_source ? arcs_[a].r_cap : arcs_[sister(a)].r_cap;
      if (usable <= kSaturated) continue;
      const int j = arcs_[a].head;
      Node& nj = nodes_[j];
      if (nj.tree == kFree) {
        nj.tree = nodes_[i].tree;
        nj.parent_arc = sister(a);
        nj.timestamp = nodes_[i].timestamp;
        nj.dist = nodes_[i].dist + 1;
        set_active(j);
      } else if (nj.tree != nodes_[i].tree) {
        middle = from_source ? a : sister(a);
        break;
      } else if (nj.timestamp <= nodes_[i].timestamp &&
                 nj.dist > nodes_[i].dist) {
        // Shorter path to the terminal through i; re-parent.
        nj.parent_arc = sister(a);
        nj.timestamp = nodes_[i].timestamp;
        nj.dist = nodes_[i].dist + 1;
      }
    }

    if (middle == kNone) continue;

    ++time_;
    augment(middle);
    // Keep growing from i next round; it may still have usable arcs.
    current = i;

    // Adoption; process_orphan may append further orphans.
    for (std::size_t oi = 0; oi < orphans_.size(); ++oi) {
      const int orphan = orphans_[oi];
      if (nodes_[orphan].parent_arc == kOrphan) process_orphan(orphan);
    }
    orphans_.clear();
  }

  return flow_;
}

void FlowNetwork::augment(int middle_arc) {
  // Bottleneck over the source-side path, the middle arc, and the sink side.
  double bottleneck = arcs_[middle_arc].r_cap;
  int i = arcs_[sister(middle_arc)].head;
  while (true) {
    const int a = nodes_[i].parent_arc;
    if (a == kTerminal) break;
    bottleneck = std::min(bottleneck, arcs_[sister(a)].r_cap);
    i = arcs_[a].head;
  }
  bottleneck = std::min(bottleneck, nodes_[i].tr_cap);

  i = arcs_[middle_arc].head;
  while (true) {
    const int a = nodes_[i].parent_arc;
    if (a == kTerminal) break;
    bottleneck = std::min(bottleneck, arcs_[a].r_cap);
    i = arcs_[a].head;
  }
  bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

  // Push and orphan saturated path arcs.
  arcs_[sister(middle_arc)].r_cap += bottleneck;
  arcs_[middle_arc].r_cap -= bottleneck;

  i = arcs_[sister(middle_arc)].head;
  while (true) {
    const int a = nodes_[i].parent_arc;
    if (a == kTerminal) break;
    arcs_[a].r_cap += bottleneck;
    arcs_[sister(a)].r_cap -= bottleneck;
    if (arcs_[sister(a)].r_cap <= kSaturated) {
      nodes_[i].parent_arc = kOrphan;
      orphans_.push_back(i);
    }
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap -= bottleneck;
  if (nodes_[i].tr_cap <= kSaturated) {
    nodes_[i].parent_arc = kOrphan;
    orphans_.push_back(i);
  }

  i = arcs_[middle_arc].head;
  while (true) {
    const int a = nodes_[i].parent_arc;
    if (a == kTerminal) break;
    arcs_[sister(a)].r_cap += bottleneck;
    arcs_[a].r_cap -= bottleneck;
    if (arcs_[a].r_cap <= kSaturated) {
      nodes_[i].parent_arc = kOrphan;
      orphans_.push_back(i);
    }
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap += bottleneck;
  if (nodes_[i].tr_cap >= -kSaturated) {
    nodes_[i].parent_arc = kOrphan;
    orphans_.push_back(i);
  }

  flow_ += bottleneck;
}

void FlowNetwork::process_orphan(int i) {
  const std::int8_t tree = nodes_[i].tree;
  const std::uint32_t inf_dist = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t best_dist = inf_dist;
  int best_arc = kNone;

  for (int a0 = nodes_[i].first_arc; a0 != kNone; a0 = arcs_[a0].next) {
    const double usable =
        tree == kSource ? arcs_[sister(a0)].r_cap : arcs_[a0].r_cap;
    if (usable <= kSaturated) continue;
    int j = arcs_[a0].head;
    if (nodes_[j].tree != tree || nodes_[j].parent_arc == kNone) continue;

    // Walk to the terminal to verify the candidate parent's origin.
    std::uint32_t d = 0;
    bool valid = false;
    int walk = j;
    while (true) {
      if (nodes_[walk].timestamp == time_) {
        d += nodes_[walk].dist;
        valid = true;
        break;
      }
      const int a = nodes_[walk].parent_arc;
      ++d;
      if (a == kTerminal) {
        nodes_[walk].timestamp = time_;
        nodes_[walk].dist = 1;
        valid = true;
        break;
      }
      if (a == kOrphan || a == kNone) break;
      walk = arcs_[a].head;
    }
    if (!valid) continue;

    if (d < best_dist) {
      best_arc = a0;
      best_dist = d;
    }
    // Cache distances along the verified path.
    for (walk = j; nodes_[walk].timestamp != time_;
         walk = arcs_[nodes_[walk].parent_arc].head) {
      nodes_[walk].timestamp = time_;
      nodes_[walk].dist = d--;
    }
  }

  if (best_arc != kNone) {
    nodes_[i].parent_arc = best_arc;
    nodes_[i].timestamp = time_;
    nodes_[i].dist = best_dist + 1;
    return;
  }

  // No parent: i leaves the tree; children become orphans, neighbors with
  // usable arcs become active again.
  for (int a0 = nodes_[i].first_arc; a0 != kNone; a0 = arcs_[a0].next) {
    const int j = arcs_[a0].head;
    if (nodes_[j].tree != tree || nodes_[j].parent_arc == kNone) continue;
    const double usable =
        tree == kSource ? arcs_[sister(a0)].r_cap : arcs_[a0].r_cap;
    if (usable > kSaturated) set_active(j);
    const int pa = nodes_[j].parent_arc;
    if (pa != kTerminal && pa != kOrphan && arcs_[pa].head == i) {
      nodes_[j].parent_arc = kOrphan;
      orphans_.push_back(j);
    }
  }
  nodes_[i].tree = kFree;
  nodes_[i].parent_arc = kNone;
}

FlowNetwork::Side FlowNetwork::cut_side(std::size_t u) const {
  require(solved_, ErrorCode::State, "cut_side requires max_flow first");
  check_node(u);
  return nodes_[u].tree == kSource ? Side::Source : Side::Sink;
}

double FlowNetwork::terminal_residual(std::size_t u) const {
  check_node(u);
  return nodes_[u].tr_cap;
}

void FlowNetwork::write_dimacs(std::ostream& out) const {
  const std::size_t n = nodes_.size();
  std::size_t m = 0;
  for (const auto& arc : arcs_) {
    if (arc.r_cap > 0.0) ++m;
  }
  for (const auto& node : nodes_) {
    if (node.tr_cap != 0.0) ++m;
  }
  const std::size_t s = n + 1;
  const std::size_t t = n + 2;
  out << "p max " << n + 2 << " " << m << "\n";
  out << "n " << s << " s\n";
  out << "n " << t << " t\n";
  char buf[64];
  for (std::size_t u = 0; u < n; ++u) {
    const double tr = nodes_[u].tr_cap;
    if (tr > 0.0) {
      std::snprintf(buf, sizeof buf, "%.17g", tr);
      out << "a " << s << " " << u + 1 << " " << buf << "\n";
    } else if (tr < 0.0) {
      std::snprintf(buf, sizeof buf, "%.17g", -tr);
      out << "a " << u + 1 << " " << t << " " << buf << "\n";
    }
  }
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    if (arcs_[a].r_cap <= 0.0) continue;
    const std::size_t u = arcs_[a ^ 1].head;
    const std::size_t v = arcs_[a].head;
    std::snprintf(buf, sizeof buf, "%.17g", arcs_[a].r_cap);
    out << "a " << u + 1 << " " << v + 1 << " " << buf << "\n";
  }
}

FlowNetwork FlowNetwork::read_dimacs(std::istream& in) {
  std::string line;
  long n = -1, s = -1, t = -1;
  FlowNetwork net;
  bool sized = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    char kind;
    ls >> kind;
    if (kind == 'p') {
      std::string word;
      long m;
      if (!(ls >> word >> n >> m) || word != "max" || n < 2) {
        fail(ErrorCode::Io, "bad DIMACS problem line: " + line);
      }
    } else if (kind == 'n') {
      long id;
      char role;
      if (!(ls >> id >> role)) fail(ErrorCode::Io, "bad DIMACS node line: " + line);
      if (role == 's') s = id;
      if (role == 't') t = id;
    } else if (kind == 'a') {
      require(n >= 2 && s > 0 && t > 0, ErrorCode::Io,
              "DIMACS arcs before problem/source/sink lines");
      if (!sized) {
        net.add_nodes(static_cast<std::size_t>(n));
        sized = true;
      }
      long u, v;
      double cap;
      if (!(ls >> u >> v >> cap)) fail(ErrorCode::Io, "bad DIMACS arc line: " + line);
      require(u >= 1 && u <= n && v >= 1 && v <= n, ErrorCode::Io,
              "DIMACS arc endpoint out of range");
      if (u == s) {
        net.add_terminal(static_cast<std::size_t>(v - 1), cap, 0.0);
      } else if (v == t) {
        net.add_terminal(static_cast<std::size_t>(u - 1), 0.0, cap);
      } else {
        net.add_edge(static_cast<std::size_t>(u - 1),
                     static_cast<std::size_t>(v - 1), cap, 0.0);
      }
    }
  }
  require(sized || n >= 0, ErrorCode::Io, "missing DIMACS problem line");
  if (!sized && n >= 0) net.add_nodes(static_cast<std::size_t>(n));
  return net;
}

}  // namespace segopt
