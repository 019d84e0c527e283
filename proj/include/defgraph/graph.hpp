#pragma once

// Defense-graph data model: countermeasure elements feed techniques, and
// techniques feed the single protected component. Every node is a binary
// variable whose true state means "the attack is detected here".

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defgraph/error.hpp"
#include "defgraph/scoring.hpp"

namespace defgraph {

/// Leak used when a gate does not state one: the complement of the
/// strongest confidence level (0.995).
inline constexpr double kDefaultLeak = 0.005;

/// Discrete edge-confidence levels used for transmit coefficients.
inline constexpr double kAlmostSure = 0.995;
inline constexpr double kProbable = 0.99;
inline constexpr double kHighlyExpected = 0.95;
inline constexpr double kExpected = 0.90;

class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string value) : value_(std::move(value)) {}
  explicit NodeId(const char* value) : value_(value) {}

  const std::string& str() const noexcept { return value_; }

  /// Matches [a-z][a-z0-9_]*.
  bool is_well_formed() const noexcept { return is_well_formed(value_); }

  static bool is_well_formed(std::string_view s) noexcept {
    if (s.empty() || s.front() < 'a' || s.front() > 'z') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
  }

  auto operator<=>(const NodeId&) const = default;

 private:
  std::string value_;
};

inline namespace literals {
inline NodeId operator""_id(const char* s, std::size_t n) { return NodeId(std::string(s, n)); }
}  // namespace literals

enum class NodeKind { Element, Technique, Component };

inline std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Element:
      return "element";
    case NodeKind::Technique:
      return "technique";
    case NodeKind::Component:
      return "component";
  }
  return "?";
}

enum class GateKind { NoisyAnd, NoisyOr, Table };

inline std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::NoisyAnd:
      return "noisy_and";
    case GateKind::NoisyOr:
      return "noisy_or";
    case GateKind::Table:
      return "table";
  }
  return "?";
}

/// How an internal node combines its parents. The per-parent transmit
/// coefficients live on the incoming edges.
struct GateSpec {
  GateKind kind = GateKind::NoisyAnd;
  double leak = kDefaultLeak;  // noisy gates only
  std::vector<double> rows;    // table gates only, indexed by parent bit pattern

  static GateSpec noisy_and(double leak = kDefaultLeak) { return {GateKind::NoisyAnd, leak, {}}; }
  static GateSpec noisy_or(double leak = kDefaultLeak) { return {GateKind::NoisyOr, leak, {}}; }
  static GateSpec table(std::vector<double> rows) { return {GateKind::Table, 0.0, std::move(rows)}; }

  bool operator==(const GateSpec&) const = default;
};

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::Element;
  std::string label;
  std::optional<double> prior;         // roots only
  std::optional<PriorRating> rating;   // provenance of `prior`, if rated
  std::optional<GateSpec> gate;        // internal nodes only

  bool operator==(const Node&) const = default;
};

/// Directed edge parent -> child carrying the transmit coefficient (zeta),
/// the reliability of the link between the two nodes.
struct Edge {
  NodeId parent;
  NodeId child;
  double transmit = 1.0;

  bool operator==(const Edge&) const = default;
};

/// Conditional probability table of a binary child. rows[p] is
/// P(child = true | parents), where bit j of p is set iff parents[j] is true.
struct Cpt {
  std::vector<NodeId> parents;
  std::vector<double> rows;

  bool operator==(const Cpt&) const = default;
};

/// One defense graph models the security state of one protected component.
/// Treat it as immutable once validated; queries below are read-only.
struct DefenseGraph {
  std::string name;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  double impact = 1.0;
  std::optional<EvitaImpactRating> impact_rating;

  bool operator==(const DefenseGraph&) const = default;

  const Node* find(const NodeId& id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
  }

  Node* find(const NodeId& id) {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
  }

  const Node& node(const NodeId& id) const {
    if (const Node* n = find(id)) return *n;
    throw std::out_of_range("unknown node '" + id.str() + "'");
  }

  /// Incoming edges of `id`, ordered by parent id. This order fixes CPT row indexing.
  std::vector<Edge> in_edges(const NodeId& id) const {
    std::vector<Edge> out;
    for (const auto& e : edges)
      if (e.child == id) out.push_back(e);
    std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return a.parent < b.parent; });
    return out;
  }

  std::vector<NodeId> parents(const NodeId& id) const {
    std::vector<NodeId> out;
    for (const auto& e : in_edges(id)) out.push_back(e.parent);
    return out;
  }

  std::vector<NodeId> children(const NodeId& id) const {
    std::vector<NodeId> out;
    for (const auto& e : edges)
      if (e.parent == id) out.push_back(e.child);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<NodeId> ids_of_kind(NodeKind kind) const {
    std::vector<NodeId> out;
    for (const auto& n : nodes)
      if (n.kind == kind) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Technique ids in lexicographic order; bit j of a subset mask is techniques()[j].
  std::vector<NodeId> techniques() const { return ids_of_kind(NodeKind::Technique); }

  std::optional<NodeId> component() const {
    auto ids = ids_of_kind(NodeKind::Component);
    if (ids.size() != 1) return std::nullopt;
    return ids.front();
  }

  /// Technique -> the element nodes that feed it directly.
  std::map<NodeId, std::set<NodeId>> technique_membership() const {
    std::map<NodeId, std::set<NodeId>> out;
    for (const auto& t : techniques()) {
      auto& members = out[t];
      for (const auto& p : parents(t)) {
        const Node* n = find(p);
        if (n != nullptr && n->kind == NodeKind::Element) members.insert(p);
      }
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  InvalidNodeId,
  DuplicateNode,
  UnknownEdgeEndpoint,
  SelfLoop,
  DuplicateEdge,
  TransmitOutOfRange,
  ImpactOutOfRange,
  MissingPrior,
  UnexpectedPrior,
  MissingGate,
  UnexpectedGate,
  PriorOutOfRange,
  InvalidRating,
  RatingMismatch,
  LeakOutOfRange,
  TableRowCount,
  TableRowOutOfRange,
  Cycle,
  ComponentCount,
  ComponentNotSink,
  ComponentParentNotTechnique,
  ExtraSink,
  TechniqueUnreachable,
  ElementHasParents,
};

inline std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::InvalidNodeId: return "invalid-node-id";
    case ViolationKind::DuplicateNode: return "duplicate-node";
    case ViolationKind::UnknownEdgeEndpoint: return "unknown-edge-endpoint";
    case ViolationKind::SelfLoop: return "self-loop";
    case ViolationKind::DuplicateEdge: return "duplicate-edge";
    case ViolationKind::TransmitOutOfRange: return "transmit-out-of-range";
    case ViolationKind::ImpactOutOfRange: return "impact-out-of-range";
    case ViolationKind::MissingPrior: return "missing-prior";
    case ViolationKind::UnexpectedPrior: return "unexpected-prior";
    case ViolationKind::MissingGate: return "missing-gate";
    case ViolationKind::UnexpectedGate: return "unexpected-gate";
    case ViolationKind::PriorOutOfRange: return "prior-out-of-range";
    case ViolationKind::InvalidRating: return "invalid-rating";
    case ViolationKind::RatingMismatch: return "rating-mismatch";
    case ViolationKind::LeakOutOfRange: return "leak-out-of-range";
    case ViolationKind::TableRowCount: return "table-row-count";
    case ViolationKind::TableRowOutOfRange: return "table-row-out-of-range";
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::ComponentCount: return "component-count";
    case ViolationKind::ComponentNotSink: return "component-not-sink";
    case ViolationKind::ComponentParentNotTechnique: return "component-parent-not-technique";
    case ViolationKind::ExtraSink: return "extra-sink";
    case ViolationKind::TechniqueUnreachable: return "technique-unreachable";
    case ViolationKind::ElementHasParents: return "element-has-parents";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::vector<std::string> subjects;  // offending node ids, or "parent->child" for edges
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }

  bool has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
  }

  std::size_t count(ViolationKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
  }

  std::string to_string() const {
    std::string out;
    for (const auto& v : violations) {
      out += defgraph::to_string(v.kind);
      out += ": ";
      out += v.message;
      out += '\n';
    }
    return out;
  }
};

/// Raised when an operation requires a valid graph and gets an invalid one.
class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report)
      : Error("invalid defense graph:\n" + report.to_string()), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

namespace detail {

inline bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

inline std::string edge_name(const Edge& e) { return e.parent.str() + "->" + e.child.str(); }

// Strongly connected components with more than one member (Tarjan).
inline std::vector<std::vector<std::size_t>> nontrivial_sccs(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;

  // Iterative DFS; frames hold (vertex, next child position).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < adj[v].size()) {
        std::size_t w = adj[v][pos++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) {
        std::size_t parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<std::size_t> scc;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          scc.push_back(w);
        } while (w != done);
        if (scc.size() > 1) out.push_back(std::move(scc));
      }
    }
  }
  return out;
}

}  // namespace detail

/// Checks every structural and probabilistic invariant of the model and
/// reports each violation with the offending ids. An empty report means valid.
inline ValidationReport validate(const DefenseGraph& graph) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::vector<std::string> subjects, std::string message) {
    report.violations.push_back({kind, std::move(subjects), std::move(message)});
  };

  // Nodes: ids.
  std::map<NodeId, std::size_t> index;
  for (const auto& n : graph.nodes) {
    if (!n.id.is_well_formed())
      add(ViolationKind::InvalidNodeId, {n.id.str()}, "node id '" + n.id.str() + "' must match [a-z][a-z0-9_]*");
    if (!index.emplace(n.id, index.size()).second)
      add(ViolationKind::DuplicateNode, {n.id.str()}, "node '" + n.id.str() + "' declared more than once");
  }

  if (!detail::in_unit(graph.impact))
    add(ViolationKind::ImpactOutOfRange, {}, "impact " + std::to_string(graph.impact) + " is outside [0,1]");

  // Edges. Only well-formed edges take part in the structural checks below.
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<Edge> good;
  for (const auto& e : graph.edges) {
    bool ok = true;
    for (const NodeId* end : {&e.parent, &e.child}) {
      if (!index.contains(*end)) {
        add(ViolationKind::UnknownEdgeEndpoint, {detail::edge_name(e)},
            "edge " + detail::edge_name(e) + " references unknown node '" + end->str() + "'");
        ok = false;
      }
    }
    if (e.parent == e.child) {
      add(ViolationKind::SelfLoop, {e.parent.str()}, "self-loop on '" + e.parent.str() + "'");
      ok = false;
    }
    if (!seen.emplace(e.parent, e.child).second) {
      add(ViolationKind::DuplicateEdge, {detail::edge_name(e)}, "edge " + detail::edge_name(e) + " is duplicated");
      ok = false;
    }
    if (!(e.transmit > 0.0 && e.transmit <= 1.0))
      add(ViolationKind::TransmitOutOfRange, {detail::edge_name(e)},
          "transmit coefficient of " + detail::edge_name(e) + " must lie in (0,1]");
    if (ok) good.push_back(e);
  }

  std::map<NodeId, std::size_t> parent_count, child_count;
  for (const auto& e : good) {
    ++parent_count[e.child];
    ++child_count[e.parent];
  }

  // Per-node probabilistic content.
  for (const auto& n : graph.nodes) {
    const std::string& id = n.id.str();
    const std::size_t k = parent_count[n.id];
    if (k == 0) {
      if (!n.prior) add(ViolationKind::MissingPrior, {id}, "root node '" + id + "' has no prior");
      if (n.gate) add(ViolationKind::UnexpectedGate, {id}, "root node '" + id + "' must not declare a gate");
    } else {
      if (!n.gate) add(ViolationKind::MissingGate, {id}, "internal node '" + id + "' has no gate");
      if (n.prior) add(ViolationKind::UnexpectedPrior, {id}, "internal node '" + id + "' must not declare a prior");
    }
    if (n.prior && !detail::in_unit(*n.prior))
      add(ViolationKind::PriorOutOfRange, {id}, "prior of '" + id + "' is outside [0,1]");
    if (n.rating) {
      if (!is_valid(*n.rating)) {
        add(ViolationKind::InvalidRating, {id}, "rating of '" + id + "' is out of range");
      } else if (n.prior && std::abs(*n.prior - prior_from(*n.rating)) > 1e-12) {
        add(ViolationKind::RatingMismatch, {id}, "prior of '" + id + "' disagrees with its rating");
      }
    }
    if (n.gate) {
      const GateSpec& g = *n.gate;
      if (g.kind == GateKind::Table) {
        if (k > 0 && g.rows.size() != (std::size_t{1} << k))
          add(ViolationKind::TableRowCount, {id},
              "table gate of '" + id + "' has " + std::to_string(g.rows.size()) + " rows, expected " +
                  std::to_string(std::size_t{1} << k));
        if (!std::all_of(g.rows.begin(), g.rows.end(), detail::in_unit))
          add(ViolationKind::TableRowOutOfRange, {id}, "table gate of '" + id + "' has a row outside [0,1]");
      } else if (!(g.leak >= 0.0 && g.leak < 1.0)) {
        add(ViolationKind::LeakOutOfRange, {id}, "leak of '" + id + "' must lie in [0,1)");
      }
    }
  }

  // Cycles.
  std::vector<NodeId> ids;
  ids.reserve(index.size());
  {
    std::vector<std::pair<std::size_t, NodeId>> by_index;
    for (const auto& [id, i] : index) by_index.emplace_back(i, id);
    std::sort(by_index.begin(), by_index.end());
    for (auto& [i, id] : by_index) ids.push_back(id);
  }
  std::vector<std::vector<std::size_t>> adj(ids.size());
  for (const auto& e : good) adj[index.at(e.parent)].push_back(index.at(e.child));
  for (auto& scc : detail::nontrivial_sccs(adj)) {
    std::vector<std::string> members;
    for (std::size_t i : scc) members.push_back(ids[i].str());
    std::sort(members.begin(), members.end());
    std::string joined;
    for (const auto& m : members) joined += (joined.empty() ? "" : ", ") + m;
    add(ViolationKind::Cycle, members, "cycle through {" + joined + "}");
  }

  // Roles.
  std::vector<const Node*> components;
  for (const auto& n : graph.nodes)
    if (n.kind == NodeKind::Component) components.push_back(&n);
  if (components.size() != 1)
    add(ViolationKind::ComponentCount, {},
        "expected exactly one component node, found " + std::to_string(components.size()));

  for (const auto& n : graph.nodes) {
    if (n.kind == NodeKind::Element && parent_count[n.id] > 0)
      add(ViolationKind::ElementHasParents, {n.id.str()}, "element '" + n.id.str() + "' must not have parents");
  }

  if (components.size() == 1) {
    const NodeId& sink = components.front()->id;
    if (child_count[sink] > 0)
      add(ViolationKind::ComponentNotSink, {sink.str()}, "component '" + sink.str() + "' has outgoing edges");
    for (const auto& e : good) {
      if (e.child != sink) continue;
      const Node* p = graph.find(e.parent);
      if (p != nullptr && p->kind != NodeKind::Technique)
        add(ViolationKind::ComponentParentNotTechnique, {e.parent.str()},
            "component parent '" + e.parent.str() + "' is not a technique");
    }
    for (const auto& n : graph.nodes) {
      if (n.id != sink && n.kind != NodeKind::Technique && child_count[n.id] == 0)
        add(ViolationKind::ExtraSink, {n.id.str()}, "node '" + n.id.str() + "' has no outgoing edges");
    }
    // Reverse reachability from the sink.
    std::set<NodeId> reaches{sink};
    std::vector<NodeId> work{sink};
    while (!work.empty()) {
      NodeId v = work.back();
      work.pop_back();
      for (const auto& e : good)
        if (e.child == v && reaches.insert(e.parent).second) work.push_back(e.parent);
    }
    for (const auto& n : graph.nodes)
      if (n.kind == NodeKind::Technique && !reaches.contains(n.id))
        add(ViolationKind::TechniqueUnreachable, {n.id.str()},
            "technique '" + n.id.str() + "' has no path to component '" + sink.str() + "'");
  }

  return report;
}

inline void require_valid(const DefenseGraph& graph) {
  auto report = validate(graph);
  if (!report.ok()) throw ValidationError(std::move(report));
}

/// Kahn's algorithm with a min-heap, so ties resolve to the smallest id.
inline std::vector<NodeId> topological_order(const DefenseGraph& graph) {
  std::map<NodeId, std::size_t> in_degree;
  std::map<NodeId, std::vector<NodeId>> out;
  for (const auto& n : graph.nodes) in_degree.emplace(n.id, 0);
  for (const auto& e : graph.edges) {
    if (!in_degree.contains(e.parent) || !in_degree.contains(e.child))
      throw GraphError("edge " + detail::edge_name(e) + " references an unknown node");
    ++in_degree[e.child];
    out[e.parent].push_back(e.child);
  }

  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, d] : in_degree)
    if (d == 0) ready.push(id);

  std::vector<NodeId> order;
  order.reserve(in_degree.size());
  while (!ready.empty()) {
    NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (const auto& w : out[v])
      if (--in_degree[w] == 0) ready.push(w);
  }
  if (order.size() != in_degree.size()) throw GraphError("defense graph contains a cycle");
  return order;
}

/// Expands a gate into CPT rows over `parent_count` parents.
///
/// NoisyAnd: the all-parents-true row is the product of the transmit
/// coefficients, every other row is the leak. NoisyOr: each true parent j
/// independently fires with probability transmit[j], and the leak fires on
/// its own. Table: rows are copied.
inline std::vector<double> expand_gate(const GateSpec& gate, std::size_t parent_count,
                                       std::span<const double> transmit) {
  if (parent_count == 0) throw std::invalid_argument("expand_gate needs at least one parent");
  if (parent_count >= 31) throw std::invalid_argument("too many parents for a binary CPT");
  const std::size_t n_rows = std::size_t{1} << parent_count;

  if (gate.kind == GateKind::Table) {
    if (gate.rows.size() != n_rows)
      throw std::invalid_argument("table gate has " + std::to_string(gate.rows.size()) + " rows, expected " +
                                  std::to_string(n_rows));
    return gate.rows;
  }
  if (transmit.size() != parent_count)
    throw std::invalid_argument("gate has " + std::to_string(transmit.size()) + " transmit coefficients for " +
                                std::to_string(parent_count) + " parents");

  std::vector<double> rows(n_rows, gate.leak);
  if (gate.kind == GateKind::NoisyAnd) {
    double all = 1.0;
    for (double z : transmit) all *= z;
    rows.back() = all;
    return rows;
  }
  for (std::size_t pattern = 0; pattern < n_rows; ++pattern) {
    double silent = 1.0 - gate.leak;
    for (std::size_t j = 0; j < parent_count; ++j)
      if (pattern & (std::size_t{1} << j)) silent *= 1.0 - transmit[j];
    rows[pattern] = 1.0 - silent;
  }
  return rows;
}

/// CPT of one node; roots get a parentless table holding their prior.
inline Cpt node_cpt(const DefenseGraph& graph, const NodeId& id) {
  const Node& n = graph.node(id);
  auto in = graph.in_edges(id);
  Cpt cpt;
  if (in.empty()) {
    if (!n.prior) throw GraphError("root node '" + id.str() + "' has no prior");
    cpt.rows = {*n.prior};
    return cpt;
  }
  if (!n.gate) throw GraphError("internal node '" + id.str() + "' has no gate");
  std::vector<double> transmit;
  for (const auto& e : in) {
    cpt.parents.push_back(e.parent);
    transmit.push_back(e.transmit);
  }
  cpt.rows = expand_gate(*n.gate, in.size(), transmit);
  return cpt;
}

}  // namespace defgraph
