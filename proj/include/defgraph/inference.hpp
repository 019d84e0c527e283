#pragma once

// Exact and sampled inference over a defense graph.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "defgraph/error.hpp"
#include "defgraph/graph.hpp"

namespace defgraph {

/// Observed detection states.
using Evidence = std::map<NodeId, bool>;

struct Distribution {
  double p_true = 0.0;
  double p_false = 1.0;

  static Distribution from_weights(double w_true, double w_false) {
    const double z = w_true + w_false;
    return {w_true / z, w_false / z};
  }

  static Distribution point(bool value) { return value ? Distribution{1.0, 0.0} : Distribution{0.0, 1.0}; }
};

/// Nodes above which enumerate_joint refuses to run.
inline constexpr std::size_t kMaxEnumerationNodes = 25;

/// Index-based form of a defense graph: nodes in topological order, each
/// with its parents (in CPT bit order) and expanded CPT rows.
class BayesNet {
 public:
  static BayesNet compile(const DefenseGraph& graph) {
    require_valid(graph);
    return compile_unchecked(graph);
  }

  /// Skips validation. The graph must still be a DAG whose roots carry
  /// priors and whose internal nodes carry well-sized gates.
  static BayesNet compile_unchecked(const DefenseGraph& graph) {
    BayesNet net;
    net.ids_ = topological_order(graph);
    for (std::size_t i = 0; i < net.ids_.size(); ++i) net.index_.emplace(net.ids_[i], i);
    net.parents_.resize(net.ids_.size());
    net.rows_.resize(net.ids_.size());
    for (std::size_t i = 0; i < net.ids_.size(); ++i) {
      Cpt cpt = node_cpt(graph, net.ids_[i]);
      for (const auto& p : cpt.parents) net.parents_[i].push_back(net.index_.at(p));
      net.rows_[i] = std::move(cpt.rows);
    }
    return net;
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<NodeId>& ids() const noexcept { return ids_; }
  const NodeId& id(std::size_t i) const { return ids_.at(i); }
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
  const std::vector<double>& rows(std::size_t i) const { return rows_.at(i); }

  std::size_t index_of(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("unknown node '" + id.str() + "'");
    return it->second;
  }

  bool contains(const NodeId& id) const { return index_.contains(id); }

  /// Forces node i to `value` regardless of its parents (an intervention,
  /// not an observation: ancestors are unaffected).
  void clamp(std::size_t i, bool value) {
    std::fill(rows_.at(i).begin(), rows_.at(i).end(), value ? 1.0 : 0.0);
  }

  /// P(node i = true | parent bit pattern).
  double p_true(std::size_t i, std::size_t pattern) const { return rows_[i][pattern]; }

 private:
  std::vector<NodeId> ids_;
  std::map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<double>> rows_;
};

namespace detail {

// -1 = free, 0/1 = observed.
inline std::vector<int> evidence_vector(const BayesNet& net, const Evidence& evidence) {
  std::vector<int> ev(net.size(), -1);
  for (const auto& [id, value] : evidence) {
    if (!net.contains(id)) throw std::invalid_argument("evidence names unknown node '" + id.str() + "'");
    ev[net.index_of(id)] = value ? 1 : 0;
  }
  return ev;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Full-joint enumeration

/// P(query | evidence) by summing the full joint over every assignment
/// consistent with the evidence. Exponential in the node count.
inline Distribution enumerate_joint(const BayesNet& net, std::size_t query, const Evidence& evidence) {
  const std::size_t n = net.size();
  if (n > kMaxEnumerationNodes)
    throw GraphTooLargeError("enumeration supports at most " + std::to_string(kMaxEnumerationNodes) +
                             " nodes, graph has " + std::to_string(n));
  const std::vector<int> ev = detail::evidence_vector(net, evidence);

  std::vector<int> value(n, 0);
  double weight[2] = {0.0, 0.0};

  // Depth-first over nodes in topological order; every parent is assigned
  // before its child, so each CPT row is available when the child is reached.
  auto recurse = [&](auto&& self, std::size_t depth, double prob) -> void {
    if (prob == 0.0) return;
    if (depth == n) {
      weight[value[query]] += prob;
      return;
    }
    std::size_t pattern = 0;
    const auto& ps = net.parents(depth);
    for (std::size_t j = 0; j < ps.size(); ++j)
      if (value[ps[j]]) pattern |= std::size_t{1} << j;
    const double pt = net.p_true(depth, pattern);
    for (int v : {0, 1}) {
      if (ev[depth] != -1 && ev[depth] != v) continue;
      value[depth] = v;
      self(self, depth + 1, prob * (v ? pt : 1.0 - pt));
    }
  };
  recurse(recurse, 0, 1.0);

  if (weight[0] + weight[1] <= 0.0) throw ContradictionError("evidence has probability zero");
  return Distribution::from_weights(weight[1], weight[0]);
}

inline Distribution enumerate_joint(const DefenseGraph& graph, const NodeId& query, const Evidence& evidence = {}) {
  if (graph.nodes.size() > kMaxEnumerationNodes)
    throw GraphTooLargeError("enumeration supports at most " + std::to_string(kMaxEnumerationNodes) +
                             " nodes, graph has " + std::to_string(graph.nodes.size()));
  BayesNet net = BayesNet::compile(graph);
  return enumerate_joint(net, net.index_of(query), evidence);
}

// ---------------------------------------------------------------------------
// Variable elimination

/// Nonnegative table over binary variables. scope is sorted ascending and
/// bit j of a value index is the state of scope[j].
struct Factor {
  std::vector<std::size_t> scope;
  std::vector<double> values;

  static Factor scalar(double v) { return {{}, {v}}; }

  std::size_t position(std::size_t var) const {
    auto it = std::lower_bound(scope.begin(), scope.end(), var);
    return (it != scope.end() && *it == var) ? static_cast<std::size_t>(it - scope.begin()) : scope.size();
  }

  bool contains(std::size_t var) const { return position(var) != scope.size(); }
};

namespace detail {

// For every variable of `sub`, the bit it occupies in `super`'s index.
inline std::vector<std::size_t> bit_map(const Factor& sub, const std::vector<std::size_t>& super) {
  std::vector<std::size_t> out;
  out.reserve(sub.scope.size());
  for (std::size_t v : sub.scope)
    out.push_back(static_cast<std::size_t>(std::lower_bound(super.begin(), super.end(), v) - super.begin()));
  return out;
}

inline std::size_t project(std::size_t index, const std::vector<std::size_t>& bits) {
  std::size_t out = 0;
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (index & (std::size_t{1} << bits[j])) out |= std::size_t{1} << j;
  return out;
}

}  // namespace detail

inline Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.scope.begin(), a.scope.end(), b.scope.begin(), b.scope.end(), std::back_inserter(out.scope));
  const auto bits_a = detail::bit_map(a, out.scope);
  const auto bits_b = detail::bit_map(b, out.scope);
  out.values.resize(std::size_t{1} << out.scope.size());
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = a.values[detail::project(i, bits_a)] * b.values[detail::project(i, bits_b)];
  return out;
}

inline Factor sum_out(const Factor& f, std::size_t var) {
  const std::size_t pos = f.position(var);
  if (pos == f.scope.size()) return f;
  Factor out;
  out.scope = f.scope;
  out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
  out.values.assign(std::size_t{1} << out.scope.size(), 0.0);
  const std::size_t low_mask = (std::size_t{1} << pos) - 1;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const std::size_t j = (i & low_mask) | ((i >> (pos + 1)) << pos);
    out.values[j] += f.values[i];
  }
  return out;
}

/// Restricts `var` to `value` and drops it from the scope.
inline Factor reduce(const Factor& f, std::size_t var, bool value) {
  const std::size_t pos = f.position(var);
  if (pos == f.scope.size()) return f;
  Factor out;
  out.scope = f.scope;
  out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(pos));
  out.values.resize(std::size_t{1} << out.scope.size());
  const std::size_t low_mask = (std::size_t{1} << pos) - 1;
  for (std::size_t j = 0; j < out.values.size(); ++j) {
    const std::size_t i = (j & low_mask) | ((j >> pos) << (pos + 1)) | (value ? std::size_t{1} << pos : 0);
    out.values[j] = f.values[i];
  }
  return out;
}

/// P(node | parents) as a factor over the node and its parents.
inline Factor cpt_factor(const BayesNet& net, std::size_t node) {
  Factor f;
  f.scope = net.parents(node);
  f.scope.push_back(node);
  std::sort(f.scope.begin(), f.scope.end());
  const std::size_t child_bit = f.position(node);
  const auto& ps = net.parents(node);
  std::vector<std::size_t> parent_bits;
  for (std::size_t p : ps) parent_bits.push_back(f.position(p));

  f.values.resize(std::size_t{1} << f.scope.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const std::size_t pattern = detail::project(i, parent_bits);
    const double pt = net.p_true(node, pattern);
    f.values[i] = (i & (std::size_t{1} << child_bit)) ? pt : 1.0 - pt;
  }
  return f;
}

/// Greedy min-degree elimination order over the interaction graph of
/// `factors`, ties broken by the smaller node id. `keep` is never eliminated.
inline std::vector<std::size_t> min_degree_order(const BayesNet& net, const std::vector<Factor>& factors,
                                                 const std::set<std::size_t>& keep) {
  std::map<std::size_t, std::set<std::size_t>> adj;
  for (const auto& f : factors)
    for (std::size_t v : f.scope) {
      auto& nb = adj[v];
      nb.insert(f.scope.begin(), f.scope.end());
      nb.erase(v);
    }

  std::vector<std::size_t> order;
  std::set<std::size_t> remaining;
  for (const auto& [v, nb] : adj)
    if (!keep.contains(v)) remaining.insert(v);

  while (!remaining.empty()) {
    std::size_t best = *remaining.begin();
    for (std::size_t v : remaining) {
      const std::size_t dv = adj[v].size(), db = adj[best].size();
      if (dv < db || (dv == db && net.id(v) < net.id(best))) best = v;
    }
    order.push_back(best);
    remaining.erase(best);
    // Eliminating `best` connects its neighbours.
    const std::set<std::size_t> nb = adj[best];
    for (std::size_t a : nb) {
      adj[a].erase(best);
      for (std::size_t b : nb)
        if (a != b) adj[a].insert(b);
    }
    adj.erase(best);
  }
  return order;
}

/// Exact P(query | evidence) by variable elimination.
inline Distribution variable_elimination(const BayesNet& net, std::size_t query, const Evidence& evidence) {
  const std::vector<int> ev = detail::evidence_vector(net, evidence);

  std::vector<Factor> factors;
  factors.reserve(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    Factor f = cpt_factor(net, i);
    for (std::size_t v = 0; v < ev.size(); ++v)
      if (ev[v] != -1 && f.contains(v)) f = reduce(f, v, ev[v] == 1);
    factors.push_back(std::move(f));
  }

  const bool query_observed = ev[query] != -1;
  std::set<std::size_t> keep;
  if (!query_observed) keep.insert(query);

  for (std::size_t var : min_degree_order(net, factors, keep)) {
    Factor product = Factor::scalar(1.0);
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (f.contains(var))
        product = multiply(product, f);
      else
        rest.push_back(std::move(f));
    }
    rest.push_back(sum_out(product, var));
    factors = std::move(rest);
  }

  Factor result = Factor::scalar(1.0);
  for (const auto& f : factors) result = multiply(result, f);

  if (query_observed) {
    if (result.values.at(0) <= 0.0) throw ContradictionError("evidence has probability zero");
    return Distribution::point(ev[query] == 1);
  }
  const double w_false = result.values.at(0);
  const double w_true = result.values.at(1);
  if (w_true + w_false <= 0.0) throw ContradictionError("evidence has probability zero");
  return Distribution::from_weights(w_true, w_false);
}

inline Distribution variable_elimination(const DefenseGraph& graph, const NodeId& query,
                                         const Evidence& evidence = {}) {
  BayesNet net = BayesNet::compile(graph);
  return variable_elimination(net, net.index_of(query), evidence);
}

// ---------------------------------------------------------------------------
// Forward sampling

/// Draws `n` joint samples in topological order from a generator seeded
/// with `seed` and returns the per-node frequency of the true state.
/// Output depends only on (graph, n, seed).
inline std::map<NodeId, Distribution> forward_sample(const BayesNet& net, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  std::mt19937_64 rng(seed);
  // 53 random bits mapped to [0,1); stable across standard libraries.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  const std::size_t size = net.size();
  std::vector<std::uint64_t> hits(size, 0);
  std::vector<unsigned char> value(size, 0);
  for (std::uint64_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t pattern = 0;
      const auto& ps = net.parents(i);
      for (std::size_t j = 0; j < ps.size(); ++j)
        if (value[ps[j]]) pattern |= std::size_t{1} << j;
      value[i] = uniform() < net.p_true(i, pattern) ? 1 : 0;
      hits[i] += value[i];
    }
  }

  std::map<NodeId, Distribution> out;
  for (std::size_t i = 0; i < size; ++i) {
    const double f = static_cast<double>(hits[i]) / static_cast<double>(n);
    out.emplace(net.id(i), Distribution{f, static_cast<double>(n - hits[i]) / static_cast<double>(n)});
  }
  return out;
}

inline std::map<NodeId, Distribution> forward_sample(const DefenseGraph& graph, std::uint64_t n, std::uint64_t seed) {
  return forward_sample(BayesNet::compile(graph), n, seed);
}

// ---------------------------------------------------------------------------
// Threat likelihood

/// Compiles `graph` with every technique outside `enabled` clamped to
/// false: a countermeasure that is not deployed never detects.
inline BayesNet compile_with_enabled(const DefenseGraph& graph, const std::set<NodeId>& enabled) {
  BayesNet net = BayesNet::compile(graph);
  const auto techniques = graph.techniques();
  for (const auto& id : enabled)
    if (!std::binary_search(techniques.begin(), techniques.end(), id))
      throw std::invalid_argument("'" + id.str() + "' is not a technique of this graph");
  for (const auto& t : techniques)
    if (!enabled.contains(t)) net.clamp(net.index_of(t), false);
  return net;
}

/// Probability that an attack passes every enabled countermeasure
/// undetected, i.e. P(component = false).
inline double threat_likelihood(const DefenseGraph& graph, const std::set<NodeId>& enabled) {
  BayesNet net = compile_with_enabled(graph, enabled);
  const auto sink = graph.component();
  return variable_elimination(net, net.index_of(*sink), {}).p_false;
}

}  // namespace defgraph
