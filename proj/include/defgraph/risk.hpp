#pragma once

// Likelihood and risk for every subset of deployed countermeasures, their
// sensitivity to degraded detection, and the vehicle-level state vector.

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "defgraph/graph.hpp"
#include "defgraph/inference.hpp"

namespace defgraph {

inline constexpr std::size_t kMaxRiskTableTechniques = 16;

inline double risk(double likelihood, double impact) { return likelihood * impact; }

struct RiskRow {
  std::uint32_t subset_mask = 0;  // bit j = techniques[j] enabled
  std::vector<NodeId> enabled_ids;
  double likelihood = 0.0;
  double risk = 0.0;

  bool operator==(const RiskRow&) const = default;
};

struct RiskTable {
  std::string scenario_name;
  double impact = 1.0;
  std::vector<NodeId> techniques;  // lexicographic; defines mask bits
  std::vector<RiskRow> rows;       // ascending mask, 2^k entries

  bool operator==(const RiskTable&) const = default;
};

inline std::set<NodeId> subset_of(const std::vector<NodeId>& techniques, std::uint32_t mask) {
  std::set<NodeId> out;
  for (std::size_t j = 0; j < techniques.size(); ++j)
    if (mask & (std::uint32_t{1} << j)) out.insert(techniques[j]);
  return out;
}

namespace detail {

inline RiskTable risk_table_unchecked(const DefenseGraph& graph) {
  RiskTable table;
  table.scenario_name = graph.name;
  table.impact = graph.impact;
  table.techniques = graph.techniques();
  const std::size_t k = table.techniques.size();
  if (k > kMaxRiskTableTechniques)
    throw std::invalid_argument("risk table supports at most " + std::to_string(kMaxRiskTableTechniques) +
                                " techniques, graph has " + std::to_string(k));

  const BayesNet base = BayesNet::compile_unchecked(graph);
  const std::size_t sink = base.index_of(*graph.component());
  std::vector<std::size_t> technique_index;
  for (const auto& t : table.techniques) technique_index.push_back(base.index_of(t));

  const std::uint32_t count = std::uint32_t{1} << k;
  table.rows.reserve(count);
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    BayesNet net = base;
    RiskRow row;
    row.subset_mask = mask;
    for (std::size_t j = 0; j < k; ++j) {
      if (mask & (std::uint32_t{1} << j))
        row.enabled_ids.push_back(table.techniques[j]);
      else
        net.clamp(technique_index[j], false);
    }
    row.likelihood = variable_elimination(net, sink, {}).p_false;
    row.risk = risk(row.likelihood, table.impact);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace detail

/// One row per technique subset, in ascending mask order.
inline RiskTable build_risk_table(const DefenseGraph& graph) {
  require_valid(graph);
  return detail::risk_table_unchecked(graph);
}

/// Copy of `graph` with every detection parameter scaled by (1 - error):
/// root priors and edge transmit coefficients. Table gates are unchanged.
inline DefenseGraph degrade(const DefenseGraph& graph, double error) {
  if (!(error >= 0.0 && error <= 1.0)) throw std::invalid_argument("error level must lie in [0,1]");
  DefenseGraph out = graph;
  if (error == 0.0) return out;
  for (auto& n : out.nodes) {
    if (n.prior) {
      *n.prior *= 1.0 - error;
      n.rating.reset();
    }
  }
  for (auto& e : out.edges) e.transmit *= 1.0 - error;
  return out;
}

/// Risk tables for each error level, keyed by the level. Error 0
/// reproduces build_risk_table; error 1 disables every detection path.
inline std::map<double, RiskTable> sensitivity_sweep(const DefenseGraph& graph, std::span<const double> errors) {
  require_valid(graph);
  for (double e : errors)
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("error level must lie in [0,1]");

  // Degraded copies may carry zero transmit coefficients, which a declared
  // graph may not; the structure is already validated above.
  std::map<double, RiskTable> out;
  for (double e : errors)
    if (!out.contains(e)) out.emplace(e, detail::risk_table_unchecked(degrade(graph, e)));
  return out;
}

struct SecurityStateEntry {
  std::string component;
  double likelihood = 0.0;
  double risk = 0.0;

  bool operator==(const SecurityStateEntry&) const = default;
};

/// The vehicle's security state: one entry per assessed component.
struct SecurityStateVector {
  std::vector<SecurityStateEntry> entries;
};

inline SecurityStateVector assess_vehicle(std::span<const DefenseGraph> graphs,
                                          std::span<const std::set<NodeId>> enabled) {
  if (graphs.size() != enabled.size())
    throw std::invalid_argument("one enabled-technique set is needed per graph");
  SecurityStateVector sv;
  std::set<std::string> names;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    require_valid(graphs[i]);
    const std::string name = graphs[i].component()->str();
    if (!names.insert(name).second) throw std::invalid_argument("duplicate component name '" + name + "'");
    const double l = threat_likelihood(graphs[i], enabled[i]);
    sv.entries.push_back({name, l, risk(l, graphs[i].impact)});
  }
  return sv;
}

}  // namespace defgraph
