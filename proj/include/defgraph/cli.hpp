#pragma once

// Command-line front end. Exit codes: 0 success, 1 invalid scenario or
// failed analysis, 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "defgraph/graph.hpp"
#include "defgraph/inference.hpp"
#include "defgraph/risk.hpp"
#include "defgraph/scenario.hpp"

namespace defgraph {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline DefenseGraph load(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_scenario(text);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

inline Evidence parse_evidence(const std::vector<std::string>& items) {
  Evidence ev;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("evidence '" + item + "' must be id=true|false");
    const std::string id = item.substr(0, eq), value = item.substr(eq + 1);
    if (value != "true" && value != "false") throw UsageError("evidence '" + item + "' must be id=true|false");
    if (!ev.emplace(NodeId(id), value == "true").second) throw UsageError("evidence for '" + id + "' given twice");
  }
  return ev;
}

inline std::vector<double> parse_error_levels(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  std::stringstream ss(text);
  while (std::getline(ss, cur, ',')) {
    auto v = parse_number(cur);
    if (!v || *v < 0.0 || *v > 1.0) throw UsageError("error level '" + cur + "' must be a number in [0,1]");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("--errors needs at least one level");
  return out;
}

inline void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + path + "'");
  file << text;
}

}  // namespace detail

/// Runs the command line; `out` and `err` receive the output and diagnostic streams.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian defense-graph risk assessment", "defgraph"};
  app.require_subcommand(1);

  std::string file;
  std::vector<std::string> files;
  std::string query;
  std::vector<std::string> evidence;
  std::string engine = "ve";
  std::string format = "text";
  std::string out_path;
  std::string errors = "0.01,0.05,0.10";
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("file", file, "Scenario file")->required();

  auto* infer_cmd = app.add_subcommand("infer", "Posterior of one node given evidence");
  infer_cmd->add_option("file", file, "Scenario file")->required();
  infer_cmd->add_option("--query", query, "Node to query")->required();
  infer_cmd->add_option("--evidence", evidence, "Observed states, id=true|false");
  infer_cmd->add_option("--engine", engine, "ve or enumerate")->check(CLI::IsMember({"ve", "enumerate"}));

  auto* table_cmd = app.add_subcommand("risk-table", "Likelihood and risk for every technique subset");
  table_cmd->add_option("file", file, "Scenario file")->required();
  table_cmd->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  table_cmd->add_option("--out", out_path, "Write to this path instead of standard output");

  auto* sens_cmd = app.add_subcommand("sensitivity", "Risk tables under degraded detection");
  sens_cmd->add_option("file", file, "Scenario file")->required();
  sens_cmd->add_option("--errors", errors, "Comma-separated error levels in [0,1]");
  sens_cmd->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  sens_cmd->add_option("--out", out_path, "Write to this path instead of standard output");

  auto* sample_cmd = app.add_subcommand("sample", "Forward-sampled frequency of each node");
  sample_cmd->add_option("file", file, "Scenario file")->required();
  sample_cmd->add_option("--n", samples, "Number of samples")->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", seed, "Generator seed")->required();

  auto* assess_cmd = app.add_subcommand("assess", "Security state of several components, all techniques on");
  assess_cmd->add_option("files", files, "Scenario files, one per component")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const ReportFormat report_format = format == "csv" ? ReportFormat::Csv : ReportFormat::Text;

  try {
    if (validate_cmd->parsed()) {
      const std::string text = detail::read_file(file);
      try {
        parse_scenario(text);
      } catch (const ValidationError& e) {
        err << file << ": invalid\n" << e.report().to_string();
        return kExitInvalid;
      }
      out << "valid\n";
    } else if (infer_cmd->parsed()) {
      const DefenseGraph graph = detail::load(file);
      const Evidence ev = detail::parse_evidence(evidence);
      if (graph.find(NodeId(query)) == nullptr) throw detail::UsageError("unknown query node '" + query + "'");
      for (const auto& [id, v] : ev)
        if (graph.find(id) == nullptr) throw detail::UsageError("unknown evidence node '" + id.str() + "'");
      const Distribution d = engine == "enumerate" ? enumerate_joint(graph, NodeId(query), ev)
                                                   : variable_elimination(graph, NodeId(query), ev);
      out << "query " << query << "\n";
      for (const auto& [id, v] : ev) out << "evidence " << id.str() << "=" << (v ? "true" : "false") << "\n";
      out << "p_true " << format_shortest(d.p_true) << "\n";
      out << "p_false " << format_shortest(d.p_false) << "\n";
    } else if (table_cmd->parsed()) {
      const DefenseGraph graph = detail::load(file);
      detail::write_output(emit_risk_table(build_risk_table(graph), report_format), out_path, out);
    } else if (sens_cmd->parsed()) {
      const DefenseGraph graph = detail::load(file);
      const auto levels = detail::parse_error_levels(errors);
      detail::write_output(emit_sensitivity(sensitivity_sweep(graph, levels), report_format), out_path, out);
    } else if (sample_cmd->parsed()) {
      const DefenseGraph graph = detail::load(file);
      for (const auto& [id, d] : forward_sample(graph, samples, seed))
        out << id.str() << " " << format_fixed(d.p_true) << "\n";
    } else if (assess_cmd->parsed()) {
      std::vector<DefenseGraph> graphs;
      std::vector<std::set<NodeId>> enabled;
      for (const auto& f : files) {
        graphs.push_back(detail::load(f));
        const auto t = graphs.back().techniques();
        enabled.emplace_back(t.begin(), t.end());
      }
      const SecurityStateVector sv = assess_vehicle(graphs, enabled);
      out << "component,likelihood,risk\n";
      for (const auto& e : sv.entries)
        out << e.component << "," << format_fixed(e.likelihood) << "," << format_fixed(e.risk) << "\n";
    }
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"defgraph"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace defgraph
