#pragma once

// Line-oriented scenario format and report emission.
//
//   # comment
//   scenario name="GPS anti-spoofing"
//   impact value=0.8 | impact safety=3 privacy=3 operational=3 financial=1
//   node <id> kind=element|technique|component [label="..."]
//        [prior=<p>] [evita=e,k,w,q] [cvss=<base>/<temporal>]
//   edge <parent> <child> [zeta=<transmit>]
//   gate <id> noisy_and|noisy_or [leak=<p>]
//   gate <id> table rows=<r0>,<r1>,...
//
// Attributes are whitespace-separated key=value pairs; values containing
// spaces are double-quoted with \" and \\ escapes.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "defgraph/error.hpp"
#include "defgraph/graph.hpp"
#include "defgraph/risk.hpp"
#include "defgraph/scoring.hpp"

namespace defgraph {

// ---------------------------------------------------------------------------
// Number formatting

/// Fixed-point with `decimals` digits, correctly rounded from the binary value.
inline std::string format_fixed(double value, int decimals = 6) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

/// Shortest text that parses back to exactly `value`.
inline std::string format_shortest(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

/// Canonical number text for scenario files: six decimals when that is
/// exact, otherwise the shortest round-trip form.
inline std::string format_canonical(double value) {
  std::string fixed = format_fixed(value, 6);
  double back = 0.0;
  std::from_chars(fixed.data(), fixed.data() + fixed.size(), back);
  return back == value ? fixed : format_shortest(value);
}

inline std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<int> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct Token {
  std::string key;    // empty for bare words
  std::string value;  // the word itself for bare words
  std::size_t column = 1;
};

inline std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    Token tok;
    tok.column = i + 1;
    std::string text;
    bool has_eq = false;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
      const char c = line[i];
      if (c == '=' && !has_eq) {
        has_eq = true;
        tok.key = text;
        text.clear();
        ++i;
        continue;
      }
      if (c == '"') {
        ++i;
        bool closed = false;
        while (i < line.size()) {
          if (line[i] == '\\' && i + 1 < line.size()) {
            text += line[i + 1];
            i += 2;
          } else if (line[i] == '"') {
            closed = true;
            ++i;
            break;
          } else {
            text += line[i++];
          }
        }
        if (!closed) throw ParseError(line_no, tok.column, "unterminated quoted string");
        continue;
      }
      text += c;
      ++i;
    }
    if (has_eq && tok.key.empty()) throw ParseError(line_no, tok.column, "attribute is missing its key");
    tok.value = std::move(text);
    out.push_back(std::move(tok));
  }
  return out;
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

class DirectiveReader {
 public:
  DirectiveReader(std::vector<Token> tokens, std::size_t line, std::size_t end_column)
      : tokens_(std::move(tokens)), line_(line), end_column_(end_column) {}

  std::size_t line() const { return line_; }

  [[noreturn]] void fail(std::size_t column, const std::string& message) const {
    throw ParseError(line_, column, message);
  }

  // Positional bare words following the directive name.
  const Token& word(std::size_t index, std::string_view what) {
    std::size_t seen = 0;
    for (const auto& t : tokens_) {
      if (!t.key.empty()) continue;
      if (seen++ == index) return t;
    }
    fail(end_column_, "missing " + std::string(what));
  }

  // Checks attribute keys against `allowed` and for duplicates.
  void check_attributes(std::initializer_list<std::string_view> allowed, std::size_t max_words) {
    std::set<std::string> seen;
    std::size_t words = 0;
    for (const auto& t : tokens_) {
      if (t.key.empty()) {
        if (++words > max_words) fail(t.column, "unexpected token '" + t.value + "'");
        continue;
      }
      if (std::find(allowed.begin(), allowed.end(), t.key) == allowed.end())
        fail(t.column, "unknown attribute '" + t.key + "'");
      if (!seen.insert(t.key).second) fail(t.column, "attribute '" + t.key + "' given twice");
    }
  }

  const detail::Token* attr(std::string_view key) const {
    for (const auto& t : tokens_)
      if (t.key == key) return &t;
    return nullptr;
  }

  std::optional<double> number(std::string_view key) const {
    const detail::Token* t = attr(key);
    if (t == nullptr) return std::nullopt;
    auto v = parse_number(t->value);
    if (!v) fail(t->column, "attribute '" + std::string(key) + "' needs a number, got '" + t->value + "'");
    return v;
  }

  std::optional<int> integer(std::string_view key) const {
    const detail::Token* t = attr(key);
    if (t == nullptr) return std::nullopt;
    auto v = parse_int(t->value);
    if (!v) fail(t->column, "attribute '" + std::string(key) + "' needs an integer, got '" + t->value + "'");
    return v;
  }

  std::vector<std::string> list(const Token& t, char sep) const {
    std::vector<std::string> out;
    std::string cur;
    for (char c : t.value) {
      if (c == sep) {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t line_;
  std::size_t end_column_;
};

// Rated values may be restated in decimal form; the text keeps six decimals.
inline constexpr double kRestatedTolerance = 5e-7;

}  // namespace detail

/// Parses and validates a scenario. Throws ParseError on malformed text and
/// ValidationError when the described graph breaks a model invariant.
inline DefenseGraph parse_scenario(std::string_view text) {
  using detail::DirectiveReader;
  DefenseGraph graph;
  bool have_name = false;
  bool have_impact = false;
  std::map<NodeId, std::size_t> node_line;
  std::vector<std::pair<Edge, std::pair<std::size_t, std::size_t>>> edges;  // edge, (line, column)
  std::vector<std::pair<NodeId, std::pair<GateSpec, std::pair<std::size_t, std::size_t>>>> gates;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto tokens = detail::tokenize(line, line_no);
    if (tokens.empty()) continue;
    const detail::Token head = tokens.front();
    if (!head.key.empty()) throw ParseError(line_no, head.column, "expected a directive");
    const std::string& directive = head.value;
    tokens.erase(tokens.begin());
    detail::DirectiveReader r(std::move(tokens), line_no, line.size() + 1);

    if (directive == "scenario") {
      r.check_attributes({"name"}, 0);
      if (have_name) r.fail(head.column, "duplicate scenario directive");
      const detail::Token* name = r.attr("name");
      if (name == nullptr) r.fail(head.column, "scenario needs name=");
      graph.name = name->value;
      have_name = true;
    } else if (directive == "impact") {
      r.check_attributes({"value", "safety", "privacy", "operational", "financial"}, 0);
      if (have_impact) r.fail(head.column, "duplicate impact directive");
      auto value = r.number("value");
      auto s = r.integer("safety"), p = r.integer("privacy"), o = r.integer("operational"), f = r.integer("financial");
      const int rated = int(s.has_value()) + int(p.has_value()) + int(o.has_value()) + int(f.has_value());
      if (rated != 0 && rated != 4)
        r.fail(head.column, "impact rating needs all of safety, privacy, operational, financial");
      if (rated == 4) {
        EvitaImpactRating rating{*s, *p, *o, *f};
        if (!is_valid(rating)) r.fail(head.column, "impact levels must lie in 0..3");
        graph.impact_rating = rating;
        graph.impact = impact_score(rating);
        if (value && std::abs(*value - graph.impact) > detail::kRestatedTolerance)
          r.fail(r.attr("value")->column, "impact value disagrees with its rating");
      } else if (value) {
        graph.impact = *value;
      } else {
        r.fail(head.column, "impact needs value= or a full rating");
      }
      have_impact = true;
    } else if (directive == "node") {
      r.check_attributes({"kind", "label", "prior", "evita", "cvss"}, 1);
      const detail::Token& id_tok = r.word(0, "node id");
      if (!NodeId::is_well_formed(id_tok.value))
        r.fail(id_tok.column, "node id '" + id_tok.value + "' must match [a-z][a-z0-9_]*");
      Node node;
      node.id = NodeId(id_tok.value);
      if (node_line.contains(node.id)) r.fail(id_tok.column, "node '" + id_tok.value + "' declared twice");

      const detail::Token* kind = r.attr("kind");
      if (kind == nullptr) r.fail(id_tok.column, "node needs kind=");
      if (kind->value == "element")
        node.kind = NodeKind::Element;
      else if (kind->value == "technique")
        node.kind = NodeKind::Technique;
      else if (kind->value == "component")
        node.kind = NodeKind::Component;
      else
        r.fail(kind->column, "unknown node kind '" + kind->value + "'");

      if (const detail::Token* label = r.attr("label")) node.label = label->value;
      node.prior = r.number("prior");

      const detail::Token* evita = r.attr("evita");
      const detail::Token* cvss = r.attr("cvss");
      if (evita != nullptr && cvss != nullptr) r.fail(cvss->column, "node may carry one rating only");
      if (evita != nullptr) {
        auto parts = r.list(*evita, ',');
        if (parts.size() != 4) r.fail(evita->column, "evita needs four comma-separated levels");
        int levels[4];
        for (std::size_t i = 0; i < 4; ++i) {
          auto v = parse_int(parts[i]);
          if (!v) r.fail(evita->column, "evita level '" + parts[i] + "' is not an integer");
          levels[i] = *v;
        }
        EvitaLikelihoodRating rating{levels[0], levels[1], levels[2], levels[3]};
        if (!is_valid(rating)) r.fail(evita->column, "evita levels must lie in 0..3");
        node.rating = rating;
      }
      if (cvss != nullptr) {
        auto parts = r.list(*cvss, '/');
        if (parts.size() != 2) r.fail(cvss->column, "cvss needs <base>/<temporal>");
        auto base = parse_number(parts[0]), temporal = parse_number(parts[1]);
        if (!base || !temporal) r.fail(cvss->column, "cvss scores must be numbers");
        CvssRating rating{*base, *temporal};
        if (!is_valid(rating)) r.fail(cvss->column, "cvss needs 0 <= temporal <= base <= 10");
        node.rating = rating;
      }
      if (node.rating) {
        const double rated = prior_from(*node.rating);
        if (node.prior && std::abs(*node.prior - rated) > detail::kRestatedTolerance)
          r.fail(r.attr("prior")->column, "prior disagrees with the node's rating");
        node.prior = rated;
      }
      node_line.emplace(node.id, line_no);
      graph.nodes.push_back(std::move(node));
    } else if (directive == "edge") {
      r.check_attributes({"zeta"}, 2);
      const detail::Token& parent = r.word(0, "edge parent");
      const detail::Token& child = r.word(1, "edge child");
      // Endpoints are resolved once every node is known.
      edges.push_back({Edge{NodeId(parent.value), NodeId(child.value), r.number("zeta").value_or(1.0)},
                       {line_no, parent.column}});
    } else if (directive == "gate") {
      r.check_attributes({"leak", "rows"}, 2);
      const detail::Token& id = r.word(0, "gate node");
      const detail::Token& kind = r.word(1, "gate kind");
      GateSpec gate;
      if (kind.value == "noisy_and" || kind.value == "noisy_or") {
        gate.kind = kind.value == "noisy_and" ? GateKind::NoisyAnd : GateKind::NoisyOr;
        gate.leak = r.number("leak").value_or(kDefaultLeak);
        if (const detail::Token* rows = r.attr("rows")) r.fail(rows->column, "rows= only applies to table gates");
      } else if (kind.value == "table") {
        gate.kind = GateKind::Table;
        gate.leak = 0.0;
        if (const detail::Token* leak = r.attr("leak")) r.fail(leak->column, "leak= does not apply to table gates");
        const detail::Token* rows = r.attr("rows");
        if (rows == nullptr) r.fail(kind.column, "table gate needs rows=");
        for (const auto& part : r.list(*rows, ',')) {
          auto v = parse_number(part);
          if (!v) r.fail(rows->column, "table row '" + part + "' is not a number");
          gate.rows.push_back(*v);
        }
      } else {
        r.fail(kind.column, "unknown gate kind '" + kind.value + "'");
      }
      gates.push_back({NodeId(id.value), {gate, {line_no, id.column}}});
    } else {
      throw ParseError(line_no, head.column, "unknown directive '" + directive + "'");
    }
  }

  for (auto& [e, where] : edges) {
    for (const NodeId* end : {&e.parent, &e.child})
      if (!node_line.contains(*end))
        throw ParseError(where.first, where.second, "edge references undeclared node '" + end->str() + "'");
    graph.edges.push_back(e);
  }
  for (auto& [id, spec] : gates) {
    auto& [gate, where] = spec;
    Node* n = graph.find(id);
    if (n == nullptr) throw ParseError(where.first, where.second, "gate for undeclared node '" + id.str() + "'");
    if (n->gate) throw ParseError(where.first, where.second, "node '" + id.str() + "' already has a gate");
    n->gate = gate;
  }

  require_valid(graph);
  return graph;
}

// ---------------------------------------------------------------------------
// Serialization

/// Canonical text: nodes sorted by id, edges by (parent, child), gates by
/// node id. serialize(parse(serialize(g))) == serialize(g).
inline std::string serialize_scenario(const DefenseGraph& graph) {
  std::string out;
  out += "scenario name=" + detail::quote(graph.name) + "\n";
  // A rating is authoritative on parse, so its decimal restatement is rounded.
  out += "impact value=" + (graph.impact_rating ? format_fixed(graph.impact) : format_canonical(graph.impact));
  if (graph.impact_rating) {
    const auto& r = *graph.impact_rating;
    out += " safety=" + std::to_string(r.safety) + " privacy=" + std::to_string(r.privacy) +
           " operational=" + std::to_string(r.operational) + " financial=" + std::to_string(r.financial);
  }
  out += "\n";

  std::vector<const Node*> nodes;
  for (const auto& n : graph.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(), [](const Node* a, const Node* b) { return a->id < b->id; });

  for (const Node* n : nodes) {
    out += "node " + n->id.str() + " kind=" + std::string(to_string(n->kind));
    if (!n->label.empty()) out += " label=" + detail::quote(n->label);
    if (n->prior) out += " prior=" + (n->rating ? format_fixed(*n->prior) : format_canonical(*n->prior));
    if (n->rating) {
      if (const auto* e = std::get_if<EvitaLikelihoodRating>(&*n->rating)) {
        out += " evita=" + std::to_string(e->expertise) + "," + std::to_string(e->knowledge_of_target) + "," +
               std::to_string(e->window_of_opportunity) + "," + std::to_string(e->equipment);
      } else {
        const auto& c = std::get<CvssRating>(*n->rating);
        out += " cvss=" + format_shortest(c.base_score) + "/" + format_shortest(c.temporal_score);
      }
    }
    out += "\n";
  }

  std::vector<Edge> edges = graph.edges;
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.parent, a.child) < std::tie(b.parent, b.child);
  });
  for (const auto& e : edges)
    out += "edge " + e.parent.str() + " " + e.child.str() + " zeta=" + format_canonical(e.transmit) + "\n";

  for (const Node* n : nodes) {
    if (!n->gate) continue;
    const GateSpec& g = *n->gate;
    out += "gate " + n->id.str() + " " + std::string(to_string(g.kind));
    if (g.kind == GateKind::Table) {
      out += " rows=";
      for (std::size_t i = 0; i < g.rows.size(); ++i) out += (i ? "," : "") + format_canonical(g.rows[i]);
    } else {
      out += " leak=" + format_canonical(g.leak);
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { Text, Csv };

inline std::string joined_ids(const std::vector<NodeId>& ids, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i].str();
  }
  return out;
}

/// csv: header `mask,techniques,likelihood,risk`, techniques joined by '+',
/// probabilities fixed to six decimals. text: the same columns aligned.
inline std::string emit_risk_table(const RiskTable& table, ReportFormat format) {
  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"mask", "techniques", "likelihood", "risk"});
  for (const auto& row : table.rows)
    cells.push_back({std::to_string(row.subset_mask), joined_ids(row.enabled_ids, "+"), format_fixed(row.likelihood),
                     format_fixed(row.risk)});

  std::string out;
  if (format == ReportFormat::Csv) {
    for (const auto& c : cells) out += c[0] + "," + c[1] + "," + c[2] + "," + c[3] + "\n";
    return out;
  }

  std::array<std::size_t, 4> width{};
  for (const auto& c : cells)
    for (std::size_t j = 0; j < 4; ++j) width[j] = std::max(width[j], c[j].size());
  out += "# " + table.scenario_name + " (impact " + format_fixed(table.impact) + ")\n";
  for (const auto& c : cells) {
    std::string line;
    line += std::string(width[0] - c[0].size(), ' ') + c[0];
    line += "  " + c[1] + std::string(width[1] - c[1].size(), ' ');
    line += "  " + std::string(width[2] - c[2].size(), ' ') + c[2];
    line += "  " + std::string(width[3] - c[3].size(), ' ') + c[3];
    out += line + "\n";
  }
  return out;
}

/// Sweep report. csv: one table with a leading `error` column; text: one
/// aligned table per error level.
inline std::string emit_sensitivity(const std::map<double, RiskTable>& sweep, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out += "error,mask,techniques,likelihood,risk\n";
    for (const auto& [level, table] : sweep) {
      const std::string csv = emit_risk_table(table, ReportFormat::Csv);
      std::size_t pos = csv.find('\n') + 1;  // skip header
      while (pos < csv.size()) {
        const std::size_t end = csv.find('\n', pos);
        out += format_canonical(level) + "," + csv.substr(pos, end - pos + 1);
        pos = end + 1;
      }
    }
    return out;
  }
  for (const auto& [level, table] : sweep) {
    out += "## error " + format_canonical(level) + "\n";
    out += emit_risk_table(table, ReportFormat::Text);
  }
  return out;
}

}  // namespace defgraph
