#include <gtest/gtest.h>

#include <cmath>

#include "defgraph/gps_scenario.hpp"
#include "defgraph/inference.hpp"
#include "support/random_graph.hpp"

using namespace defgraph;

namespace {

Node root(const char* id, NodeKind kind, double prior) { return {NodeId(id), kind, "", prior, std::nullopt, std::nullopt}; }

Node internal(const char* id, NodeKind kind, GateSpec gate) {
  return {NodeId(id), kind, "", std::nullopt, std::nullopt, std::move(gate)};
}

// Roots a(0.6), b(0.5) feeding a deterministic AND technique c, which feeds component s.
DefenseGraph and_graph() {
  DefenseGraph g;
  g.nodes = {root("a", NodeKind::Element, 0.6), root("b", NodeKind::Element, 0.5),
             internal("c", NodeKind::Technique, GateSpec::noisy_and(0.0)),
             internal("s", NodeKind::Component, GateSpec::noisy_or(0.0))};
  g.edges = {{"a"_id, "c"_id, 1.0}, {"b"_id, "c"_id, 1.0}, {"c"_id, "s"_id, 1.0}};
  return g;
}

// a(0.7) -> b with P(b|a)=0.9, P(b|!a)=0.2; b is the component.
DefenseGraph chain_graph() {
  DefenseGraph g;
  g.nodes = {root("a", NodeKind::Element, 0.7), internal("t", NodeKind::Technique, GateSpec::table({0.2, 0.9})),
             internal("b", NodeKind::Component, GateSpec::noisy_or(0.0))};
  g.edges = {{"a"_id, "t"_id, 1.0}, {"t"_id, "b"_id, 1.0}};
  return g;
}

void expect_normalized(const Distribution& d) {
  EXPECT_GE(d.p_true, 0.0);
  EXPECT_GE(d.p_false, 0.0);
  EXPECT_NEAR(d.p_true + d.p_false, 1.0, 1e-12);
}

}  // namespace

TEST(EnumerateJointTest, SingleRootReturnsPrior) {
  DefenseGraph g;
  g.nodes = {root("toa", NodeKind::Component, 7.0 / 12.0)};
  EXPECT_NEAR(enumerate_joint(g, "toa"_id).p_true, 0.583333, 1e-6);
  EXPECT_NEAR(variable_elimination(g, "toa"_id).p_true, 7.0 / 12.0, 1e-15);
}

TEST(EnumerateJointTest, IndependentAndProduct) {
  const DefenseGraph g = and_graph();
  EXPECT_NEAR(enumerate_joint(g, "c"_id).p_true, 0.30, 1e-15);
  EXPECT_NEAR(variable_elimination(g, "c"_id).p_true, 0.30, 1e-15);
}

TEST(EnumerateJointTest, HandBayesOnChain) {
  // P(a | t) = 0.7*0.9 / (0.7*0.9 + 0.3*0.2) = 0.63 / 0.69
  const DefenseGraph g = chain_graph();
  const Evidence ev{{"t"_id, true}};
  EXPECT_NEAR(enumerate_joint(g, "a"_id, ev).p_true, 0.63 / 0.69, 1e-12);
  EXPECT_NEAR(enumerate_joint(g, "a"_id, ev).p_true, 0.913043, 1e-6);
  EXPECT_NEAR(variable_elimination(g, "a"_id, ev).p_true, 0.63 / 0.69, 1e-12);
}

TEST(EnumerateJointTest, NodeCapAndContradiction) {
  DefenseGraph big;
  for (int i = 0; i < 26; ++i)
    big.nodes.push_back({NodeId("n" + std::to_string(i)), NodeKind::Component, "", 0.5, std::nullopt, std::nullopt});
  EXPECT_THROW(enumerate_joint(big, "n0"_id), GraphTooLargeError);

  // c is a deterministic AND: c = true with a = false is impossible.
  const DefenseGraph g = and_graph();
  const Evidence impossible{{"a"_id, false}, {"c"_id, true}};
  EXPECT_THROW(enumerate_joint(g, "b"_id, impossible), ContradictionError);
  EXPECT_THROW(variable_elimination(g, "b"_id, impossible), ContradictionError);
  EXPECT_THROW(variable_elimination(g, "c"_id, impossible), ContradictionError);
}

TEST(VariableEliminationTest, EvidenceOnQueryIsPointMass) {
  const DefenseGraph g = gps_scenario();
  for (bool v : {false, true}) {
    const Evidence ev{{"timing_check"_id, v}};
    const Distribution d = variable_elimination(g, "timing_check"_id, ev);
    EXPECT_EQ(d.p_true, v ? 1.0 : 0.0);
    EXPECT_EQ(d.p_false, v ? 0.0 : 1.0);
  }
}

TEST(VariableEliminationTest, BundledSinkMatchesEnumeration) {
  const DefenseGraph g = gps_scenario();
  const Distribution ve = variable_elimination(g, "gps"_id);
  const Distribution en = enumerate_joint(g, "gps"_id);
  EXPECT_NEAR(ve.p_true, en.p_true, 1e-10);
  expect_normalized(ve);
  expect_normalized(en);
}

TEST(VariableEliminationTest, UnknownEvidenceNode) {
  EXPECT_THROW(variable_elimination(and_graph(), "c"_id, {{"zz"_id, true}}), std::invalid_argument);
}

TEST(FactorTest, MultiplySumOutReduce) {
  // f(x0, x1), g(x1, x2)
  Factor f{{0, 1}, {0.1, 0.2, 0.3, 0.4}};
  Factor g{{1, 2}, {0.5, 0.6, 0.7, 0.8}};
  const Factor h = multiply(f, g);
  ASSERT_EQ(h.scope, (std::vector<std::size_t>{0, 1, 2}));
  for (std::size_t i = 0; i < 8; ++i) {
    const std::size_t x0 = i & 1, x1 = (i >> 1) & 1, x2 = (i >> 2) & 1;
    EXPECT_DOUBLE_EQ(h.values[i], f.values[x0 | (x1 << 1)] * g.values[x1 | (x2 << 1)]);
  }
  const Factor s = sum_out(h, 1);
  ASSERT_EQ(s.scope, (std::vector<std::size_t>{0, 2}));
  for (std::size_t x0 = 0; x0 < 2; ++x0)
    for (std::size_t x2 = 0; x2 < 2; ++x2)
      EXPECT_DOUBLE_EQ(s.values[x0 | (x2 << 1)], h.values[x0 | (x2 << 2)] + h.values[x0 | 2 | (x2 << 2)]);
  const Factor r = reduce(h, 2, true);
  ASSERT_EQ(r.scope, (std::vector<std::size_t>{0, 1}));
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(r.values[j], h.values[j | 4]);
}

TEST(InferenceProperties, EnginesAgreeOnRandomGraphs) {
  fixtures::RandomGraphs gen(2024);
  int compared = 0, contradictions = 0;
  for (int i = 0; i < 150; ++i) {
    const DefenseGraph g = gen.graph(gen.between(3, 14));
    const BayesNet net = BayesNet::compile(g);
    for (int q = 0; q < 6; ++q) {
      const NodeId query = gen.any_node(g);
      const Evidence ev = gen.evidence(g, 3);
      bool en_threw = false, ve_threw = false;
      Distribution en, ve;
      try {
        en = enumerate_joint(net, net.index_of(query), ev);
      } catch (const ContradictionError&) {
        en_threw = true;
      }
      try {
        ve = variable_elimination(net, net.index_of(query), ev);
      } catch (const ContradictionError&) {
        ve_threw = true;
      }
      ASSERT_EQ(en_threw, ve_threw);
      if (en_threw) {
        ++contradictions;
        continue;
      }
      expect_normalized(en);
      expect_normalized(ve);
      EXPECT_NEAR(en.p_true, ve.p_true, 1e-10);
      ++compared;
    }
  }
  EXPECT_GT(compared, 500);
}

TEST(InferenceProperties, EdgelessGraphMarginalsEqualPriors) {
  // Several component roots cannot form one valid graph; check each alone
  // and a compiled net of unconnected roots.
  for (double p : {0.0, 0.125, 0.5, 0.9, 1.0}) {
    DefenseGraph g;
    g.nodes = {root("x", NodeKind::Component, p)};
    EXPECT_EQ(variable_elimination(g, "x"_id).p_true, p);
    EXPECT_EQ(enumerate_joint(g, "x"_id).p_true, p);
  }
  // Unconnected roots compiled without the role checks.
  DefenseGraph loose;
  const double priors[] = {0.0, 0.3, 0.77, 1.0};
  for (int i = 0; i < 4; ++i)
    loose.nodes.push_back({NodeId("r" + std::to_string(i)), NodeKind::Element, "", priors[i], std::nullopt, std::nullopt});
  const BayesNet net = BayesNet::compile_unchecked(loose);
  for (int i = 0; i < 4; ++i) {
    const std::size_t idx = net.index_of(NodeId("r" + std::to_string(i)));
    EXPECT_EQ(variable_elimination(net, idx, {}).p_true, priors[i]);
    EXPECT_EQ(enumerate_joint(net, idx, {}).p_true, priors[i]);
  }
}

TEST(ForwardSampleTest, DeterministicGraphGivesExactFrequencies) {
  DefenseGraph g;
  g.nodes = {root("a", NodeKind::Element, 1.0), root("b", NodeKind::Element, 0.0),
             internal("t", NodeKind::Technique, GateSpec::noisy_or(0.0)),
             internal("u", NodeKind::Technique, GateSpec::noisy_and(0.0)),
             internal("s", NodeKind::Component, GateSpec::noisy_or(0.0))};
  g.edges = {{"a"_id, "t"_id, 1.0}, {"b"_id, "t"_id, 1.0}, {"a"_id, "u"_id, 1.0},
             {"b"_id, "u"_id, 1.0}, {"t"_id, "s"_id, 1.0}, {"u"_id, "s"_id, 1.0}};
  for (std::uint64_t n : {1u, 17u, 1000u}) {
    const auto freq = forward_sample(g, n, 99);
    EXPECT_EQ(freq.at("a"_id).p_true, 1.0);
    EXPECT_EQ(freq.at("b"_id).p_true, 0.0);
    EXPECT_EQ(freq.at("t"_id).p_true, 1.0);
    EXPECT_EQ(freq.at("u"_id).p_true, 0.0);
    EXPECT_EQ(freq.at("s"_id).p_true, 1.0);
  }
}

TEST(ForwardSampleTest, SameSeedSameOutputAndZeroRejected) {
  const DefenseGraph g = gps_scenario();
  const auto a = forward_sample(g, 5000, 42);
  const auto b = forward_sample(g, 5000, 42);
  const auto c = forward_sample(g, 5000, 43);
  bool differs = false;
  for (const auto& [id, d] : a) {
    EXPECT_EQ(d.p_true, b.at(id).p_true);
    differs = differs || d.p_true != c.at(id).p_true;
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(forward_sample(g, 0, 1), std::invalid_argument);
}

TEST(ForwardSampleTest, BundledSinkWithinBinomialBound) {
  const DefenseGraph g = gps_scenario();
  const double p = enumerate_joint(g, "gps"_id).p_true;
  const std::uint64_t n = 200000;
  const double bound = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  const auto freq = forward_sample(g, n, 7);
  EXPECT_NEAR(freq.at("gps"_id).p_true, p, bound);
}

TEST(ThreatLikelihoodTest, EmptyDefenseLetsEverythingThrough) {
  EXPECT_EQ(threat_likelihood(gps_scenario(), {}), 1.0);
  EXPECT_EQ(threat_likelihood(and_graph(), {}), 1.0);
}

TEST(ThreatLikelihoodTest, AllTechniquesBeatEverySingleOne) {
  const DefenseGraph g = gps_scenario();
  const auto techniques = g.techniques();
  const std::set<NodeId> all(techniques.begin(), techniques.end());
  const double every = threat_likelihood(g, all);
  for (const auto& t : techniques) EXPECT_LT(every, threat_likelihood(g, {t}));
}

TEST(ThreatLikelihoodTest, MatchesClampedEnumeration) {
  // Oracle: enumerate the graph with disabled techniques rewritten as
  // zero-probability table gates.
  const DefenseGraph g = gps_scenario();
  const auto techniques = g.techniques();
  for (std::uint32_t mask = 0; mask < 64; mask += 5) {
    DefenseGraph clamped = g;
    std::set<NodeId> enabled;
    for (std::size_t j = 0; j < techniques.size(); ++j) {
      if (mask & (1u << j)) {
        enabled.insert(techniques[j]);
        continue;
      }
      const std::size_t k = g.parents(techniques[j]).size();
      clamped.find(techniques[j])->gate = GateSpec::table(std::vector<double>(std::size_t{1} << k, 0.0));
    }
    EXPECT_NEAR(threat_likelihood(g, enabled), enumerate_joint(clamped, "gps"_id).p_false, 1e-12) << mask;
  }
}

TEST(ThreatLikelihoodTest, UnknownTechniqueRejected) {
  EXPECT_THROW(threat_likelihood(gps_scenario(), {"clock_consistency"_id}), std::invalid_argument);
  EXPECT_THROW(threat_likelihood(gps_scenario(), {"nope"_id}), std::invalid_argument);
}

TEST(ThreatLikelihoodTest, MonotoneUnderNoisyOrComponent) {
  fixtures::RandomGraphs gen(5);
  for (int i = 0; i < 40; ++i) {
    DefenseGraph g = gen.graph(gen.between(3, 12));
    // Monotone gates only: noisy-or everywhere keeps every CPT nondecreasing.
    for (auto& n : g.nodes)
      if (n.gate) n.gate = GateSpec::noisy_or(n.gate->kind == GateKind::Table ? 0.0 : n.gate->leak);
    const auto techniques = g.techniques();
    const std::uint32_t count = 1u << techniques.size();
    for (std::uint32_t mask = 0; mask < count; ++mask) {
      std::set<NodeId> s;
      for (std::size_t j = 0; j < techniques.size(); ++j)
        if (mask & (1u << j)) s.insert(techniques[j]);
      const double base = threat_likelihood(g, s);
      for (const auto& t : techniques) {
        if (s.contains(t)) continue;
        auto bigger = s;
        bigger.insert(t);
        EXPECT_GE(base + 1e-12, threat_likelihood(g, bigger));
      }
    }
  }
}
