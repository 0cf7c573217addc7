#include <gtest/gtest.h>

#include "support.hpp"

using namespace idiombn;
using namespace testing_support;

namespace {

Variable binary(const std::string& name, Role role = Role::Unclassified) { return {name, {"yes", "no"}, role}; }

Cpt prior(const std::string& name, double p) { return {name, {}, {p, 1.0 - p}}; }

BayesNet chain() {
  return build_network({binary("S"), binary("L")}, {{"S", "L", false}},
                       {prior("S", 0.3), Cpt{"L", {"S"}, {0.1, 0.9, 0.01, 0.99}}})
      .value();
}

bool has_code(const BuildResult& r, BuildErrorCode code) {
  for (const auto& e : r.errors())
    if (e.code == code) return true;
  return false;
}

}  // namespace

TEST(BuildNetwork, MinimalChain) {
  const BayesNet net = chain();
  EXPECT_EQ(net.size(), 2u);
  EXPECT_EQ(net.edges().size(), 1u);
  EXPECT_TRUE(net.has_edge("S", "L"));
  EXPECT_FALSE(net.has_edge("L", "S"));
  EXPECT_EQ(net.parents(net.index_of("L")), std::vector<std::size_t>{net.index_of("S")});
}

TEST(BuildNetwork, TwoCycleNamesBothNodes) {
  auto r = build_network({binary("A"), binary("B")}, {{"A", "B", false}, {"B", "A", false}},
                         {Cpt{"A", {"B"}, {0.5, 0.5, 0.5, 0.5}}, Cpt{"B", {"A"}, {0.5, 0.5, 0.5, 0.5}}});
  ASSERT_FALSE(r.ok());
  const auto it = std::find_if(r.errors().begin(), r.errors().end(),
                               [](const BuildError& e) { return e.code == BuildErrorCode::CycleDetected; });
  ASSERT_NE(it, r.errors().end());
  std::vector<std::string> nodes = it->nodes;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  EXPECT_EQ(nodes, (std::vector<std::string>{"A", "B"}));
  EXPECT_THROW(r.value(), Error);
}

TEST(BuildNetwork, ReportsEveryViolation) {
  auto r = build_network({binary("A"), binary("B"), binary("C")},
                         {{"A", "B", false}, {"A", "Z", false}, {"C", "C", false}},
                         {prior("A", 0.5), Cpt{"B", {}, {0.5, 0.5}}, Cpt{"C", {}, {0.6, 0.3}}});
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(has_code(r, BuildErrorCode::UnknownVariable));
  EXPECT_TRUE(has_code(r, BuildErrorCode::SelfLoop));
  EXPECT_TRUE(has_code(r, BuildErrorCode::CptMismatch));
  EXPECT_TRUE(has_code(r, BuildErrorCode::RowNotNormalized));
}

TEST(BuildNetwork, RowNotNormalizedCarriesRowAndSum) {
  auto r = build_network({binary("S"), binary("L")}, {{"S", "L", false}},
                         {prior("S", 0.3), Cpt{"L", {"S"}, {0.6, 0.3, 0.99, 0.01}}});
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(r.errors().size(), 1u);
  const auto& e = r.errors().front();
  EXPECT_EQ(e.code, BuildErrorCode::RowNotNormalized);
  EXPECT_EQ(e.nodes.front(), "L");
  ASSERT_TRUE(e.row.has_value());
  EXPECT_EQ(*e.row, 0u);
  EXPECT_NEAR(*e.sum, 0.9, 1e-12);
}

TEST(BuildNetwork, RowSumToleranceIsOneInABillion) {
  auto ok = build_network({binary("A")}, {}, {Cpt{"A", {}, {0.5 + 5e-10, 0.5}}});
  EXPECT_TRUE(ok.ok());
  auto bad = build_network({binary("A")}, {}, {Cpt{"A", {}, {0.5 + 5e-9, 0.5}}});
  EXPECT_FALSE(bad.ok());
}

TEST(BuildNetwork, RejectsBadVariables) {
  EXPECT_TRUE(has_code(build_network({{"A", {"x"}, Role::Unclassified}}, {}, {Cpt{"A", {}, {1.0}}}),
                       BuildErrorCode::InvalidStates));
  EXPECT_TRUE(has_code(build_network({{"A", {"x", "x"}, Role::Unclassified}}, {}, {Cpt{"A", {}, {0.5, 0.5}}}),
                       BuildErrorCode::InvalidStates));
  EXPECT_TRUE(has_code(build_network({binary("A"), binary("A")}, {}, {prior("A", 0.5)}),
                       BuildErrorCode::DuplicateVariable));
  EXPECT_TRUE(has_code(build_network({binary("")}, {}, {prior("", 0.5)}), BuildErrorCode::EmptyName));
  EXPECT_TRUE(has_code(build_network({binary("A")}, {}, {}), BuildErrorCode::MissingCpt));
  EXPECT_TRUE(has_code(build_network({binary("A")}, {}, {Cpt{"A", {}, {1.2, -0.2}}}),
                       BuildErrorCode::InvalidProbability));
}

TEST(BuildNetwork, DecisionArcsMustTargetTreatments) {
  auto good = build_network({binary("C", Role::Condition), binary("T", Role::Treatment)}, {{"C", "T", true}},
                            {prior("C", 0.3), Cpt{"T", {"C"}, {0.8, 0.2, 0.2, 0.8}}});
  ASSERT_TRUE(good.ok());
  EXPECT_TRUE(good.value().is_decision_edge("C", "T"));
  auto bad = build_network({binary("C", Role::Condition), binary("T", Role::Symptom)}, {{"C", "T", true}},
                           {prior("C", 0.3), Cpt{"T", {"C"}, {0.8, 0.2, 0.2, 0.8}}});
  EXPECT_TRUE(has_code(bad, BuildErrorCode::DecisionArcTarget));
}

TEST(BuildNetwork, CptParentOrderDefinesRowLayout) {
  // B's CPT lists C before A, so C is the most significant index.
  auto net = build_network({binary("A"), binary("B"), binary("C")}, {{"A", "B", false}, {"C", "B", false}},
                           {prior("A", 0.5), prior("C", 0.5),
                            Cpt{"B", {"C", "A"}, {0.1, 0.9, 0.2, 0.8, 0.3, 0.7, 0.4, 0.6}}})
                 .value();
  EXPECT_DOUBLE_EQ(joint_probability(net, {{"A", "no"}, {"C", "yes"}, {"B", "yes"}}), 0.5 * 0.5 * 0.2);
  EXPECT_DOUBLE_EQ(joint_probability(net, {{"A", "yes"}, {"C", "no"}, {"B", "yes"}}), 0.5 * 0.5 * 0.3);
}

TEST(JointProbability, ChainRule) {
  const BayesNet net = chain();
  EXPECT_DOUBLE_EQ(joint_probability(net, {{"S", "yes"}, {"L", "yes"}}), 0.03);
  EXPECT_DOUBLE_EQ(joint_probability(net, {{"S", "no"}, {"L", "no"}}), 0.7 * 0.99);
  EXPECT_THROW(joint_probability(net, {{"S", "yes"}}), Error);
  try {
    joint_probability(net, {{"S", "yes"}});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteAssignment);
  }
}

TEST(JointProbability, SumsToOneOnRandomNets) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const BayesNet net = random_network(rng, {.min_nodes = 1, .max_nodes = 8, .max_states = 3});
    double total = 0.0;
    std::vector<std::size_t> states(net.size(), 0);
    for (;;) {
      total += joint_probability(net, states);
      std::size_t k = net.size();
      while (k-- > 0) {
        if (++states[k] < net.variable(k).cardinality()) break;
        states[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Topology, OrderRespectsEdgesAndDeclarationTies) {
  auto net = build_network({binary("B"), binary("A"), binary("C")}, {{"A", "C", false}},
                           {prior("B", 0.5), prior("A", 0.5), Cpt{"C", {"A"}, {0.5, 0.5, 0.5, 0.5}}})
                 .value();
  EXPECT_EQ(topological_order(net), (std::vector<std::string>{"B", "A", "C"}));
}

TEST(Topology, RandomOrdersAreTopological) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const BayesNet net = random_network(rng);
    const auto order = topological_indices(net.dag());
    std::vector<std::size_t> rank(net.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;
    for (const auto& e : net.edges()) EXPECT_LT(rank[net.index_of(e.parent)], rank[net.index_of(e.child)]);
  }
}

TEST(Reachability, AncestorsAndDescendants) {
  auto net = build_network({binary("A"), binary("B"), binary("C"), binary("D")},
                           {{"A", "B", false}, {"B", "C", false}, {"D", "C", false}},
                           {prior("A", 0.5), Cpt{"B", {"A"}, {0.5, 0.5, 0.5, 0.5}}, prior("D", 0.5),
                            Cpt{"C", {"B", "D"}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}}})
                 .value();
  EXPECT_EQ(descendants(net, "A"), (std::vector<std::string>{"B", "C"}));
  EXPECT_EQ(ancestors(net, "C"), (std::vector<std::string>{"A", "B", "D"}));
  EXPECT_TRUE(descendants(net, "C").empty());
}

TEST(DSeparation, ThreeConnectionTypes) {
  // Serial A -> B -> C.
  auto serial = build_network({binary("A"), binary("B"), binary("C")}, {{"A", "B", false}, {"B", "C", false}},
                              {prior("A", 0.5), Cpt{"B", {"A"}, {0.9, 0.1, 0.2, 0.8}},
                               Cpt{"C", {"B"}, {0.7, 0.3, 0.1, 0.9}}})
                    .value();
  EXPECT_FALSE(d_separated(serial, {"A"}, {"C"}, {}));
  EXPECT_TRUE(d_separated(serial, {"A"}, {"C"}, {"B"}));
  // Diverging A <- B -> C.
  auto diverging = build_network({binary("A"), binary("B"), binary("C")}, {{"B", "A", false}, {"B", "C", false}},
                                 {Cpt{"A", {"B"}, {0.9, 0.1, 0.2, 0.8}}, prior("B", 0.4),
                                  Cpt{"C", {"B"}, {0.7, 0.3, 0.1, 0.9}}})
                       .value();
  EXPECT_FALSE(d_separated(diverging, {"A"}, {"C"}, {}));
  EXPECT_TRUE(d_separated(diverging, {"A"}, {"C"}, {"B"}));
  // Converging A -> B <- C with descendant D of B.
  auto converging =
      build_network({binary("A"), binary("B"), binary("C"), binary("D")},
                    {{"A", "B", false}, {"C", "B", false}, {"B", "D", false}},
                    {prior("A", 0.3), Cpt{"B", {"A", "C"}, {0.99, 0.01, 0.9, 0.1, 0.9, 0.1, 0.01, 0.99}},
                     prior("C", 0.3), Cpt{"D", {"B"}, {0.8, 0.2, 0.1, 0.9}}})
          .value();
  EXPECT_TRUE(d_separated(converging, {"A"}, {"C"}, {}));
  EXPECT_FALSE(d_separated(converging, {"A"}, {"C"}, {"B"}));
  EXPECT_FALSE(d_separated(converging, {"A"}, {"C"}, {"D"}));
}

TEST(DSeparation, ValidatesSets) {
  const BayesNet net = chain();
  auto code_of = [&](auto&& call) {
    try {
      call();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code_of([&] { d_separated(net, {}, {"L"}, {}); }), ErrorCode::EmptyQuerySet);
  EXPECT_EQ(code_of([&] { d_separated(net, {"S"}, {"S"}, {}); }), ErrorCode::OverlappingSets);
  EXPECT_EQ(code_of([&] { d_separated(net, {"S"}, {"L"}, {"L"}); }), ErrorCode::OverlappingSets);
  EXPECT_EQ(code_of([&] { d_separated(net, {"S"}, {"Q"}, {}); }), ErrorCode::UnknownVariable);
}

TEST(DSeparation, SymmetricOnRandomNets) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const BayesNet net = random_network(rng, {.min_nodes = 3, .max_nodes = 10});
    std::vector<std::size_t> perm(net.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::vector<std::size_t> x{perm[0]}, y{perm[1]};
    std::vector<std::size_t> z;
    for (std::size_t i = 2; i < perm.size(); ++i)
      if (rng() % 3 == 0) z.push_back(perm[i]);
    EXPECT_EQ(d_separated(net.dag(), x, y, z), d_separated(net.dag(), y, x, z));
  }
}

TEST(Resolve, ValidatesNamesAndStates) {
  const BayesNet net = chain();
  EXPECT_EQ(net.resolve({{"S", "no"}}), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}}));
  EXPECT_THROW(net.resolve({{"Q", "no"}}), Error);
  try {
    net.resolve({{"S", "maybe"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownState);
  }
}
