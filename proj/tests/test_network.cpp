#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "radnet/generate.hpp"
#include "radnet/network.hpp"
#include "radnet/rng.hpp"

using namespace radnet;

namespace {

FlowFunctionSpec unit_linear() { return FlowFunctionSpec::linear({1.0}); }

// Four-node example: reference a=0, edges (b,a), (c,b), (d,b); children of b
// are c and d.
NetworkGraph four_node_fixture() {
  std::vector<CandidateEdge> edges = {
      {1, 0, unit_linear(), true},
      {2, 1, unit_linear(), true},
      {3, 1, unit_linear(), true},
  };
  return NetworkGraph(4, 0, std::move(edges));
}

NetworkGraph random_radial(int n, std::uint64_t seed, int fictitious = 0) {
  GenSpec gen;
  gen.tmpl = NetworkTemplate::random_radial;
  gen.nodes = n;
  gen.fictitious = fictitious;
  gen.family = FamilyChoice::linear;
  gen.seed = seed;
  return gen_network(gen);
}

TEST(NetworkGraph, RejectsBadInputs) {
  EXPECT_THROW(NetworkGraph(3, 5, {}), UnknownNode);
  EXPECT_THROW(NetworkGraph(2, 0, {{0, 0, unit_linear(), true}}), InvalidSpec);
  EXPECT_THROW(NetworkGraph(2, 0,
                            {{0, 1, unit_linear(), true}, {1, 0, unit_linear(), false}}),
               InvalidSpec);  // duplicate unordered pair
  EXPECT_THROW(NetworkGraph(3, 0, {{0, 1, unit_linear(), true}}), Disconnected);
  // commodity counts must agree across edges
  EXPECT_THROW(NetworkGraph(3, 0,
                            {{0, 1, FlowFunctionSpec::linear({1.0, 2.0}), true},
                             {1, 2, unit_linear(), true}}),
               DimensionMismatch);
}

TEST(ValidateRadial, ChainOrientsTowardReference) {
  std::vector<CandidateEdge> edges = {
      {0, 1, unit_linear(), true},
      {1, 2, unit_linear(), true},
      {2, 3, unit_linear(), true},
  };
  const RadialTree tree = validate_radial(NetworkGraph(4, 0, std::move(edges)));
  EXPECT_EQ(*tree.parent(1), 0);
  EXPECT_EQ(*tree.parent(2), 1);
  EXPECT_EQ(*tree.parent(3), 2);
  EXPECT_FALSE(tree.parent(0).has_value());
  EXPECT_EQ(tree.depth(3), 3);
}

TEST(ValidateRadial, FourNodeFixtureStructure) {
  const RadialTree tree = validate_radial(four_node_fixture());
  EXPECT_EQ(tree.children(1), (std::vector<NodeId>{2, 3}));
  const auto path = path_to_reference(tree, 2);
  ASSERT_EQ(path.size(), 2u);
  EXPECT_EQ(path[0].child, 2);
  EXPECT_EQ(path[0].parent, 1);
  EXPECT_EQ(path[1].child, 1);
  EXPECT_EQ(path[1].parent, 0);
}

TEST(ValidateRadial, CycleRejected) {
  // 3-cycle among nodes 1,2,3 plus the reference 0 (kept attached through a
  // non-operational edge so the graph itself is well formed).
  std::vector<CandidateEdge> edges = {
      {1, 2, unit_linear(), true},
      {2, 3, unit_linear(), true},
      {3, 1, unit_linear(), true},
      {0, 1, unit_linear(), false},
  };
  EXPECT_THROW(validate_radial(NetworkGraph(4, 0, std::move(edges))), CycleDetected);
}

TEST(ValidateRadial, DisconnectedNamesTheNode) {
  std::vector<CandidateEdge> edges = {
      {0, 1, unit_linear(), true},
      {1, 2, unit_linear(), true},
      {2, 3, unit_linear(), false},
  };
  try {
    validate_radial(NetworkGraph(4, 0, std::move(edges)));
    FAIL() << "expected Disconnected";
  } catch (const Disconnected& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(ValidateForest, SplitsComponents) {
  std::vector<CandidateEdge> edges = {
      {0, 1, unit_linear(), true},
      {2, 3, unit_linear(), true},
      {1, 2, unit_linear(), false},
  };
  const auto forest = validate_forest(NetworkGraph(4, 0, std::move(edges)));
  ASSERT_EQ(forest.size(), 2u);
  EXPECT_EQ(forest[0].reference(), 0);
  EXPECT_EQ(forest[0].nodes(), (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(forest[1].reference(), 2);  // smallest id of its component
  EXPECT_EQ(forest[1].nodes(), (std::vector<NodeId>{2, 3}));
}

TEST(PathToReference, ReferenceIsEmptyAndUnknownThrows) {
  const RadialTree tree = validate_radial(four_node_fixture());
  EXPECT_TRUE(path_to_reference(tree, 0).empty());
  EXPECT_THROW(path_to_reference(tree, 9), UnknownNode);
}

TEST(PathToReference, MatchesParentChainWalk) {
  const NetworkGraph graph = random_radial(6, 17);
  const RadialTree tree = validate_radial(graph);
  for (NodeId a = 0; a < graph.node_count(); ++a) {
    const auto path = path_to_reference(tree, a);
    EXPECT_EQ(static_cast<int>(path.size()), tree.depth(a));
    NodeId at = a;
    for (const TreeEdgeRef& e : path) {
      EXPECT_EQ(e.child, at);
      at = *tree.parent(at);
      EXPECT_EQ(e.parent, at);
    }
    EXPECT_EQ(at, tree.reference());
  }
}

TEST(Descendants, FixtureLeafAndRoot) {
  const RadialTree tree = validate_radial(four_node_fixture());
  EXPECT_EQ(descendants(tree, 1), (std::vector<NodeId>{1, 2, 3}));
  EXPECT_EQ(descendants(tree, 3), (std::vector<NodeId>{3}));
  EXPECT_EQ(descendants(tree, 0), (std::vector<NodeId>{0, 1, 2, 3}));
}

TEST(Descendants, SizeRecursionAndPathMembership) {
  const NetworkGraph graph = random_radial(12, 99);
  const RadialTree tree = validate_radial(graph);
  for (NodeId a = 0; a < graph.node_count(); ++a) {
    const auto d = descendants(tree, a);
    EXPECT_GE(d.size(), 1u);
    std::size_t child_total = 0;
    for (NodeId c : tree.children(a)) child_total += descendants(tree, c).size();
    EXPECT_EQ(child_total, d.size() - 1);
    if (a == tree.reference()) continue;
    // descendants(a) is exactly the set of nodes whose reference path uses
    // the edge from a to its parent.
    std::set<NodeId> via_paths;
    for (NodeId b = 0; b < graph.node_count(); ++b)
      for (const TreeEdgeRef& e : path_to_reference(tree, b))
        if (e.child == a) via_paths.insert(b);
    EXPECT_EQ(std::vector<NodeId>(via_paths.begin(), via_paths.end()), d);
  }
}

TEST(ReducedIncidence, FourNodeFixtureMatrices) {
  const RadialTree tree = validate_radial(four_node_fixture());
  const IncidenceSystem sys = reduced_incidence(tree);
  // Columns are nodes b,c,d; rows are edges (b,a), (c,b), (d,b).
  const MatI expected_m = [] {
    MatI m(3, 3, 0);
    m(0, 0) = 1;
    m(1, 0) = -1;
    m(1, 1) = 1;
    m(2, 0) = -1;
    m(2, 2) = 1;
    return m;
  }();
  const MatI expected_inv = [] {
    MatI m(3, 3, 0);
    m(0, 0) = 1;
    m(1, 0) = 1;
    m(1, 1) = 1;
    m(2, 0) = 1;
    m(2, 2) = 1;
    return m;
  }();
  EXPECT_EQ(sys.m, expected_m);
  EXPECT_EQ(sys.m_inverse, expected_inv);
}

TEST(ReducedIncidence, SingleEdge) {
  const RadialTree tree =
      validate_radial(NetworkGraph(2, 0, {{0, 1, unit_linear(), true}}));
  const IncidenceSystem sys = reduced_incidence(tree);
  ASSERT_EQ(sys.m.rows(), 1u);
  EXPECT_EQ(sys.m(0, 0), 1);
  EXPECT_EQ(sys.m_inverse(0, 0), 1);
}

TEST(ReducedIncidence, InverseIsExactOnRandomTrees) {
  for (std::uint64_t seed : {3u, 14u, 60u}) {
    const NetworkGraph graph = random_radial(10, seed);
    const RadialTree tree = validate_radial(graph);
    const IncidenceSystem sys = reduced_incidence(tree);
    const std::size_t k = sys.m.rows();
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        int mm_inv = 0, inv_mm = 0;
        for (std::size_t t = 0; t < k; ++t) {
          mm_inv += sys.m(i, t) * sys.m_inverse(t, j);
          inv_mm += sys.m_inverse(i, t) * sys.m(t, j);
        }
        EXPECT_EQ(mm_inv, i == j ? 1 : 0);
        EXPECT_EQ(inv_mm, i == j ? 1 : 0);
      }
    }
  }
}

TEST(StructuralHash, SensitiveToContent) {
  const NetworkGraph a = four_node_fixture();
  NetworkGraph b = four_node_fixture();
  EXPECT_EQ(a.structural_hash(), b.structural_hash());
  std::vector<CandidateEdge> edges = {
      {1, 0, unit_linear(), true},
      {2, 1, unit_linear(), true},
      {3, 1, FlowFunctionSpec::linear({2.0}), true},
  };
  const NetworkGraph c(4, 0, std::move(edges));
  EXPECT_NE(a.structural_hash(), c.structural_hash());
}

}  // namespace
