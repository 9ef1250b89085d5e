#include <gtest/gtest.h>

#include <random>

#include "multirank/error.hpp"
#include "multirank/network.hpp"
#include "multirank/supra.hpp"
#include "support.hpp"

using namespace multirank;
using multirank::testing::nine_borrower_grid;
using multirank::testing::toy_chain;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no multirank::Error thrown";
    return Errc::InvalidConfig;
}

}  // namespace

TEST(BuildNetwork, ToyCounts) {
    const auto net = toy_chain();
    EXPECT_EQ(net.num_nodes(), 5u);
    EXPECT_EQ(net.num_layers(), 2u);
    EXPECT_EQ(net.num_common(), 3u);
    std::vector<std::string> ids;
    for (const auto& n : net.nodes()) ids.push_back(n.id);
    EXPECT_EQ(ids, (std::vector<std::string>{"b1", "b2", "b3", "p1", "a1"}));
    EXPECT_EQ(net.node(3).layer_of_origin, std::optional<std::size_t>(0));
    EXPECT_EQ(net.node(4).layer_of_origin, std::optional<std::size_t>(1));
    EXPECT_FALSE(net.node(0).layer_of_origin.has_value());
}

TEST(BuildNetwork, FigureOneHasFifteenNodes) {
    const auto net = nine_borrower_grid();
    EXPECT_EQ(net.num_common(), 9u);
    EXPECT_EQ(net.num_nodes(), 15u);
    EXPECT_EQ(net.num_layers(), 2u);
}

TEST(BuildNetwork, DuplicateEdgesMergeByWeight) {
    const auto net = build_network({LayerSpec::from_edges("product", {{"b1", "p1", 1.0}, {"b1", "p1", 1.0}})}, 1.0);
    ASSERT_EQ(net.layer(0).edges.size(), 1u);
    EXPECT_EQ(net.layer(0).edges[0].weight, 2.0);
}

TEST(BuildNetwork, Errors) {
    EXPECT_EQ(code_of([] { toy_chain(-0.5); }), Errc::NegativeStickiness);
    EXPECT_EQ(code_of([] {
                  build_network({LayerSpec::from_edges("a", {{"b1", "x"}}), LayerSpec::from_edges("b", {{"b2", "x"}})},
                                1.0);
              }),
              Errc::DuplicateNodeId);
    EXPECT_EQ(code_of([] {
                  build_network({LayerSpec::from_edges("a", {{"b1", "x"}}), LayerSpec::from_edges("b", {{"x", "y"}})},
                                1.0);
              }),
              Errc::DuplicateNodeId);
    EXPECT_EQ(code_of([] { build_network({LayerSpec{"a", {"p1"}, {{"b1", "p2", 1.0}}}}, 1.0); }),
              Errc::EdgeEndpointMissing);
    EXPECT_EQ(code_of([] { build_network({LayerSpec::from_edges("a", {{"b1", "p1", 0.0}})}, 1.0); }),
              Errc::NonPositiveWeight);
    EXPECT_EQ(code_of([] { build_network({LayerSpec::from_edges("a", {{"b1", "p1", -1.0}})}, 1.0); }),
              Errc::NonPositiveWeight);
}

TEST(SupraAdjacency, ToyStructure) {
    const auto adj = supra_adjacency(toy_chain(1.0));
    EXPECT_EQ(adj.dim(), 10);
    EXPECT_EQ(adj.nonzeros(), 8 + 6);
    EXPECT_TRUE(adj.is_symmetric());
    EXPECT_EQ(adj.coeff(adj.state(0, 0), adj.state(0, 1)), 1.0);  // b1 across layers
    EXPECT_EQ(adj.coeff(adj.state(3, 0), adj.state(3, 1)), 0.0);  // p1 is not common
}

TEST(SupraAdjacency, ZeroStickinessIsBlockDiagonal) {
    const auto adj = supra_adjacency(toy_chain(0.0));
    const auto d = adj.to_dense();
    EXPECT_EQ(d.topRightCorner(5, 5).cwiseAbs().sum(), 0.0);
    EXPECT_EQ(d.bottomLeftCorner(5, 5).cwiseAbs().sum(), 0.0);
    EXPECT_EQ(adj.nonzeros(), 8);
}

TEST(SupraAdjacency, FigureOneInterBlocksAreDiagonalOnCommonNodes) {
    const double s = 2.5;
    const auto d = supra_adjacency(nine_borrower_grid(s)).to_dense();
    const Eigen::MatrixXd inter = d.topRightCorner(15, 15);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(15, 15);
    expected.topLeftCorner(9, 9).diagonal().setConstant(s);
    EXPECT_EQ(inter, expected);
    EXPECT_EQ(Eigen::MatrixXd(d.bottomLeftCorner(15, 15)), expected);
    // Intra blocks: 9 edges each, bipartite.
    EXPECT_EQ(d.topLeftCorner(15, 15).sum(), 18.0);
    EXPECT_EQ(d.bottomRightCorner(15, 15).sum(), 18.0);
    EXPECT_EQ(d.topLeftCorner(9, 9).sum(), 0.0);
}

TEST(SupraAdjacency, ThreeLayersLinkEveryLayerPair) {
    const auto net = build_network({LayerSpec::from_edges("x", {{"b1", "p"}}), LayerSpec::from_edges("y", {{"b1", "q"}}),
                                    LayerSpec::from_edges("z", {{"b1", "r"}})},
                                   3.0);
    const auto adj = supra_adjacency(net);
    for (Eigen::Index a = 0; a < 3; ++a)
        for (Eigen::Index b = 0; b < 3; ++b)
            EXPECT_EQ(adj.coeff(adj.state(0, a), adj.state(0, b)), a == b ? 0.0 : 3.0);
    EXPECT_TRUE(adj.is_symmetric());
}

TEST(SupraTransition, NormalizesColumns) {
    Eigen::SparseMatrix<double> m(3, 3);
    m.insert(0, 0) = 2.0;
    m.insert(2, 0) = 2.0;
    const auto t = supra_transition(SupraMatrix<double>(3, 1, m));
    EXPECT_EQ(t.coeff(0, 0), 0.5);
    EXPECT_EQ(t.coeff(1, 0), 0.0);
    EXPECT_EQ(t.coeff(2, 0), 0.5);
}

TEST(SupraTransition, DanglingColumnIsUniform) {
    Eigen::SparseMatrix<double> m(10, 10);
    m.insert(1, 0) = 1.0;
    const auto t = supra_transition(SupraMatrix<double>(10, 1, m));
    for (Eigen::Index r = 0; r < 10; ++r) EXPECT_DOUBLE_EQ(t.coeff(r, 5), 0.1);
    EXPECT_TRUE(t.filled(5));
    EXPECT_FALSE(t.filled(0));
}

TEST(SupraTransition, ToyColumnOfB1InProductLayer) {
    const auto t = supra_transition(supra_adjacency(toy_chain(1.0)));
    const Eigen::MatrixXd dense = t.to_dense();
    const Eigen::VectorXd col = dense.col(t.state(0, 0));
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(10);
    expected[t.state(3, 0)] = 0.5;  // p1 in product layer
    expected[t.state(0, 1)] = 0.5;  // b1 in geo layer
    EXPECT_EQ(col, expected);
}

TEST(SupraTransition, ZeroStickinessKeepsOffDiagonalBlocksEmpty) {
    const auto net = nine_borrower_grid(0.0);
    const auto t = supra_transition(supra_adjacency(net));
    const Eigen::Index n = t.nodes();
    for (Eigen::Index c = 0; c < t.dim(); ++c) {
        if (t.filled(c)) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(t.entries(), c); it; ++it)
            EXPECT_EQ(it.row() / n, c / n) << "entry crosses layers at column " << c;
    }
}

TEST(SupraTransition, RandomColumnsSumToOne) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = build_network(multirank::testing::random_layers(rng, 12, {4, 5, 3}, 0.3, true, trial % 2 == 0),
                                       0.5 * trial);
        const auto t = supra_transition(supra_adjacency(net));
        const auto sums = t.column_sums();
        for (Eigen::Index c = 0; c < sums.size(); ++c) EXPECT_NEAR(sums[c], 1.0, 1e-12);
        EXPECT_TRUE(supra_adjacency(net).is_symmetric());
    }
}

TEST(AggregateNetwork, ToyMergesLayers) {
    const auto flat = aggregate_network(toy_chain());
    EXPECT_EQ(flat.num_layers(), 1u);
    EXPECT_EQ(flat.num_nodes(), 5u);
    EXPECT_EQ(flat.num_edges(), 4u);
    std::vector<std::string> tags;
    for (const auto& e : flat.layer(0).edges) tags.push_back(flat.edge_tags()[e.tag]);
    EXPECT_EQ(tags, (std::vector<std::string>{"product", "product", "geo", "geo"}));
}

TEST(AggregateNetwork, FigureOneKeepsAllNodes) {
    const auto flat = aggregate_network(nine_borrower_grid());
    EXPECT_EQ(flat.num_nodes(), 15u);
    EXPECT_EQ(flat.num_edges(), 18u);
    EXPECT_EQ(flat.edge_tags().size(), 2u);
}

TEST(AggregateNetwork, SingleLayerIsFixpoint) {
    const auto once = aggregate_network(toy_chain());
    const auto twice = aggregate_network(once);
    EXPECT_EQ(supra_adjacency(once).to_dense(), supra_adjacency(twice).to_dense());
    EXPECT_EQ(twice.layer(0).name, once.layer(0).name);
}

TEST(AggregateNetwork, PreservesTotalWeight) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = build_network(multirank::testing::random_layers(rng, 15, {3, 6}, 0.4, true), 1.0);
        EXPECT_EQ(aggregate_network(net).total_edge_weight(), net.total_edge_weight());
    }
}

TEST(LargestComponent, Toy) { EXPECT_EQ(largest_component_fraction(toy_chain()), 1.0); }

TEST(LargestComponent, TwoDisjointCopies) {
    const auto net = build_network({LayerSpec::from_edges("product", {{"b1", "p1"}, {"b2", "p1"}, {"c1", "q1"}, {"c2", "q1"}}),
                                    LayerSpec::from_edges("geo", {{"b2", "a1"}, {"b3", "a1"}, {"c2", "z1"}, {"c3", "z1"}})},
                                   1.0);
    EXPECT_EQ(largest_component_fraction(net), 0.5);
}

TEST(LargestComponent, ZeroStickinessUsesLayerUnion) {
    EXPECT_EQ(largest_component_fraction(toy_chain(0.0)), 1.0);
}

TEST(LargestComponent, EmptyNetwork) {
    EXPECT_EQ(code_of([] { largest_component_fraction(build_network({}, 1.0)); }), Errc::EmptyNetwork);
}
