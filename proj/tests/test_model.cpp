/*
 Copyright 2026 The dlqg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "dlqg/errors.hpp"
#include "dlqg/io.hpp"
#include "dlqg/model.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>

namespace dlqg {
namespace {

using testing::diag;
using testing::Rng;

TEST(Graph, NormalizesAndDeduplicatesEdges) {
    InterconnectionGraph g(3, {{1, 0}, {0, 1}, {2, 1}});
    ASSERT_EQ(g.edges().size(), 2u);
    EXPECT_EQ(g.edges()[0], (InterconnectionGraph::Edge{0, 1}));
    EXPECT_EQ(g.edges()[1], (InterconnectionGraph::Edge{1, 2}));
    EXPECT_TRUE(g.adjacent(0, 1));
    EXPECT_TRUE(g.adjacent(1, 0));
    EXPECT_FALSE(g.adjacent(0, 2));
}

TEST(Graph, RejectsMalformedInput) {
    EXPECT_THROW(InterconnectionGraph(0, {}), GraphError);
    EXPECT_THROW(InterconnectionGraph(2, {{0, 0}}), GraphError);
    EXPECT_THROW(InterconnectionGraph(2, {{0, 2}}), GraphError);
    EXPECT_THROW(InterconnectionGraph(3, {{0, 1}}), GraphError);
    EXPECT_NO_THROW(InterconnectionGraph(1, {}));
}

TEST(Assemble, TwoNodeBlockPlacement) {
    const ProblemInstance p = testing::coupled_pair(1);
    Matrix A(2, 2);
    A << 1.0, 0.1, 0.1, 1.0;
    EXPECT_EQ(p.system.A(), A);
    EXPECT_EQ(p.system.B(), Matrix::Identity(2, 2));
    ASSERT_EQ(p.system.partition().size(), 2u);
    EXPECT_EQ(p.system.partition()[1], (SubsystemBlock{1, 1, 1, 1}));
}

TEST(Assemble, SingleNodeIsIdentity) {
    const ProblemInstance p = testing::scalar(0.7, 2.0, 1, 1.0, 1.0);
    EXPECT_EQ(p.system.A()(0, 0), 0.7);
    EXPECT_EQ(p.system.B()(0, 0), 2.0);
}

TEST(Assemble, CouplingOutsideNeighborSetIsRejected) {
    InterconnectionGraph path(3, {{0, 1}, {1, 2}});
    const Matrix one = Matrix::Ones(1, 1);
    std::vector<SubsystemDynamics> subs(3, SubsystemDynamics{one, one, {}});
    subs[0].coupling[2] = one;
    EXPECT_THROW(assemble_global(path, subs, Matrix::Identity(3, 3), Matrix::Identity(3, 3)),
                 GraphError);
}

TEST(Assemble, DimensionMismatches) {
    InterconnectionGraph g(2, {{0, 1}});
    const Matrix one = Matrix::Ones(1, 1);
    std::vector<SubsystemDynamics> subs{{one, one, {}}, {one, one, {{0, Matrix::Ones(1, 2)}}}};
    EXPECT_THROW(assemble_global(g, subs, Matrix::Identity(2, 2), Matrix::Identity(2, 2)),
                 DimensionMismatch);
    subs[1].coupling.clear();
    EXPECT_THROW(assemble_global(g, subs, Matrix::Identity(3, 3), Matrix::Identity(2, 2)),
                 DimensionMismatch);
    EXPECT_THROW(assemble_global(g, {subs[0]}, Matrix::Identity(1, 1), Matrix::Identity(1, 1)),
                 DimensionMismatch);
}

TEST(Assemble, CovarianceAssumptions) {
    InterconnectionGraph g(2, {{0, 1}});
    const Matrix one = Matrix::Ones(1, 1);
    std::vector<SubsystemDynamics> subs{{one, one, {}}, {one, one, {}}};
    Matrix coupled_noise(2, 2);
    coupled_noise << 1.0, 0.5, 0.5, 1.0;
    EXPECT_THROW(assemble_global(g, subs, Matrix::Identity(2, 2), coupled_noise), InvalidInstance);
    EXPECT_THROW(assemble_global(g, subs, diag({1.0, -1e-6}), Matrix::Identity(2, 2)),
                 InvalidInstance);
    EXPECT_NO_THROW(assemble_global(g, subs, diag({1.0, -1e-11}), Matrix::Identity(2, 2)));
}

// Sparsity of A equals the adjacency pattern plus the diagonal.
TEST(Assemble, SparsityMatchesGraph) {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int N = 2 + trial % 5;
        InterconnectionGraph g = testing::random_connected_graph(rng, N, 0.3);
        std::vector<SubsystemDynamics> subs;
        for (int i = 0; i < N; ++i) {
            SubsystemDynamics s{Matrix::Constant(1, 1, 1.0 + i), Matrix::Ones(1, 1), {}};
            for (int j : g.neighbors(i)) {
                s.coupling[j] = Matrix::Constant(1, 1, 0.5 + j);
            }
            subs.push_back(std::move(s));
        }
        const GlobalSystem sys =
            assemble_global(g, subs, Matrix::Identity(N, N), Matrix::Identity(N, N));
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                EXPECT_EQ(sys.A()(i, j) != 0.0, i == j || g.adjacent(i, j));
            }
        }
    }
}

// Relabeling nodes and permuting the assembled matrices agree.
TEST(Assemble, PermutationConsistent) {
    Rng rng(11);
    const std::vector<int> n_of{1, 2, 1};
    const std::vector<int> m_of{1, 1, 2};
    InterconnectionGraph g(3, {{0, 1}, {1, 2}});
    std::vector<SubsystemDynamics> subs;
    for (int i = 0; i < 3; ++i) {
        SubsystemDynamics s{testing::random_matrix(rng, n_of[i], n_of[i]),
                            testing::random_matrix(rng, n_of[i], m_of[i]), {}};
        for (int j : g.neighbors(i)) {
            s.coupling[j] = testing::random_matrix(rng, n_of[i], n_of[j]);
        }
        subs.push_back(std::move(s));
    }
    const Matrix Sx = testing::random_block_psd(rng, n_of, 0.1);
    const Matrix Sw = testing::random_block_psd(rng, n_of, 0.1);
    const GlobalSystem original = assemble_global(g, subs, Sx, Sw);

    const std::vector<int> perm{2, 0, 1};  // new node k is old node perm[k]
    std::vector<int> inverse(3);
    for (int k = 0; k < 3; ++k) {
        inverse[static_cast<std::size_t>(perm[k])] = k;
    }
    std::vector<InterconnectionGraph::Edge> edges;
    for (auto [a, b] : g.edges()) {
        edges.emplace_back(inverse[a], inverse[b]);
    }
    std::vector<SubsystemDynamics> relabeled;
    for (int k = 0; k < 3; ++k) {
        SubsystemDynamics s = subs[static_cast<std::size_t>(perm[k])];
        std::map<int, Matrix> coupling;
        for (auto& [j, Aij] : s.coupling) {
            coupling[inverse[static_cast<std::size_t>(j)]] = Aij;
        }
        s.coupling = std::move(coupling);
        relabeled.push_back(std::move(s));
    }
    std::vector<int> xs;
    std::vector<int> us;
    for (int k = 0; k < 3; ++k) {
        const auto& b = original.partition()[static_cast<std::size_t>(perm[k])];
        for (int i = 0; i < b.state_dim; ++i) xs.push_back(b.state_offset + i);
        for (int i = 0; i < b.input_dim; ++i) us.push_back(b.input_offset + i);
    }
    const GlobalSystem permuted = assemble_global(InterconnectionGraph(3, edges), relabeled,
                                                  linalg::select(Sx, xs, xs),
                                                  linalg::select(Sw, xs, xs));
    EXPECT_EQ(permuted.A(), linalg::select(original.A(), xs, xs));
    EXPECT_EQ(permuted.B(), linalg::select(original.B(), xs, us));
}

TEST(Cost, BlocksAndChecks) {
    Matrix Q = Matrix::Identity(3, 3);
    Q(0, 2) = Q(2, 0) = 0.25;
    const CostSpec c(Q, Matrix::Identity(2, 2), 3);
    EXPECT_EQ(c.state_dim(), 2);
    EXPECT_EQ(c.input_dim(), 1);
    EXPECT_EQ(c.Qxu()(0, 0), 0.25);
    EXPECT_EQ(c.Qux(), c.Qxu().transpose());
    EXPECT_THROW(CostSpec(Q, Matrix::Identity(2, 2), 0), InvalidInstance);
    Q(0, 2) = 0.3;
    EXPECT_THROW(CostSpec(Q, Matrix::Identity(2, 2), 1), InvalidInstance);
}

TEST(Constraints, Checks) {
    EXPECT_THROW(PowerConstraintSet({{Matrix::Identity(2, 2), {0.0}}}), InvalidInstance);
    EXPECT_THROW(PowerConstraintSet({{Matrix::Identity(2, 2), {1.0}}, {Matrix::Identity(3, 3), {1.0}}}),
                 DimensionMismatch);
    const PowerConstraintSet set({{Matrix::Identity(2, 2), {1.0, 3.0}}});
    EXPECT_EQ(set.max_budget(), 3.0);
    EXPECT_EQ(set.min_budget(), 1.0);
    EXPECT_THROW(set.check_compatible(2, 3), DimensionMismatch);
    EXPECT_NO_THROW(set.check_compatible(2, 2));
}

TEST(Validate, ZeroInputIsUncontrollable) {
    const ProblemInstance p = testing::single_node(Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                                                   Matrix::Identity(2, 2), Matrix::Ones(1, 1), 1,
                                                   Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    const ValidationReport r = validate_instance(p.system, p.cost, p.constraints);
    const auto* check = r.find("(A,B) controllability");
    ASSERT_NE(check, nullptr);
    EXPECT_FALSE(check->passed);
    EXPECT_EQ(check->value, 0.0);
    // Reported, not enforced.
    EXPECT_TRUE(r.passed());
}

TEST(Validate, SingularQuuFails) {
    const ProblemInstance p = testing::single_node(Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                                   diag({1.0, 0.0}), Matrix::Ones(1, 1), 1,
                                                   Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    const ValidationReport r = validate_instance(p.system, p.cost, p.constraints);
    const auto* check = r.find("Quu positive definiteness");
    ASSERT_NE(check, nullptr);
    EXPECT_FALSE(check->passed);
    EXPECT_EQ(check->value, 0.0);
    EXPECT_FALSE(r.passed());
}

TEST(Validate, CoupledPairPassesEverything) {
    const ProblemInstance p = testing::coupled_pair(1);
    const ValidationReport r = validate_instance(p.system, p.cost, p.constraints);
    for (const auto& c : r.checks) {
        EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    }
    // rank [B AB] = 2
    EXPECT_EQ(r.find("(A,B) controllability")->value, 2.0);
}

TEST(Validate, IndefiniteWeightsAreReported) {
    const ProblemInstance p = testing::scalar(1.0, 1.0, 1, 1.0, 1.0, {{diag({1.0, -1.0}), {1.0}}});
    const ValidationReport r = validate_instance(p.system, p.cost, p.constraints);
    const auto* check = r.find("W[0] positive semidefiniteness");
    ASSERT_NE(check, nullptr);
    EXPECT_FALSE(check->passed);
    EXPECT_DOUBLE_EQ(check->value, -1.0);
}

TEST(Validate, UndetectableUnstableMode) {
    // Unstable mode 2.0 on the second state, invisible to Q.
    const ProblemInstance p = testing::single_node(diag({0.5, 2.0}), Matrix::Identity(2, 2),
                                                   diag({1.0, 0.0, 1.0, 1.0}), Matrix::Identity(2, 2),
                                                   1, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    const ValidationReport r = validate_instance(p.system, p.cost, p.constraints);
    EXPECT_FALSE(r.find("(Q^1/2,A) detectability")->passed);
    EXPECT_TRUE(r.passed());
}

}  // namespace
}  // namespace dlqg
