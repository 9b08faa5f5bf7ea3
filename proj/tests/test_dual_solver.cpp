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

#include "dlqg/dual_solver.hpp"
#include "dlqg/errors.hpp"
#include "dlqg/oracle.hpp"
#include "dlqg/synthesis.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace dlqg {
namespace {

using testing::diag;
using testing::Rng;

MultiplierSchedule tau_of(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index k = 0;
        for (double v : row) t(i, k++) = v;
        ++i;
    }
    return MultiplierSchedule(t);
}

TEST(Multipliers, RejectNegativeAndNonFinite) {
    EXPECT_THROW(tau_of({{-1.0}}), InvalidInstance);
    EXPECT_THROW(tau_of({{std::nan("")}}), InvalidInstance);
    EXPECT_NO_THROW(tau_of({{0.0, 2.0}}));
}

TEST(BackwardRecursion, ScalarUnconstrained) {
    const ProblemInstance p = testing::scalar(1.0, 1.0, 1, 1.0, 1.0);
    const DualCertificate c = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(0, 1));
    EXPECT_NEAR(c.Y[0](0, 0), 2.0, 1e-15);
    EXPECT_NEAR(c.L[0](0, 0), 0.5, 1e-15);
    EXPECT_NEAR(c.S[0](0, 0), 1.5, 1e-15);
    EXPECT_EQ(c.S[1], p.cost.Q_T());
    EXPECT_NEAR(c.dual_value, 2.5, 1e-14);
}

TEST(BackwardRecursion, ZeroDynamics) {
    const ProblemInstance p = testing::scalar(0.0, 1.0, 4, 1.0, 1.0);
    const DualCertificate c = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(0, 4));
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(c.L[static_cast<std::size_t>(k)](0, 0), 0.0);
        EXPECT_EQ(c.S[static_cast<std::size_t>(k)](0, 0), 1.0);
    }
}

TEST(BackwardRecursion, ScalarConstrained) {
    const ProblemInstance p = testing::scalar(1.0, 1.0, 1, 1.0, 1.0, {{diag({0.0, 1.0}), {0.1}}});
    const DualCertificate c = backward_recursion(p.system, p.cost, p.constraints, tau_of({{1.0}}));
    EXPECT_NEAR(c.Y[0](0, 0), 3.0, 1e-15);
    EXPECT_NEAR(c.L[0](0, 0), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(c.S[0](0, 0), 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(dual_objective(c, p.system, p.constraints), 5.0 / 3.0 + 1.0 - 0.1, 1e-12);
}

TEST(BackwardRecursion, SingularYAndShapeErrors) {
    const ProblemInstance p = testing::single_node(Matrix::Ones(1, 1), Matrix::Zero(1, 1),
                                                   diag({1.0, 0.0}), Matrix::Ones(1, 1), 2,
                                                   Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    EXPECT_THROW(backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(0, 2)), SingularY);
    const ProblemInstance q = testing::scalar(1.0, 1.0, 2, 1.0, 1.0, {{diag({0.0, 1.0}), {1.0, 1.0}}});
    EXPECT_THROW(backward_recursion(q.system, q.cost, q.constraints, tau_of({{1.0}})), DimensionMismatch);
}

TEST(DualObjective, NoRandomnessNoPrice) {
    const ProblemInstance p = testing::scalar(1.0, 1.0, 3, 0.0, 0.0);
    const DualCertificate c = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(0, 3));
    EXPECT_EQ(dual_objective(c, p.system, p.constraints), 0.0);
}

TEST(LmiResidual, Examples) {
    const ProblemInstance p = testing::scalar(1.0, 1.0, 1, 1.0, 1.0);
    const DualCertificate c = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(0, 1));
    const Matrix M = lmi_stage_matrix(c.S[0], c.S[1], p.cost.Q(), p.system);
    EXPECT_NEAR(M(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(M(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(M(1, 1), 2.0, 1e-15);
    EXPECT_NEAR(c.lmi_residuals[0], 0.0, 1e-14);

    const Matrix shifted = c.S[0] + 0.1 * Matrix::Identity(1, 1);
    EXPECT_LT(lmi_stage_residual(shifted, c.S[1], p.cost.Q(), p.system), -1e-3);

    const ProblemInstance z = testing::scalar(0.0, 1.0, 2, 1.0, 1.0);
    const DualCertificate cz = backward_recursion(z.system, z.cost, z.constraints, MultiplierSchedule(0, 2));
    for (double r : cz.lmi_residuals) EXPECT_NEAR(r, 0.0, 1e-15);
}

Matrix diag_block(int n, int m) {
    Matrix out = Matrix::Zero(n + m, n + m);
    out.bottomRightCorner(m, m).setIdentity();
    return 0.5 * out;
}

ProblemInstance random_instance(Rng& rng, int n, int m, int T, int M) {
    const Matrix A = testing::random_matrix(rng, n, n, 0.6);
    const Matrix B = testing::random_matrix(rng, n, m);
    const Matrix Q = testing::random_psd(rng, n + m, 0.0) + diag_block(n, m);
    std::vector<PowerConstraint> cons;
    for (int i = 0; i < M; ++i) {
        cons.push_back({testing::random_psd(rng, n + m), std::vector<double>(static_cast<std::size_t>(T), 1.0)});
    }
    return testing::single_node(A, B, Q, testing::random_psd(rng, n), T, testing::random_psd(rng, n, 0.1),
                                testing::random_psd(rng, n, 0.1), std::move(cons));
}

TEST(BackwardRecursion, InvariantsOnRandomInstances) {
    Rng rng(99);
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 3;
        const int m = 1 + (trial / 3) % 2;
        const int T = 1 + trial % 6;
        const ProblemInstance p = random_instance(rng, n, m, T, 2);
        Matrix t(2, T);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = unit(rng);
        const DualCertificate c = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(t));
        EXPECT_EQ(c.S.back(), p.cost.Q_T());
        for (const auto& S : c.S) {
            EXPECT_EQ(S, S.transpose());
            EXPECT_GE(linalg::min_eigenvalue(S), -1e-9);
        }
        for (const auto& Y : c.Y) EXPECT_GT(linalg::min_eigenvalue(Y), 0.0);
        for (double r : c.lmi_residuals) {
            EXPECT_GE(r, -1e-8);
            EXPECT_LE(std::abs(r), 1e-8);
        }
    }
}

TEST(BackwardRecursion, MonotoneInMultipliers) {
    Rng rng(123);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    std::uniform_real_distribution<double> weight(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int T = 1 + trial % 5;
        const ProblemInstance p = testing::scalar(coef(rng), coef(rng), T, 1.0, 1.0,
                                                  {{diag({weight(rng), weight(rng)}), std::vector<double>(static_cast<std::size_t>(T), 1.0)}});
        Matrix t = Matrix::Zero(1, T);
        for (int k = 0; k < T; ++k) t(0, k) = weight(rng);
        double prev = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(t)).S[0].trace();
        for (int step = 0; step < 5; ++step) {
            std::uniform_int_distribution<int> pick(0, T - 1);
            t(0, pick(rng)) += weight(rng);
            const double now = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(t)).S[0].trace();
            EXPECT_GE(now, prev - 1e-12);
            prev = now;
        }
    }
}

// dual_objective is a lower bound on the cost of every feasible policy in the
// decomposed class, for any multipliers.
TEST(DualObjective, WeakDuality) {
    Rng rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int feasible_checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int T = 1 + trial % 3;
        Matrix A = testing::random_matrix(rng, 2, 2, 0.7);
        const ProblemInstance p = testing::two_player(
            1, A, Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Identity(4, 4), Matrix::Identity(2, 2), T,
            Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2),
            {{testing::input_power(2, 2), std::vector<double>(static_cast<std::size_t>(T), 3.0)}});
        Matrix t(1, T);
        for (int k = 0; k < T; ++k) t(0, k) = 2.0 * unit(rng);
        const DualCertificate c = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(t));
        for (int policy = 0; policy < 10; ++policy) {
            GainSchedule g;
            for (int k = 0; k < T; ++k) {
                g.L0.push_back(testing::random_matrix(rng, 2, 2, 0.5));
                g.L1.push_back(testing::random_matrix(rng, 1, 1, 0.5));
                g.L2.push_back(testing::random_matrix(rng, 1, 1, 0.5));
            }
            const auto eval = oracle::exact_policy_cost(p.system, p.cost, p.constraints, g);
            if (eval.max_excess(p.constraints) > 0.0) continue;
            ++feasible_checked;
            EXPECT_LE(c.dual_value, eval.cost + 1e-9);
        }
    }
    EXPECT_GT(feasible_checked, 100);
}

TEST(SolveDual, UnconstrainedIsOneRecursion) {
    const ProblemInstance p = testing::coupled_pair(3);
    const DualCertificate c = solve_dual(p);
    EXPECT_TRUE(c.converged);
    EXPECT_EQ(c.iterations, 1);
    EXPECT_EQ(c.tau.constraint_count(), 0);
    const DualCertificate plain = backward_recursion(p.system, p.cost, p.constraints, MultiplierSchedule(0, 3));
    for (std::size_t k = 0; k < c.S.size(); ++k) EXPECT_EQ(c.S[k], plain.S[k]);
    EXPECT_EQ(c.dual_value, plain.dual_value);
}

TEST(SolveDual, SlackConstraintsPriceToZero) {
    const ProblemInstance p = testing::coupled_pair(3, {{testing::input_power(2, 2), {1e6, 1e6, 1e6}}});
    const DualCertificate c = solve_dual(p);
    EXPECT_TRUE(c.converged);
    EXPECT_EQ(c.tau.values().maxCoeff(), 0.0);
    const auto lqr = oracle::classical_lqr(p.system, p.cost);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_LE((c.L[k] - lqr.gains[k]).cwiseAbs().maxCoeff(), 1e-8);
    }
}

// One-stage scalar problem: load(tau) = L^2 Sigma_x with L = 1 / (2 + tau).
double bisect_tau(double budget) {
    double lo = 0.0;
    double hi = 100.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double load = 1.0 / ((2.0 + mid) * (2.0 + mid));
        (load > budget ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

TEST(SolveDual, MatchesBisectionOnStationaryScalar) {
    const ProblemInstance p = testing::scalar(1.0, 1.0, 1, 1.0, 1.0, {{diag({0.0, 1.0}), {0.1}}});
    const DualCertificate c = solve_dual(p);
    EXPECT_TRUE(c.converged);
    const double expected = bisect_tau(0.1);
    EXPECT_NEAR(expected, std::sqrt(10.0) - 2.0, 1e-12);
    EXPECT_NEAR(c.tau(0, 0), expected, 1e-4);
    EXPECT_LE(c.max_violation, 1e-6 * 0.1);
}

TEST(SolveDual, BindingConstraintOnScalarPair) {
    Matrix A = Matrix::Identity(2, 2);
    const Matrix one = Matrix::Ones(1, 1);
    const ProblemInstance p = testing::two_player(1, A, one, one, Matrix::Identity(4, 4), Matrix::Identity(2, 2), 3,
                                                  Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                                  {{testing::input_power(2, 2), {0.3, 0.3, 0.3}}});
    const DualCertificate c = solve_dual(p);
    ASSERT_TRUE(c.converged);
    const SynthesisResult s = synthesize(p, c);
    for (int k = 0; k < 3; ++k) {
        if (c.tau(0, k) > 0.0) {
            EXPECT_NEAR(s.trajectory.loads(0, k), 0.3, 1e-4);
        }
    }
    EXPECT_GT(c.tau(0, 0), 0.0);
    EXPECT_LE(c.complementary_slackness, 1e-6 * 0.3 + 1e-15);
}

// Rescaling the constraint by c rescales the multipliers by 1 / c and leaves
// the ascent path unchanged.
TEST(SolveDual, DefaultStepIsScaleInvariant) {
    const Matrix one = Matrix::Ones(1, 1);
    auto make = [&](double c) {
        return testing::two_player(1, Matrix::Identity(2, 2), one, one, Matrix::Identity(4, 4),
                                   Matrix::Identity(2, 2), 3, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                   {{c * testing::input_power(2, 2), {0.3 * c, 0.3 * c, 0.3 * c}}});
    };
    // tau * g is a cost, so the slackness tolerance stays fixed while the
    // feasibility tolerance follows the budget.
    auto options = [](double c) {
        DualOptions o;
        o.tol_feas = 3e-7 * c;
        o.tol_cs = 3e-7;
        return o;
    };
    const DualCertificate unit = solve_dual(make(1.0), options(1.0));
    ASSERT_TRUE(unit.converged);
    for (double c : {1e-3, 1e3}) {
        const DualCertificate scaled = solve_dual(make(c), options(c));
        ASSERT_TRUE(scaled.converged);
        EXPECT_NEAR(scaled.iterations, unit.iterations, 2);
        EXPECT_LE((c * scaled.tau.values() - unit.tau.values()).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(SolveDual, InfeasibleBudgetIsDetected) {
    // Stage-0 state variance is fixed at Sigma_x = 1, so E[x(0)^2] <= 0.5 is impossible.
    const ProblemInstance p = testing::scalar(1.0, 1.0, 2, 1.0, 1.0, {{diag({1.0, 0.0}), {0.5, 10.0}}});
    DualOptions options;
    options.patience = 200;
    EXPECT_THROW(solve_dual(p, options), InfeasibleInstance);
}

TEST(SolveDual, NotConvergedWithoutFeasibleIterate) {
    const ProblemInstance p = testing::scalar(1.0, 1.0, 1, 1.0, 1.0, {{diag({0.0, 1.0}), {0.1}}});
    DualOptions options;
    options.max_iters = 1;
    try {
        solve_dual(p, options);
        FAIL() << "expected NotConverged";
    } catch (const NotConverged& e) {
        EXPECT_GT(e.violation(), 0.0);
        EXPECT_EQ(e.last_iterate().horizon(), 1);
    }
}

}  // namespace
}  // namespace dlqg
