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

#include "dlqg/oracle.hpp"

#include "dlqg/errors.hpp"
#include "logging.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace dlqg::oracle {

// ---------------------------------------------------------------------------
// Classical LQR

LqrSolution classical_lqr(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& Q_T,
                          int horizon) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n + m || Q.cols() != n + m
        || Q_T.rows() != n || Q_T.cols() != n) {
        throw DimensionMismatch("classical_lqr: inconsistent A, B, Q, Q_T sizes");
    }
    if (horizon < 0) {
        throw DimensionMismatch("classical_lqr: negative horizon");
    }
    const Matrix Qxx = Q.topLeftCorner(n, n);
    const Matrix Qxu = Q.topRightCorner(n, m);
    const Matrix Qux = Q.bottomLeftCorner(m, n);
    const Matrix Quu = Q.bottomRightCorner(m, m);

    LqrSolution out;
    out.gains.resize(static_cast<std::size_t>(horizon));
    out.P.resize(static_cast<std::size_t>(horizon + 1));
    out.P.back() = Q_T;
    for (int k = horizon - 1; k >= 0; --k) {
        const Matrix& P = out.P[static_cast<std::size_t>(k + 1)];
        const Matrix G = Quu + B.transpose() * P * B;
        if (m > 0) {
            const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (G + G.transpose()),
                                                            Eigen::EigenvaluesOnly);
            const double lambda = eig.eigenvalues().minCoeff();
            if (!(lambda >= 1e-12)) {
                throw SingularY(k, lambda);
            }
        }
        const Matrix H = B.transpose() * P * A + Qux;
        Matrix K = m > 0 ? Matrix(G.partialPivLu().solve(H)) : Matrix::Zero(0, n);
        Matrix next = Qxx + A.transpose() * P * A - (A.transpose() * P * B + Qxu) * K;
        out.P[static_cast<std::size_t>(k)] = 0.5 * (next + next.transpose());
        out.gains[static_cast<std::size_t>(k)] = std::move(K);
    }
    return out;
}

LqrSolution classical_lqr(const GlobalSystem& system, const CostSpec& cost) {
    return classical_lqr(system.A(), system.B(), cost.Q(), cost.Q_T(), cost.horizon());
}

// ---------------------------------------------------------------------------
// Exact policy evaluation on the augmented state [x; xhat]

double PolicyEvaluation::max_excess(const PowerConstraintSet& constraints) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& p = constraints[i].budgets;
        for (std::size_t k = 0; k < p.size(); ++k) {
            worst = std::max(worst, loads(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(k))
                                        - p[k]);
        }
    }
    return worst;
}

namespace {

std::array<SubsystemBlock, 2> players_of(const GlobalSystem& system) {
    if (system.node_count() > 2) {
        throw Unsupported("oracle: decomposed policies need one or two nodes, got "
                          + std::to_string(system.node_count()));
    }
    std::array<SubsystemBlock, 2> out{};
    out[0] = system.partition()[0];
    out[1] = system.node_count() == 2
                 ? system.partition()[1]
                 : SubsystemBlock{system.state_dim(), 0, system.input_dim(), 0};
    return out;
}

void require_shape(const Matrix& L, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (L.rows() != rows || L.cols() != cols) {
        throw DimensionMismatch(std::string("oracle: ") + name + " must be "
                                + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

}  // namespace

PolicyEvaluation exact_policy_cost(const GlobalSystem& system, const CostSpec& cost,
                                   const PowerConstraintSet& constraints, const GainSchedule& gains) {
    const auto players = players_of(system);
    const Eigen::Index n = system.state_dim();
    const Eigen::Index m = system.input_dim();
    const int T = cost.horizon();
    if (cost.state_dim() != n || cost.input_dim() != m) {
        throw DimensionMismatch("oracle: cost does not match the system");
    }
    if (static_cast<int>(gains.L0.size()) != T || static_cast<int>(gains.L1.size()) != T
        || static_cast<int>(gains.L2.size()) != T) {
        throw DimensionMismatch("oracle: gain schedule length differs from the horizon");
    }
    constraints.check_compatible(static_cast<int>(n + m), T);

    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const Matrix I = Matrix::Identity(n, n);

    // xi = [x; xhat]
    Matrix Xi = Matrix::Zero(2 * n, 2 * n);
    Xi.topLeftCorner(n, n) = system.sigma_x();
    Matrix noise = Matrix::Zero(2 * n, 2 * n);
    noise.topLeftCorner(n, n) = system.sigma_w();

    PolicyEvaluation out;
    out.loads = Matrix::Zero(static_cast<Eigen::Index>(constraints.size()), T);
    for (int k = 0; k < T; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        require_shape(gains.L0[ku], m, n, "L0");
        require_shape(gains.L1[ku], players[0].input_dim, players[0].state_dim, "L1");
        require_shape(gains.L2[ku], players[1].input_dim, players[1].state_dim, "L2");

        Matrix K = Matrix::Zero(m, n);
        K.block(players[0].input_offset, players[0].state_offset, players[0].input_dim,
                players[0].state_dim) = gains.L1[ku];
        K.block(players[1].input_offset, players[1].state_offset, players[1].input_dim,
                players[1].state_dim) = gains.L2[ku];

        // u = -K x + (K - L0) xhat
        Matrix C = Matrix::Zero(n + m, 2 * n);
        C.topLeftCorner(n, n) = I;
        C.bottomLeftCorner(m, n) = -K;
        C.bottomRightCorner(m, n) = K - gains.L0[ku];

        const Matrix V = C * Xi * C.transpose();
        out.cost += (cost.Q().array() * V.array()).sum();
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            out.loads(static_cast<Eigen::Index>(i), k) = (constraints[i].W.array() * V.array()).sum();
        }
        out.covariances.push_back(V);

        // x(k+1) = A x + B u + w, xhat(k+1) = A x + B u
        Matrix row(n, 2 * n);
        row << A - B * K, B * (K - gains.L0[ku]);
        Matrix Phi(2 * n, 2 * n);
        Phi << row, row;
        Xi = Phi * Xi * Phi.transpose() + noise;
    }
    Matrix VT = Matrix::Zero(n + m, n + m);
    VT.topLeftCorner(n, n) = Xi.topLeftCorner(n, n);
    out.cost += (cost.Q_T().array() * VT.topLeftCorner(n, n).array()).sum();
    out.covariances.push_back(std::move(VT));
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force search

int gain_parameter_count(const GlobalSystem& system, int horizon) {
    const auto players = players_of(system);
    const int n = system.state_dim();
    const int m = system.input_dim();
    int local = 0;
    for (const auto& p : players) {
        local += p.state_dim * p.input_dim;
    }
    return std::max(0, horizon - 1) * m * n + horizon * local;
}

namespace {

struct Candidate {
    std::vector<double> theta;
    double cost = std::numeric_limits<double>::infinity();
    double excess = std::numeric_limits<double>::infinity();
    bool feasible = false;
    Matrix loads;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.feasible != b.feasible) {
        return a.feasible;
    }
    if (!a.feasible && a.excess != b.excess) {
        return a.excess < b.excess;
    }
    return a.cost < b.cost;
}

class Search {
public:
    Search(const GlobalSystem& system, const CostSpec& cost, const PowerConstraintSet& constraints,
           const GridSpec& grid)
        : system_(system),
          cost_(cost),
          constraints_(constraints),
          grid_(grid),
          players_(players_of(system)) {}

    GainSchedule unpack(const std::vector<double>& theta) const {
        const int T = cost_.horizon();
        const Eigen::Index n = system_.state_dim();
        const Eigen::Index m = system_.input_dim();
        std::size_t at = 0;
        auto take = [&](Eigen::Index rows, Eigen::Index cols) {
            Matrix L(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r) {
                for (Eigen::Index c = 0; c < cols; ++c) {
                    L(r, c) = theta[at++];
                }
            }
            return L;
        };
        GainSchedule gains;
        for (int k = 0; k < T; ++k) {
            gains.L0.push_back(k == 0 ? Matrix(Matrix::Zero(m, n)) : take(m, n));
            gains.L1.push_back(take(players_[0].input_dim, players_[0].state_dim));
            gains.L2.push_back(take(players_[1].input_dim, players_[1].state_dim));
        }
        return gains;
    }

    Candidate evaluate(std::vector<double> theta) {
        ++evaluations_;
        const PolicyEvaluation eval = exact_policy_cost(system_, cost_, constraints_, unpack(theta));
        Candidate c;
        c.theta = std::move(theta);
        c.cost = eval.cost;
        c.loads = eval.loads;
        c.excess = constraints_.empty() ? 0.0 : eval.max_excess(constraints_);
        c.feasible = std::isfinite(c.cost) && c.excess <= grid_.feasibility_tolerance;
        return c;
    }

    /// Pulls an infeasible point back onto the feasible set with
    /// Gauss-Newton steps on the loads that exceed, or sit within the
    /// tolerance of, their budgets. Jacobians are forward differences.
    /// Returns nullopt if the point cannot be made feasible.
    std::optional<Candidate> restore(Candidate c) {
        constexpr int kMaxSteps = 8;
        const double tol = grid_.feasibility_tolerance;
        for (int step = 0; step < kMaxSteps && !c.feasible; ++step) {
            std::vector<std::pair<std::size_t, int>> active;
            std::vector<double> residual;
            for (std::size_t i = 0; i < constraints_.size(); ++i) {
                for (int k = 0; k < cost_.horizon(); ++k) {
                    const double gap = c.loads(static_cast<Eigen::Index>(i), k)
                                       - constraints_[i].budgets[static_cast<std::size_t>(k)];
                    if (gap > -tol) {
                        active.emplace_back(i, k);
                        // Aim half a tolerance inside the boundary.
                        residual.push_back(gap + 0.5 * tol);
                    }
                }
            }
            const auto rows = static_cast<Eigen::Index>(active.size());
            const auto cols = static_cast<Eigen::Index>(c.theta.size());
            Matrix J(rows, cols);
            for (Eigen::Index j = 0; j < cols; ++j) {
                std::vector<double> probe = c.theta;
                const double h = 1e-7 * std::max(1.0, std::abs(probe[static_cast<std::size_t>(j)]));
                probe[static_cast<std::size_t>(j)] += h;
                const Matrix loads = evaluate(std::move(probe)).loads;
                for (Eigen::Index r = 0; r < rows; ++r) {
                    const auto [i, k] = active[static_cast<std::size_t>(r)];
                    J(r, j) = (loads(static_cast<Eigen::Index>(i), k) - c.loads(static_cast<Eigen::Index>(i), k)) / h;
                }
            }
            const Vector e = Eigen::Map<const Vector>(residual.data(), rows);
            const Vector delta = J.completeOrthogonalDecomposition().solve(e);
            if (!delta.allFinite()) {
                return std::nullopt;
            }
            std::vector<double> theta = c.theta;
            for (std::size_t j = 0; j < theta.size(); ++j) {
                theta[j] = std::clamp(theta[j] - delta(static_cast<Eigen::Index>(j)), grid_.lower, grid_.upper);
            }
            c = evaluate(std::move(theta));
        }
        if (!c.feasible) {
            return std::nullopt;
        }
        return c;
    }

    long evaluations() const noexcept { return evaluations_; }

private:
    const GlobalSystem& system_;
    const CostSpec& cost_;
    const PowerConstraintSet& constraints_;
    GridSpec grid_;
    std::array<SubsystemBlock, 2> players_;
    long evaluations_ = 0;
};

}  // namespace

SearchResult brute_force_search(const GlobalSystem& system, const CostSpec& cost,
                                const PowerConstraintSet& constraints, const GridSpec& grid) {
    const int P = gain_parameter_count(system, cost.horizon());
    if (P > grid.max_parameters) {
        throw TooManyParameters(P, grid.max_parameters);
    }
    if (!(grid.upper > grid.lower) || !(grid.coarse_step > 0.0) || !(grid.fine_step > 0.0)) {
        throw InvalidInstance("grid needs lower < upper and positive steps");
    }
    constraints.check_compatible(system.state_dim() + system.input_dim(), cost.horizon());

    const auto points = static_cast<int>(std::floor((grid.upper - grid.lower) / grid.coarse_step + 1e-9));
    std::vector<double> values;
    for (int j = 0; j <= points; ++j) {
        values.push_back(grid.lower + j * grid.coarse_step);
    }
    auto clamp = [&](double v) { return std::clamp(v, grid.lower, grid.upper); };

    Search search(system, cost, constraints, grid);
    const auto Pu = static_cast<std::size_t>(P);
    Candidate best = search.evaluate(std::vector<double>(Pu, clamp(0.0)));

    // Coarse phase.
    if (P == 1 || P == 2) {
        std::vector<double> theta(Pu);
        for (double a : values) {
            theta[0] = a;
            if (P == 1) {
                Candidate c = search.evaluate(theta);
                if (better(c, best)) {
                    best = std::move(c);
                }
                continue;
            }
            for (double b : values) {
                theta[1] = b;
                Candidate c = search.evaluate(theta);
                if (better(c, best)) {
                    best = std::move(c);
                }
            }
        }
    } else if (P > 2) {
        for (int sweep = 0; sweep < 100; ++sweep) {
            bool improved = false;
            for (std::size_t i = 0; i < Pu; ++i) {
                for (double v : values) {
                    std::vector<double> theta = best.theta;
                    theta[i] = v;
                    Candidate c = search.evaluate(std::move(theta));
                    if (better(c, best)) {
                        best = std::move(c);
                        improved = true;
                    }
                }
            }
            if (!improved) {
                break;
            }
        }
    }

    // Refinement: axis moves and pairwise diagonal moves.
    std::vector<std::vector<std::pair<std::size_t, double>>> moves;
    for (std::size_t i = 0; i < Pu; ++i) {
        moves.push_back({{i, 1.0}});
        moves.push_back({{i, -1.0}});
    }
    for (std::size_t i = 0; i < Pu; ++i) {
        for (std::size_t j = i + 1; j < Pu; ++j) {
            for (double si : {1.0, -1.0}) {
                for (double sj : {1.0, -1.0}) {
                    moves.push_back({{i, si}, {j, sj}});
                }
            }
        }
    }
    double step = grid.coarse_step / 2.0;
    while (P > 0) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (const auto& move : moves) {
                std::vector<double> theta = best.theta;
                for (auto [i, s] : move) {
                    theta[i] = clamp(theta[i] + s * step);
                }
                if (theta == best.theta) {
                    continue;
                }
                Candidate c = search.evaluate(std::move(theta));
                if (!c.feasible && best.feasible && c.cost < best.cost) {
                    if (auto restored = search.restore(std::move(c))) {
                        c = std::move(*restored);
                    } else {
                        continue;
                    }
                }
                if (better(c, best)) {
                    best = std::move(c);
                    improved = true;
                }
            }
        }
        if (step <= grid.fine_step) {
            break;
        }
        step = std::max(step / 2.0, grid.fine_step);
    }

    detail::logger().debug("brute force: {} parameters, {} evaluations, cost {:.10g}", P,
                           search.evaluations(), best.cost);

    SearchResult out;
    out.gains = search.unpack(best.theta);
    out.cost = best.cost;
    out.loads = best.loads;
    out.feasible = best.feasible;
    out.parameter_count = P;
    out.evaluations = search.evaluations();
    return out;
}

}  // namespace dlqg::oracle
