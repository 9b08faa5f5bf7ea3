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

#include "dlqg/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dlqg {

namespace {

std::array<SubsystemBlock, 2> player_blocks(const GlobalSystem& system) {
    if (system.node_count() > 2) {
        throw Unsupported("decomposed synthesis is implemented for one or two players, got "
                          + std::to_string(system.node_count()) + " nodes");
    }
    const auto& blocks = system.partition();
    std::array<SubsystemBlock, 2> out{};
    out[0] = blocks[0];
    out[1] = blocks.size() > 1
                 ? blocks[1]
                 : SubsystemBlock{system.state_dim(), 0, system.input_dim(), 0};
    return out;
}

// [I; -L] V [I; -L]'
Matrix lift(const Matrix& Vxx, const Matrix& L) {
    const auto n = Vxx.rows();
    const auto m = L.rows();
    Matrix out(n + m, n + m);
    const Matrix LV = L * Vxx;
    out.topLeftCorner(n, n) = Vxx;
    out.topRightCorner(n, m) = -LV.transpose();
    out.bottomLeftCorner(m, n) = -LV;
    out.bottomRightCorner(m, m) = LV * L.transpose();
    return linalg::symmetrized(out);
}

void check_gain(const Matrix& L, Eigen::Index rows, Eigen::Index cols, const char* name, int k) {
    if (L.rows() != rows || L.cols() != cols) {
        throw DimensionMismatch(std::string(name) + "(" + std::to_string(k) + ") must be "
                                + std::to_string(rows) + "x" + std::to_string(cols) + ", got "
                                + std::to_string(L.rows()) + "x" + std::to_string(L.cols()));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// PartitionedData

int PartitionedData::state_dim(int l) const {
    return l == 0 ? static_cast<int>(A[0].rows()) : players[static_cast<std::size_t>(l - 1)].state_dim;
}

int PartitionedData::input_dim(int l) const {
    return l == 0 ? static_cast<int>(B[0].cols()) : players[static_cast<std::size_t>(l - 1)].input_dim;
}

std::vector<int> PartitionedData::z_indices(int l) const {
    const int n = state_dim(0);
    const int m = input_dim(0);
    std::vector<int> idx;
    if (l == 0) {
        idx.resize(static_cast<std::size_t>(n + m));
        std::iota(idx.begin(), idx.end(), 0);
        return idx;
    }
    const auto& p = players[static_cast<std::size_t>(l - 1)];
    for (int i = 0; i < p.state_dim; ++i) {
        idx.push_back(p.state_offset + i);
    }
    for (int i = 0; i < p.input_dim; ++i) {
        idx.push_back(n + p.input_offset + i);
    }
    return idx;
}

Matrix PartitionedData::principal_block(const Matrix& q, int l) const {
    const auto idx = z_indices(l);
    return linalg::select(q, idx, idx);
}

Matrix PartitionedData::z_embedding(int l) const {
    const auto idx = z_indices(l);
    const int dim = state_dim(0) + input_dim(0);
    Matrix E = Matrix::Zero(dim, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        E(idx[c], static_cast<Eigen::Index>(c)) = 1.0;
    }
    return E;
}

PartitionedData partition(const GlobalSystem& system, const CostSpec& cost) {
    PartitionedData part;
    part.players = player_blocks(system);
    const int n = system.state_dim();
    part.A[0] = system.A();
    part.B[0] = system.B();
    part.Q[0] = cost.Q();
    part.F[0] = Matrix::Identity(n, n);
    for (int l = 1; l <= 2; ++l) {
        const auto& p = part.players[static_cast<std::size_t>(l - 1)];
        const auto lu = static_cast<std::size_t>(l);
        part.A[lu] = system.A().middleCols(p.state_offset, p.state_dim);
        part.B[lu] = system.B().middleCols(p.input_offset, p.input_dim);
        part.Q[lu] = part.principal_block(cost.Q(), l);
        part.F[lu] = Matrix::Zero(n, p.state_dim);
        part.F[lu].middleRows(p.state_offset, p.state_dim).setIdentity();
    }
    return part;
}

// ---------------------------------------------------------------------------
// Gains

Matrix local_gain(const PartitionedData& part, int l, const Matrix& S_next, const Matrix& q_eff,
                  int stage) {
    const auto lu = static_cast<std::size_t>(l);
    const int nl = part.state_dim(l);
    const int ml = part.input_dim(l);
    const Matrix block = part.principal_block(q_eff, l);
    return stage_gain(part.A[lu], part.B[lu], S_next, block.topRightCorner(nl, ml),
                      block.bottomRightCorner(ml, ml), stage)
        .L;
}

GainSchedule gains_from_certificate(const PartitionedData& part, const DualCertificate& certificate,
                                    const CostSpec& cost, const PowerConstraintSet& constraints) {
    const int T = certificate.horizon();
    if (T != cost.horizon()) {
        throw DimensionMismatch("certificate horizon " + std::to_string(T)
                                + " does not match the cost horizon "
                                + std::to_string(cost.horizon()));
    }
    const EffectiveCost eff(cost, constraints, certificate.tau);
    const bool have_centralized = static_cast<int>(certificate.L.size()) == T;

    GainSchedule gains;
    gains.S = certificate.S;
    gains.tau = certificate.tau;
    for (int k = 0; k < T; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const Matrix& S_next = certificate.S[ku + 1];
        gains.L0.push_back(have_centralized ? certificate.L[ku]
                                            : local_gain(part, 0, S_next, eff.stage(k), k));
        gains.L1.push_back(local_gain(part, 1, S_next, eff.stage(k), k));
        gains.L2.push_back(local_gain(part, 2, S_next, eff.stage(k), k));
    }
    return gains;
}

// ---------------------------------------------------------------------------
// Closed-loop covariances

Matrix CovarianceTrajectory::state_covariance(int k) const {
    return aggregate.at(static_cast<std::size_t>(k)).topLeftCorner(state_dim, state_dim);
}

double CovarianceTrajectory::cost(const CostSpec& weights) const {
    const int T = horizon();
    const int n = weights.state_dim();
    double total = 0.0;
    for (int k = 0; k < T; ++k) {
        total += (weights.Q().transpose().cwiseProduct(aggregate[static_cast<std::size_t>(k)])).sum();
    }
    const Matrix& VT = aggregate[static_cast<std::size_t>(T)];
    total += (weights.Q_T().transpose().cwiseProduct(VT.topLeftCorner(n, n))).sum();
    return total;
}

CovarianceTrajectory propagate_closed_loop(const GlobalSystem& system, const GainSchedule& gains,
                                           const PowerConstraintSet& constraints) {
    const auto players = player_blocks(system);
    const int n = system.state_dim();
    const int m = system.input_dim();
    const int T = gains.horizon();
    if (static_cast<int>(gains.L1.size()) != T || static_cast<int>(gains.L2.size()) != T) {
        throw DimensionMismatch("gain schedules L0, L1, L2 have different lengths");
    }
    for (int k = 0; k < T; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        check_gain(gains.L0[ku], m, n, "L0", k);
        check_gain(gains.L1[ku], players[0].input_dim, players[0].state_dim, "L1", k);
        check_gain(gains.L2[ku], players[1].input_dim, players[1].state_dim, "L2", k);
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        if (constraints[i].W.rows() != n + m) {
            throw DimensionMismatch("constraint weight W[" + std::to_string(i)
                                    + "] does not match n + m");
        }
    }

    const Matrix& A = system.A();
    const Matrix& B = system.B();
    std::array<Matrix, 2> A_l;
    std::array<Matrix, 2> B_l;
    std::array<Matrix, 2> E_l;  // z-embedding of [x_l; u_l]
    std::array<Matrix, 2> noise_l;
    std::array<Matrix, 2> V_l;
    for (std::size_t l = 0; l < 2; ++l) {
        const auto& p = players[l];
        A_l[l] = A.middleCols(p.state_offset, p.state_dim);
        B_l[l] = B.middleCols(p.input_offset, p.input_dim);
        E_l[l] = Matrix::Zero(n + m, p.state_dim + p.input_dim);
        E_l[l].block(p.state_offset, 0, p.state_dim, p.state_dim).setIdentity();
        E_l[l].block(n + p.input_offset, p.state_dim, p.input_dim, p.input_dim).setIdentity();
        noise_l[l] = system.sigma_w().block(p.state_offset, p.state_offset, p.state_dim, p.state_dim);
        V_l[l] = system.sigma_x().block(p.state_offset, p.state_offset, p.state_dim, p.state_dim);
    }
    Matrix V_hat = Matrix::Zero(n, n);

    CovarianceTrajectory traj;
    traj.state_dim = n;
    traj.loads = Matrix::Zero(static_cast<Eigen::Index>(constraints.size()), T);
    for (int k = 0; k <= T; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const bool stage = k < T;
        const Matrix L0 = stage ? gains.L0[ku] : Matrix::Zero(m, n);
        const std::array<Matrix, 2> L = {
            stage ? gains.L1[ku] : Matrix::Zero(players[0].input_dim, players[0].state_dim),
            stage ? gains.L2[ku] : Matrix::Zero(players[1].input_dim, players[1].state_dim)};

        traj.coordinator.push_back(lift(V_hat, L0));
        Matrix V = traj.coordinator.back();
        for (std::size_t l = 0; l < 2; ++l) {
            traj.local[l].push_back(lift(V_l[l], L[l]));
            V += E_l[l] * traj.local[l].back() * E_l[l].transpose();
        }
        traj.aggregate.push_back(V);

        if (!stage) {
            break;
        }
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            traj.loads(static_cast<Eigen::Index>(i), k) =
                (constraints[i].W.transpose().cwiseProduct(V)).sum();
        }

        const Matrix A_closed = A - B * L0;
        Matrix next = A_closed * V_hat * A_closed.transpose();
        for (std::size_t l = 0; l < 2; ++l) {
            const Matrix A_tilde = A_l[l] - B_l[l] * L[l];
            next += A_tilde * V_l[l] * A_tilde.transpose();
            V_l[l] = noise_l[l];
        }
        V_hat = linalg::symmetrized(next);
    }
    return traj;
}

Matrix reconstruct_state_covariance(const PartitionedData& part,
                                    const CovarianceTrajectory& trajectory, int k) {
    const auto ku = static_cast<std::size_t>(k);
    const int n = part.state_dim(0);
    Matrix out = part.F[0] * trajectory.coordinator.at(ku).topLeftCorner(n, n) * part.F[0].transpose();
    for (int l = 1; l <= 2; ++l) {
        const int nl = part.state_dim(l);
        const auto& Vl = trajectory.local[static_cast<std::size_t>(l - 1)].at(ku);
        out += part.F[static_cast<std::size_t>(l)] * Vl.topLeftCorner(nl, nl)
               * part.F[static_cast<std::size_t>(l)].transpose();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subproblem optimality

double SubproblemCovariances::max_abs_z_trace() const {
    double worst = 0.0;
    for (const auto& per_l : stages) {
        for (const auto& s : per_l) {
            worst = std::max(worst, std::abs(s.z_trace));
        }
    }
    return worst;
}

SubproblemCovariances subproblem_covariances(const PartitionedData& part,
                                             const DualCertificate& certificate,
                                             const CostSpec& cost,
                                             const PowerConstraintSet& constraints,
                                             const GainSchedule& gains,
                                             const CovarianceTrajectory& trajectory) {
    const int T = certificate.horizon();
    if (gains.horizon() != T || trajectory.horizon() != T) {
        throw DimensionMismatch("certificate, gains and trajectory horizons differ");
    }
    const EffectiveCost eff(cost, constraints, certificate.tau);

    SubproblemCovariances out;
    for (int l = 0; l <= 2; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        const int nl = part.state_dim(l);
        const int ml = part.input_dim(l);
        for (int k = 0; k < T; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const Matrix& L = l == 0 ? gains.L0[ku] : gains.local(l)[ku];
            const Matrix& stage_cov =
                l == 0 ? trajectory.coordinator[ku] : trajectory.local[lu - 1][ku];

            SubproblemStage s;
            s.Vxx = stage_cov.topLeftCorner(nl, nl);
            s.Vux = -L * s.Vxx;
            int rank = 0;
            const Matrix pinv = linalg::psd_pseudo_inverse(s.Vxx, &rank);
            s.rank_xx = rank;
            s.Vuu = s.Vux * pinv * s.Vux.transpose();
            s.V.resize(nl + ml, nl + ml);
            s.V << s.Vxx, s.Vux.transpose(), s.Vux, s.Vuu;
            s.rank_v = linalg::psd_rank(s.V);

            const Matrix& S_next = certificate.S[ku + 1];
            const Matrix block = part.principal_block(eff.stage(k), l);
            const Matrix X = part.A[lu].transpose() * S_next * part.B[lu] + block.topRightCorner(nl, ml);
            const Matrix Y =
                part.B[lu].transpose() * S_next * part.B[lu] + block.bottomRightCorner(ml, ml);
            s.Z.resize(nl + ml, nl + ml);
            if (ml > 0) {
                s.Z << X * Y.llt().solve(X.transpose()), X, X.transpose(), Y;
            } else {
                s.Z.setZero();
            }
            s.z_trace = (s.Z.transpose().cwiseProduct(s.V)).sum();
            out.stages[lu].push_back(std::move(s));
        }
    }
    return out;
}

double decomposed_dual_objective(const PartitionedData& part, const DualCertificate& certificate,
                                 const GlobalSystem& system, const CostSpec& cost,
                                 const PowerConstraintSet& constraints) {
    const int T = certificate.horizon();
    if (T != cost.horizon()) {
        throw DimensionMismatch("certificate horizon does not match the cost horizon");
    }
    const EffectiveCost eff(cost, constraints, certificate.tau);
    double value = 0.0;
    for (int l = 1; l <= 2; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        const auto& p = part.players[lu - 1];
        const int nl = p.state_dim;
        const int ml = p.input_dim;
        if (nl == 0) {
            continue;
        }
        const Matrix sx = system.sigma_x().block(p.state_offset, p.state_offset, nl, nl);
        const Matrix sw = system.sigma_w().block(p.state_offset, p.state_offset, nl, nl);
        for (int k = 0; k < T; ++k) {
            const Matrix& S_next = certificate.S[static_cast<std::size_t>(k) + 1];
            const Matrix block = part.principal_block(eff.stage(k), l);
            Matrix Pi = block.topLeftCorner(nl, nl) + part.A[lu].transpose() * S_next * part.A[lu];
            if (ml > 0) {
                const Matrix X =
                    part.A[lu].transpose() * S_next * part.B[lu] + block.topRightCorner(nl, ml);
                const Matrix Y =
                    part.B[lu].transpose() * S_next * part.B[lu] + block.bottomRightCorner(ml, ml);
                Pi -= X * Y.llt().solve(X.transpose());
            }
            value += (Pi.array() * (k == 0 ? sx : sw).array()).sum();
        }
        value += (cost.Q_T().block(p.state_offset, p.state_offset, nl, nl).array() * sw.array()).sum();
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        for (int k = 0; k < T; ++k) {
            value -= certificate.tau(static_cast<int>(i), k)
                     * constraints[i].budgets[static_cast<std::size_t>(k)];
        }
    }
    return value;
}

SynthesisResult synthesize(const ProblemInstance& instance, const DualCertificate& certificate) {
    SynthesisResult out{partition(instance.system, instance.cost), {}, {}};
    out.gains = gains_from_certificate(out.partition, certificate, instance.cost, instance.constraints);
    out.trajectory = propagate_closed_loop(instance.system, out.gains, instance.constraints);
    return out;
}

}  // namespace dlqg
