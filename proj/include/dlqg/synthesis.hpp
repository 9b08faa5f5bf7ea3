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

// Decomposed two-player controller.
//
// With one-step delayed exchange the state splits into three independent
// parts: the coordinator's prediction xhat(k) = A x(k-1) + B u(k-1) and the
// local innovations omega_l(k) = x_l(k) - xhat_l(k) = w_l(k-1). The control
// law is
//   u(k) = -L0(k) xhat(k) + [-L1(k) omega_1(k); -L2(k) omega_2(k)]
// where L0 is the centralized gain and L_l uses the columns A_l, B_l of the
// player's own states and inputs together with the matching principal block
// of Q_eff(k).
//
// A single-node system is handled as a degenerate two-player system whose
// second player has no states and no inputs.

#pragma once

#include "dlqg/dual_solver.hpp"
#include "dlqg/model.hpp"

#include <array>
#include <vector>

namespace dlqg {

/// Index l: 0 = coordinator (full system), 1 and 2 = players.
struct PartitionedData {
    std::array<Matrix, 3> A;  ///< A_0 = A (n x n), A_l = player columns (n x n_l)
    std::array<Matrix, 3> B;  ///< B_0 = B (n x m), B_l = player columns (n x m_l)
    std::array<Matrix, 3> Q;  ///< Q^0 = Q, Q^l = principal block on {x_l, u_l}
    std::array<Matrix, 3> F;  ///< F_0 = I_n, F_l embeds an n_l x n_l block into n x n
    std::array<SubsystemBlock, 2> players;

    int state_dim(int l) const;
    int input_dim(int l) const;

    /// Positions of [x_l; u_l] inside z = [x; u] (l = 0 selects everything).
    std::vector<int> z_indices(int l) const;

    /// Principal block of an (n+m) x (n+m) matrix on z_indices(l).
    Matrix principal_block(const Matrix& q, int l) const;

    /// (n+m) x (n_l+m_l) selector E_l with E_l' z = [x_l; u_l].
    Matrix z_embedding(int l) const;
};

/// Throws Unsupported for more than two nodes.
PartitionedData partition(const GlobalSystem& system, const CostSpec& cost);

struct GainSchedule {
    std::vector<Matrix> L0;  ///< m x n
    std::vector<Matrix> L1;  ///< m_1 x n_1
    std::vector<Matrix> L2;  ///< m_2 x n_2

    /// Dual variables the gains were derived from; empty when the schedule
    /// was loaded from a gains file.
    std::vector<Matrix> S;
    MultiplierSchedule tau;

    int horizon() const noexcept { return static_cast<int>(L0.size()); }
    const std::vector<Matrix>& local(int l) const { return l == 1 ? L1 : L2; }
};

/// L_l(k) = (B_l' S B_l + Q^l_uu)^{-1} (A_l' S B_l + Q^l_xu)' evaluated on
/// the principal block of q_eff.
Matrix local_gain(const PartitionedData& part, int l, const Matrix& S_next, const Matrix& q_eff,
                  int stage);

/// L0 is taken from the certificate (recomputed when the certificate came
/// from a file); L1 and L2 use the tau-augmented principal blocks.
/// Throws SingularY on a non-invertible local Y_l.
GainSchedule gains_from_certificate(const PartitionedData& part, const DualCertificate& certificate,
                                    const CostSpec& cost, const PowerConstraintSet& constraints);

struct CovarianceTrajectory {
    std::vector<Matrix> coordinator;           ///< Vhat(k): covariance of [xhat; uhat], k = 0..T
    std::array<std::vector<Matrix>, 2> local;  ///< V^l(k): covariance of [omega_l; phi_l]
    std::vector<Matrix> aggregate;             ///< V(k): covariance of z = [x; u]
    Matrix loads;                              ///< M x T, tr(W_i V(k))
    int state_dim = 0;

    int horizon() const noexcept { return static_cast<int>(aggregate.size()) - 1; }
    Matrix state_covariance(int k) const;

    /// sum_{k<T} tr(Q V(k)) + tr(Q_T Vxx(T))
    double cost(const CostSpec& cost) const;
};

/// Exact second moments of the decomposed closed loop:
///   Vhat_xx(0) = 0, V^l_xx(0) = Sigma_x[l, l]
///   Vhat_xx(k+1) = (A - B L0) Vhat_xx (A - B L0)' + sum_l (A_l - B_l L_l) V^l_xx (.)'
///   V^l_xx(k+1) = Sigma_w[l, l]
/// Inputs are uhat = -L0 xhat and phi_l = -L_l omega_l; at k = T all input
/// blocks are zero.
CovarianceTrajectory propagate_closed_loop(const GlobalSystem& system, const GainSchedule& gains,
                                           const PowerConstraintSet& constraints = {});

/// F_0 Vhat_xx F_0' + F_1 V^1_xx F_1' + F_2 V^2_xx F_2'
Matrix reconstruct_state_covariance(const PartitionedData& part,
                                    const CovarianceTrajectory& trajectory, int k);

struct SubproblemStage {
    Matrix Vxx;
    Matrix Vux;      ///< -L_l Vxx
    Matrix Vuu;      ///< Vux Vxx^+ Vxu
    Matrix V;        ///< [Vxx, Vxu; Vux, Vuu]
    Matrix Z;        ///< [X Y^{-1} X', X; X', Y]
    double z_trace;  ///< tr(Z V), zero at the optimum
    int rank_xx;
    int rank_v;
};

struct SubproblemCovariances {
    std::array<std::vector<SubproblemStage>, 3> stages;  ///< l = 0, 1, 2; k = 0..T-1

    double max_abs_z_trace() const;
};

/// Optimal stage covariances of the three subproblems given the dual
/// variables, with Vxx taken from the closed-loop trajectory. Singular Vxx
/// is handled with a pseudo-inverse and its rank recorded.
SubproblemCovariances subproblem_covariances(const PartitionedData& part,
                                             const DualCertificate& certificate,
                                             const CostSpec& cost,
                                             const PowerConstraintSet& constraints,
                                             const GainSchedule& gains,
                                             const CovarianceTrajectory& trajectory);

/// Dual function of the decomposed problem evaluated from (S, tau) alone:
///   sum_k sum_l tr(Pi_l(k) V^l_xx(k)) + sum_l tr(Q_T[l, l] Sigma_w[l, l]) - sum tau p
/// with Pi_l(k) = Q^l_xx + A_l' S(k+1) A_l - X_l Y_l^{-1} X_l', V^l_xx(0) =
/// Sigma_x[l, l] and V^l_xx(k) = Sigma_w[l, l] for k >= 1. The coordinator
/// term vanishes because xhat(0) = 0. For a single node, or when the
/// centralized gain needs no cross-player information, this equals
/// dual_objective; otherwise it is larger by the value of the delayed
/// information.
double decomposed_dual_objective(const PartitionedData& part, const DualCertificate& certificate,
                                 const GlobalSystem& system, const CostSpec& cost,
                                 const PowerConstraintSet& constraints);

/// Convenience bundle for the whole synthesis step.
struct SynthesisResult {
    PartitionedData partition;
    GainSchedule gains;
    CovarianceTrajectory trajectory;
};

SynthesisResult synthesize(const ProblemInstance& instance, const DualCertificate& certificate);

}  // namespace dlqg
