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

// Monte-Carlo execution of the coordinator/local-unit protocol.
//
// At time k each local unit i has sent x_i(k-1), u_i(k-1) to the
// coordinator with one step of delay. The coordinator forms
//   xhat(k) = A x(k-1) + B u(k-1)    (xhat(0) = 0)
//   uhat(k) = -L0(k) xhat(k)
// and sends uhat(k) and S(k+1) to every unit without delay. Unit i then
// recovers omega_i(k) = x_i(k) - xhat_i(k), applies
//   u_i(k) = uhat_i(k) - L_i(k) omega_i(k)
// and the plant moves to x(k+1) = A x(k) + B u(k) + w(k).

#pragma once

#include "dlqg/model.hpp"
#include "dlqg/synthesis.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dlqg {

struct SimConfig {
    std::int64_t trials = 1;
    std::uint64_t seed = 0;
    bool record_trajectories = false;
    /// Worker threads; results do not depend on this value.
    int threads = 1;
    /// Recompute L_i(k) inside each unit from S(k+1) and check it against
    /// the offline schedule. Needs a schedule that carries S and tau.
    bool gains_online = false;
};

/// Entity ids used in messages and trajectory exports.
inline constexpr int kCoordinator = -1;

struct Message {
    int time = 0;
    int from = 0;  ///< node id or kCoordinator
    int to = 0;
    std::string content;  ///< "x", "u", "uhat" or "S"
    int delay = 0;        ///< 1 toward the coordinator, 0 outward
    std::vector<double> payload;
};

/// Everything a protocol step needs to remember from the previous step.
struct ProtocolState {
    Vector x;       ///< x(k)
    Vector x_prev;  ///< x(k-1), empty at k = 0
    Vector u_prev;  ///< u(k-1), empty at k = 0
};

struct ProtocolStep {
    Vector xhat;
    Vector uhat;
    std::array<Vector, 2> omega;
    std::array<Vector, 2> phi;
    Vector u;
    ProtocolState next;
    std::vector<Message> messages;
};

/// Fixed data shared by all steps of all trials.
class ProtocolContext {
public:
    /// Offline mode: the gain schedule is used as is.
    ProtocolContext(const GlobalSystem& system, const GainSchedule& gains);

    /// Online mode: each unit recomputes its gain from S(k+1) and the
    /// multipliers stored in the schedule. Throws InvalidInstance when the
    /// schedule carries no S.
    ProtocolContext(const GlobalSystem& system, const GainSchedule& gains, const CostSpec& cost,
                    const PowerConstraintSet& constraints);

    const GlobalSystem& system() const noexcept { return system_; }
    const GainSchedule& gains() const noexcept { return gains_; }
    bool online() const noexcept { return !online_gains_[0].empty(); }
    const std::array<SubsystemBlock, 2>& players() const noexcept { return players_; }

    /// Gain used by unit l (1 or 2) at time k.
    const Matrix& local_gain(int l, int k) const;

    int horizon() const noexcept { return gains_.horizon(); }

private:
    const GlobalSystem& system_;
    const GainSchedule& gains_;
    std::array<SubsystemBlock, 2> players_;
    std::array<std::vector<Matrix>, 2> online_gains_;
};

/// Largest |online - offline| gain entry tolerated in online mode.
inline constexpr double kOnlineGainTolerance = 1e-12;

/// One step of the protocol with process noise w = w(k).
ProtocolStep step_protocol(const ProtocolContext& context, const ProtocolState& state, int k,
                           const Vector& w, bool record_messages = false);

struct TrialTrajectory {
    std::int64_t trial = 0;
    std::vector<Vector> x;      ///< k = 0..T
    std::vector<Vector> u;      ///< k = 0..T-1
    std::vector<Vector> xhat;   ///< k = 0..T-1
    std::vector<Vector> omega;  ///< stacked [omega_1; omega_2], k = 0..T-1
    std::vector<Message> messages;
};

struct SimReport {
    std::int64_t trials = 0;
    std::uint64_t seed = 0;

    double cost_mean = 0.0;
    double cost_stderr = 0.0;
    double analytic_cost = 0.0;

    Matrix load_mean;       ///< M x T, mean of z'W_i z
    Matrix load_stderr;     ///< M x T
    Matrix analytic_loads;  ///< M x T, tr(W_i V(k))
    /// Stages with load_mean > p_k^i + 3 load_stderr.
    int violations = 0;

    /// max over entries |empirical E[z z'] - V(k)| in Frobenius norm, k = 0..T.
    std::vector<double> covariance_gap;

    /// Mean and standard error of xhat(k) omega(k)', k = 0..T-1.
    std::vector<Matrix> cross_mean;
    std::vector<Matrix> cross_stderr;

    std::vector<TrialTrajectory> trajectories;

    /// Largest |cross_mean| / cross_stderr over all entries (0 / 0 counts as 0).
    double max_cross_zscore() const;
};

/// Runs config.trials independent closed-loop trials. Each trial draws
/// x(0) ~ N(0, Sigma_x) and w(k) ~ N(0, Sigma_w) from its own generator
/// seeded by (seed, trial index); trials are processed in fixed blocks and
/// reduced in a fixed tree, so the report is bit-identical for a given
/// (seed, trials) regardless of the thread count.
SimReport run_monte_carlo(const GlobalSystem& system, const GainSchedule& gains,
                          const CostSpec& cost, const PowerConstraintSet& constraints,
                          const SimConfig& config);

}  // namespace dlqg
