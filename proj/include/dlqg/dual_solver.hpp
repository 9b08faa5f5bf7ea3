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

// Lagrangian dual of the power-constrained covariance selection problem.
//
// For fixed multipliers tau_i(k) >= 0 the stage weight becomes
//   Q_eff(k) = Q + sum_i tau_i(k) W_i
// and the dual variables S(k) follow the Riccati-type backward recursion
//   S(T) = Q_T
//   Y(k) = B' S(k+1) B + Quu(k)
//   L(k) = Y(k)^{-1} (B' S(k+1) A + Qux(k))
//   S(k) = A' S(k+1) A + Qxx(k) - L(k)' Y(k) L(k)
// which saturates the stage LMI
//   Q_eff(k) + [A'S(k+1)A - S(k), A'S(k+1)B; B'S(k+1)A, B'S(k+1)B] >= 0.
// The multipliers themselves are found by projected supergradient ascent.

#pragma once

#include "dlqg/errors.hpp"
#include "dlqg/model.hpp"

#include <limits>
#include <vector>

namespace dlqg {

/// tau(i, k) >= 0 for constraint i and stage k.
class MultiplierSchedule {
public:
    MultiplierSchedule() = default;
    MultiplierSchedule(int constraint_count, int horizon);

    /// Throws InvalidInstance on negative or non-finite entries.
    explicit MultiplierSchedule(Matrix values);

    int constraint_count() const noexcept { return static_cast<int>(values_.rows()); }
    int horizon() const noexcept { return static_cast<int>(values_.cols()); }
    double operator()(int i, int k) const { return values_(i, k); }
    const Matrix& values() const noexcept { return values_; }

private:
    Matrix values_;
};

/// Q_eff(k) = Q + sum_i tau_i(k) W_i for k = 0..T-1.
class EffectiveCost {
public:
    EffectiveCost(const CostSpec& cost, const PowerConstraintSet& constraints,
                  const MultiplierSchedule& tau);

    int horizon() const noexcept { return static_cast<int>(stages_.size()); }
    int state_dim() const noexcept { return n_; }
    int input_dim() const noexcept { return m_; }

    const Matrix& stage(int k) const { return stages_.at(static_cast<std::size_t>(k)); }
    Matrix Qxx(int k) const { return stage(k).topLeftCorner(n_, n_); }
    Matrix Qxu(int k) const { return stage(k).topRightCorner(n_, m_); }
    Matrix Quu(int k) const { return stage(k).bottomRightCorner(m_, m_); }

private:
    int n_;
    int m_;
    std::vector<Matrix> stages_;
};

struct StageGain {
    Matrix Y;  ///< B' S B + Quu
    Matrix L;  ///< Y^{-1} (A' S B + Qxu)'
};

/// Minimum eigenvalue below which Y(k) is declared singular.
inline constexpr double kSingularYThreshold = 1e-12;

/// One stage of the gain formula for an arbitrary column selection (A_l, B_l)
/// and matching cost blocks. Throws SingularY(stage, ...) when Y is not
/// safely positive definite.
StageGain stage_gain(const Matrix& A, const Matrix& B, const Matrix& S_next, const Matrix& Qxu,
                     const Matrix& Quu, int stage);

struct DualCertificate {
    std::vector<Matrix> S;  ///< S(0..T)
    std::vector<Matrix> Y;  ///< Y(0..T-1); empty when loaded from a file
    std::vector<Matrix> L;  ///< centralized gains L(0..T-1); empty when loaded from a file
    MultiplierSchedule tau;
    double dual_value = 0.0;
    std::vector<double> lmi_residuals;  ///< min eigenvalue of each stage LMI

    int iterations = 0;
    bool converged = true;
    /// Filled in by solve_dual; NaN otherwise.
    double max_violation = std::numeric_limits<double>::quiet_NaN();
    double complementary_slackness = std::numeric_limits<double>::quiet_NaN();
    /// Lagrangian minimized over the decomposed (information-respecting)
    /// policy class at these multipliers. Equals dual_value whenever the
    /// centralized gain needs no cross-player information.
    double decomposed_dual_value = std::numeric_limits<double>::quiet_NaN();

    int horizon() const noexcept { return static_cast<int>(S.size()) - 1; }
};

/// Runs the recursion for fixed multipliers and fills dual_value and
/// lmi_residuals. Throws DimensionMismatch on a tau of the wrong shape.
DualCertificate backward_recursion(const GlobalSystem& system, const CostSpec& cost,
                                   const PowerConstraintSet& constraints,
                                   const MultiplierSchedule& tau);

/// tr(S(0) Sigma_x) + sum_{k=1..T} tr(S(k) Sigma_w) - sum_{k,i} tau_i(k) p_k^i
double dual_objective(const DualCertificate& certificate, const GlobalSystem& system,
                      const PowerConstraintSet& constraints);

/// Q_eff(k) + [A'S(k+1)A - S(k), A'S(k+1)B; B'S(k+1)A, B'S(k+1)B]
Matrix lmi_stage_matrix(const Matrix& S_k, const Matrix& S_next, const Matrix& Q_eff_k,
                        const GlobalSystem& system);

/// Minimum eigenvalue of lmi_stage_matrix.
double lmi_stage_residual(const Matrix& S_k, const Matrix& S_next, const Matrix& Q_eff_k,
                          const GlobalSystem& system);

enum class StepSchedule {
    Diminishing,  ///< alpha_t = alpha_0 / sqrt(t + 1)
    Constant,     ///< alpha_t = alpha_0
};

struct DualOptions {
    int max_iters = 100000;
    /// alpha_0; non-positive selects 0.1 J / p_max^2, where J is the
    /// unconstrained optimal value and p_max the largest budget, falling back
    /// to 1 / (1 + max_i ||W_i||_F) when J is zero.
    double step = 0.0;
    StepSchedule schedule = StepSchedule::Diminishing;
    /// Feasibility and complementary-slackness tolerances are
    /// relative_tolerance * max budget unless set to a positive absolute value.
    double relative_tolerance = 1e-6;
    double tol_feas = 0.0;
    double tol_cs = 0.0;
    /// Iterations without progress on the violation before the instance is
    /// declared infeasible (requires a rising dual value as well).
    int patience = 5000;
};

/// Thrown when max_iters is reached without ever visiting a feasible iterate.
class NotConverged : public Error {
public:
    NotConverged(DualCertificate last, double violation, double cs_residual);

    const DualCertificate& last_iterate() const noexcept { return last_; }
    double violation() const noexcept { return violation_; }
    double cs_residual() const noexcept { return cs_residual_; }

private:
    DualCertificate last_;
    double violation_;
    double cs_residual_;
};

/// Projected supergradient ascent on tau >= 0. Each iterate synthesizes the
/// decomposed policy for the current multipliers and steps along the load
/// excess g_i(k) = tr(W_i V(k)) - p_k^i of its closed-loop covariances.
///
/// Stops when the largest violation <= tol_feas and max |tau * g| <= tol_cs
/// (converged = true). At max_iters returns the feasible iterate with the
/// best decomposed dual value (converged = false); throws NotConverged if no
/// iterate was feasible and InfeasibleInstance if the violation stalls while
/// the dual value keeps rising.
DualCertificate solve_dual(const ProblemInstance& instance, const DualOptions& options = {});

}  // namespace dlqg
