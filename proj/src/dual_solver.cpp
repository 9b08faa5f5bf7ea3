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

#include "dlqg/synthesis.hpp"
#include "logging.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace dlqg {

// ---------------------------------------------------------------------------
// MultiplierSchedule / EffectiveCost

MultiplierSchedule::MultiplierSchedule(int constraint_count, int horizon)
    : values_(Matrix::Zero(constraint_count, horizon)) {}

MultiplierSchedule::MultiplierSchedule(Matrix values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        const double v = values_.data()[i];
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidInstance("multipliers must be finite and non-negative");
        }
    }
}

EffectiveCost::EffectiveCost(const CostSpec& cost, const PowerConstraintSet& constraints,
                             const MultiplierSchedule& tau)
    : n_(cost.state_dim()), m_(cost.input_dim()) {
    const int T = cost.horizon();
    if (tau.constraint_count() != static_cast<int>(constraints.size())
        || (tau.constraint_count() > 0 && tau.horizon() != T)) {
        throw DimensionMismatch("multiplier schedule is " + std::to_string(tau.constraint_count())
                                + "x" + std::to_string(tau.horizon()) + ", expected "
                                + std::to_string(constraints.size()) + "x" + std::to_string(T));
    }
    stages_.assign(static_cast<std::size_t>(T), cost.Q());
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        for (int k = 0; k < T; ++k) {
            const double t = tau(static_cast<int>(i), k);
            if (t != 0.0) {
                stages_[static_cast<std::size_t>(k)] += t * constraints[i].W;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Recursion

StageGain stage_gain(const Matrix& A, const Matrix& B, const Matrix& S_next, const Matrix& Qxu,
                     const Matrix& Quu, int stage) {
    const Matrix SB = S_next * B;
    StageGain out;
    out.Y = linalg::symmetrized(B.transpose() * SB + Quu);
    if (out.Y.size() == 0) {
        out.L = Matrix::Zero(0, A.cols());
        return out;
    }
    const double lambda = linalg::min_eigenvalue(out.Y);
    if (!(lambda >= kSingularYThreshold)) {
        throw SingularY(stage, lambda);
    }
    const Matrix rhs = SB.transpose() * A + Qxu.transpose();
    out.L = out.Y.llt().solve(rhs);
    return out;
}

namespace {

// Recursion matrices for fixed multipliers. Residuals and the dual value are
// left empty.
DualCertificate run_recursion(const GlobalSystem& system, const CostSpec& cost,
                              const EffectiveCost& eff, MultiplierSchedule tau) {
    const int T = cost.horizon();
    const Matrix& A = system.A();
    const Matrix& B = system.B();

    DualCertificate cert;
    cert.S.resize(static_cast<std::size_t>(T + 1));
    cert.Y.resize(static_cast<std::size_t>(T));
    cert.L.resize(static_cast<std::size_t>(T));
    cert.tau = std::move(tau);
    cert.S[static_cast<std::size_t>(T)] = cost.Q_T();

    for (int k = T - 1; k >= 0; --k) {
        const auto ku = static_cast<std::size_t>(k);
        const Matrix& S_next = cert.S[ku + 1];
        StageGain g = stage_gain(A, B, S_next, eff.Qxu(k), eff.Quu(k), k);
        Matrix S_k = A.transpose() * S_next * A + eff.Qxx(k) - g.L.transpose() * g.Y * g.L;
        cert.S[ku] = linalg::symmetrized(S_k);
        cert.Y[ku] = std::move(g.Y);
        cert.L[ku] = std::move(g.L);
    }
    return cert;
}

void fill_residuals(DualCertificate& cert, const GlobalSystem& system, const EffectiveCost& eff,
                    const PowerConstraintSet& constraints) {
    const int T = cert.horizon();
    cert.lmi_residuals.resize(static_cast<std::size_t>(T));
    for (int k = 0; k < T; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        cert.lmi_residuals[ku] = lmi_stage_residual(cert.S[ku], cert.S[ku + 1], eff.stage(k), system);
    }
    cert.dual_value = dual_objective(cert, system, constraints);
}

}  // namespace

DualCertificate backward_recursion(const GlobalSystem& system, const CostSpec& cost,
                                   const PowerConstraintSet& constraints,
                                   const MultiplierSchedule& tau) {
    if (cost.state_dim() != system.state_dim() || cost.input_dim() != system.input_dim()) {
        throw DimensionMismatch("cost does not match the system dimensions");
    }
    const EffectiveCost eff(cost, constraints, tau);
    DualCertificate cert = run_recursion(system, cost, eff, tau);
    fill_residuals(cert, system, eff, constraints);
    return cert;
}

double dual_objective(const DualCertificate& certificate, const GlobalSystem& system,
                      const PowerConstraintSet& constraints) {
    const int n = system.state_dim();
    const int T = certificate.horizon();
    if (T < 0) {
        throw DimensionMismatch("certificate holds no S matrices");
    }
    for (const auto& S : certificate.S) {
        if (S.rows() != n || S.cols() != n) {
            throw DimensionMismatch("certificate S(k) must be " + std::to_string(n) + "x"
                                    + std::to_string(n));
        }
    }
    const auto& tau = certificate.tau;
    if (tau.constraint_count() != static_cast<int>(constraints.size())
        || (tau.constraint_count() > 0 && tau.horizon() != T)) {
        throw DimensionMismatch("multiplier schedule does not match the constraint set");
    }

    double value = (certificate.S.front() * system.sigma_x()).trace();
    for (int k = 1; k <= T; ++k) {
        value += (certificate.S[static_cast<std::size_t>(k)] * system.sigma_w()).trace();
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& p = constraints[i].budgets;
        if (static_cast<int>(p.size()) != T) {
            throw DimensionMismatch("constraint budgets do not match the horizon");
        }
        for (int k = 0; k < T; ++k) {
            value -= tau(static_cast<int>(i), k) * p[static_cast<std::size_t>(k)];
        }
    }
    return value;
}

Matrix lmi_stage_matrix(const Matrix& S_k, const Matrix& S_next, const Matrix& Q_eff_k,
                        const GlobalSystem& system) {
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const int n = system.state_dim();
    const int m = system.input_dim();
    if (S_k.rows() != n || S_next.rows() != n || Q_eff_k.rows() != n + m
        || Q_eff_k.cols() != n + m) {
        throw DimensionMismatch("stage LMI operands do not match the system dimensions");
    }
    Matrix AB(n, n + m);
    AB << A, B;
    Matrix out = Q_eff_k + AB.transpose() * S_next * AB;
    out.topLeftCorner(n, n) -= S_k;
    return linalg::symmetrized(out);
}

double lmi_stage_residual(const Matrix& S_k, const Matrix& S_next, const Matrix& Q_eff_k,
                          const GlobalSystem& system) {
    return linalg::min_eigenvalue(lmi_stage_matrix(S_k, S_next, Q_eff_k, system));
}

// ---------------------------------------------------------------------------
// Multiplier ascent

NotConverged::NotConverged(DualCertificate last, double violation, double cs_residual)
    : Error("multiplier ascent did not reach a feasible iterate (violation "
            + std::to_string(violation) + ", complementary slackness "
            + std::to_string(cs_residual) + ")"),
      last_(std::move(last)),
      violation_(violation),
      cs_residual_(cs_residual) {}

namespace {

// tau carries units of cost per unit load and the supergradient carries
// units of load, so the step needs units of cost per load squared. The
// unconstrained optimal value sets the cost scale and the largest budget
// sets the load scale.
double default_step(const GlobalSystem& system, const CostSpec& cost,
                    const PowerConstraintSet& constraints, double p_max) {
    constexpr double kStepFactor = 0.1;
    const MultiplierSchedule zero(static_cast<int>(constraints.size()), cost.horizon());
    const double value = backward_recursion(system, cost, constraints, zero).dual_value;
    if (value > 0.0 && p_max > 0.0) {
        return kStepFactor * value / (p_max * p_max);
    }
    double max_w_norm = 0.0;
    for (const auto& c : constraints) {
        max_w_norm = std::max(max_w_norm, c.W.norm());
    }
    return 1.0 / (1.0 + max_w_norm);
}

}  // namespace

DualCertificate solve_dual(const ProblemInstance& instance, const DualOptions& options) {
    const auto& system = instance.system;
    const auto& cost = instance.cost;
    const auto& constraints = instance.constraints;
    const int T = cost.horizon();
    const int M = static_cast<int>(constraints.size());
    const PartitionedData part = partition(system, cost);

    auto evaluate = [&](const MultiplierSchedule& tau, double& violation, double& cs) {
        const EffectiveCost eff(cost, constraints, tau);
        DualCertificate cert = run_recursion(system, cost, eff, tau);
        const GainSchedule gains = gains_from_certificate(part, cert, cost, constraints);
        const CovarianceTrajectory traj = propagate_closed_loop(system, gains, constraints);
        Matrix slack(M, T);
        for (int i = 0; i < M; ++i) {
            for (int k = 0; k < T; ++k) {
                slack(i, k) = traj.loads(i, k) - constraints[static_cast<std::size_t>(i)]
                                                      .budgets[static_cast<std::size_t>(k)];
            }
        }
        violation = M > 0 ? std::max(0.0, slack.maxCoeff()) : 0.0;
        const Matrix weighted = tau.values().cwiseProduct(slack);
        cs = M > 0 ? weighted.cwiseAbs().maxCoeff() : 0.0;
        cert.max_violation = violation;
        cert.complementary_slackness = cs;
        cert.decomposed_dual_value = traj.cost(cost) + weighted.sum();
        return std::pair{std::move(cert), std::move(slack)};
    };
    auto finalize = [&](DualCertificate cert) {
        const EffectiveCost eff(cost, constraints, cert.tau);
        fill_residuals(cert, system, eff, constraints);
        return cert;
    };

    if (M == 0) {
        double violation = 0.0;
        double cs = 0.0;
        auto [cert, slack] = evaluate(MultiplierSchedule(0, T), violation, cs);
        cert.iterations = 1;
        cert.converged = true;
        return finalize(std::move(cert));
    }

    const double p_max = constraints.max_budget();
    const double alpha0 = options.step > 0.0 ? options.step : default_step(system, cost, constraints, p_max);
    const double tol_feas =
        options.tol_feas > 0.0 ? options.tol_feas : options.relative_tolerance * p_max;
    const double tol_cs = options.tol_cs > 0.0 ? options.tol_cs : options.relative_tolerance * p_max;

    Matrix tau_values = Matrix::Zero(M, T);
    std::optional<DualCertificate> best;
    DualCertificate last;
    double violation = 0.0;
    double cs = 0.0;

    double best_violation = std::numeric_limits<double>::infinity();
    int last_progress = 0;
    double value_at_progress = -std::numeric_limits<double>::infinity();

    for (int t = 0; t < options.max_iters; ++t) {
        auto [cert, slack] = evaluate(MultiplierSchedule(tau_values), violation, cs);
        cert.iterations = t + 1;

        if (violation <= tol_feas) {
            if (cs <= tol_cs) {
                cert.converged = true;
                detail::logger().info("multiplier ascent converged after {} iterations", t + 1);
                return finalize(std::move(cert));
            }
            if (!best || cert.decomposed_dual_value > best->decomposed_dual_value) {
                best = cert;
            }
        }

        if (violation < best_violation * (1.0 - 1e-3)) {
            best_violation = violation;
            last_progress = t;
            value_at_progress = cert.decomposed_dual_value;
        } else if (t - last_progress >= options.patience && best_violation > 100.0 * tol_feas) {
            const double rise = cert.decomposed_dual_value - value_at_progress;
            if (rise > 1e-6 * (1.0 + std::abs(value_at_progress))) {
                throw InfeasibleInstance(
                    "constraint violation stalled at " + std::to_string(best_violation)
                    + " while the dual value keeps increasing; no feasible policy exists");
            }
            last_progress = t;
            value_at_progress = cert.decomposed_dual_value;
        }

        if (t % 1000 == 0) {
            detail::logger().debug("iter {}: violation {:.3e}, cs {:.3e}, dual {:.10g}", t,
                                   violation, cs, cert.decomposed_dual_value);
        }

        const double alpha = options.schedule == StepSchedule::Diminishing
                                 ? alpha0 / std::sqrt(static_cast<double>(t) + 1.0)
                                 : alpha0;
        tau_values = (tau_values + alpha * slack).cwiseMax(0.0);
        last = std::move(cert);
    }

    if (best) {
        best->converged = false;
        detail::logger().warn("multiplier ascent stopped at max_iters={} without meeting tolerances",
                              options.max_iters);
        return finalize(std::move(*best));
    }
    throw NotConverged(finalize(std::move(last)), violation, cs);
}

}  // namespace dlqg
