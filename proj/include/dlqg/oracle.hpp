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

// Independent reference computations used to check the solver:
//  * a textbook finite-horizon LQR recursion,
//  * exact second moments of an arbitrary decomposed linear policy, computed
//    on the augmented state [x; xhat] instead of the three-block split,
//  * a deterministic grid and pattern search over decomposed gains.
//
// None of these share numerical code with dual_solver or synthesis.

#pragma once

#include "dlqg/model.hpp"
#include "dlqg/synthesis.hpp"

#include <vector>

namespace dlqg::oracle {

struct LqrSolution {
    std::vector<Matrix> gains;  ///< K(0..T-1), u = -K x
    std::vector<Matrix> P;      ///< value matrices P(0..T)
};

/// P(T) = Q_T,
/// K(k) = (Quu + B'P B)^{-1} (B'P A + Qux),
/// P(k) = Qxx + A'P A - (A'P B + Qxu) K(k).
/// Accepts T = 0 (empty gain list, P = {Q_T}). Throws SingularY.
LqrSolution classical_lqr(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& Q_T,
                          int horizon);
LqrSolution classical_lqr(const GlobalSystem& system, const CostSpec& cost);

struct PolicyEvaluation {
    double cost = 0.0;
    Matrix loads;                     ///< M x T
    std::vector<Matrix> covariances;  ///< E[z z'] for k = 0..T (zero input block at T)

    /// Largest tr(W_i V(k)) - p_k^i (negative when strictly feasible).
    double max_excess(const PowerConstraintSet& constraints) const;
};

/// Cost and loads of u = -L0 xhat - blkdiag(L1, L2) (x - xhat), for any
/// finite gains. Throws DimensionMismatch.
PolicyEvaluation exact_policy_cost(const GlobalSystem& system, const CostSpec& cost,
                                   const PowerConstraintSet& constraints, const GainSchedule& gains);

struct GridSpec {
    double lower = -3.0;
    double upper = 3.0;
    double coarse_step = 0.1;
    double fine_step = 1e-4;
    /// Grid points whose loads exceed a budget by more than this are rejected.
    double feasibility_tolerance = 1e-6;
    int max_parameters = 12;
};

struct SearchResult {
    GainSchedule gains;
    double cost = 0.0;
    Matrix loads;
    bool feasible = false;
    int parameter_count = 0;
    long evaluations = 0;
};

/// Number of free gain entries: L0(k) for k >= 1 (xhat(0) = 0 makes L0(0)
/// irrelevant) plus L1(k) and L2(k) for every k.
int gain_parameter_count(const GlobalSystem& system, int horizon);

/// Exhaustive grid when there are at most two parameters, otherwise
/// repeated coordinate sweeps over the grid, followed by a pattern search
/// (axis and pairwise diagonal moves) whose step halves down to fine_step.
/// A move that lowers the cost but breaks a budget is projected back onto
/// the feasible set, so the refinement can follow the constraint boundary.
/// Points are ranked by feasibility first and cost second. Deterministic.
/// Throws TooManyParameters and Unsupported (more than two nodes).
SearchResult brute_force_search(const GlobalSystem& system, const CostSpec& cost,
                                const PowerConstraintSet& constraints, const GridSpec& grid = {});

}  // namespace dlqg::oracle
