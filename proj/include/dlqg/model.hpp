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

// Problem data for the aggregated system x(k+1) = A x(k) + B u(k) + w(k)
// built from the subsystems on an interconnection graph. The cost is
// quadratic in z = [x; u] and each power constraint bounds E[z' W_i z] by
// p_k^i.
//
// All types validate on construction and are immutable afterwards.

#pragma once

#include "dlqg/linalg.hpp"

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dlqg {

/// Connected, undirected graph without self-loops. Nodes are 0..N-1.
class InterconnectionGraph {
public:
    using Edge = std::pair<int, int>;

    /// Edges are unordered; (i, j) and (j, i) denote the same edge and
    /// duplicates are merged. Throws GraphError on out-of-range endpoints,
    /// self-loops, or a disconnected graph.
    InterconnectionGraph(int node_count, const std::vector<Edge>& edges);

    int node_count() const noexcept { return node_count_; }

    /// Normalized edge list with first < second, sorted without duplicates.
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    const std::vector<int>& neighbors(int node) const;
    bool adjacent(int i, int j) const;

private:
    int node_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
};

/// Local model x_i(k+1) = A_ii x_i + B_i u_i + sum_j A_ij x_j + w_i.
/// The subsystem's node id is its position in the subsystem list.
struct SubsystemDynamics {
    Matrix A;                        ///< n_i x n_i
    Matrix B;                        ///< n_i x m_i
    std::map<int, Matrix> coupling;  ///< neighbor j -> A_ij (n_i x n_j)

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index input_dim() const { return B.cols(); }

    bool operator==(const SubsystemDynamics&) const = default;
};

/// Offsets of one subsystem inside the stacked x and u vectors.
struct SubsystemBlock {
    int state_offset = 0;
    int state_dim = 0;
    int input_offset = 0;
    int input_dim = 0;

    bool operator==(const SubsystemBlock&) const = default;
};

class GlobalSystem {
public:
    const InterconnectionGraph& graph() const noexcept { return graph_; }
    const std::vector<SubsystemDynamics>& subsystems() const noexcept { return subsystems_; }
    const std::vector<SubsystemBlock>& partition() const noexcept { return partition_; }

    const Matrix& A() const noexcept { return A_; }
    const Matrix& B() const noexcept { return B_; }
    const Matrix& sigma_x() const noexcept { return sigma_x_; }
    const Matrix& sigma_w() const noexcept { return sigma_w_; }

    int node_count() const noexcept { return graph_.node_count(); }
    int state_dim() const noexcept { return static_cast<int>(A_.rows()); }
    int input_dim() const noexcept { return static_cast<int>(B_.cols()); }

private:
    friend GlobalSystem assemble_global(const InterconnectionGraph&,
                                        std::vector<SubsystemDynamics>, Matrix, Matrix);

    GlobalSystem(InterconnectionGraph graph, std::vector<SubsystemDynamics> subsystems,
                 std::vector<SubsystemBlock> partition, Matrix A, Matrix B, Matrix sigma_x,
                 Matrix sigma_w);

    InterconnectionGraph graph_;
    std::vector<SubsystemDynamics> subsystems_;
    std::vector<SubsystemBlock> partition_;
    Matrix A_;
    Matrix B_;
    Matrix sigma_x_;
    Matrix sigma_w_;
};

/// Stacks the subsystems into (A, B) and attaches the initial-state and
/// process-noise covariances.
///
/// A's block (i, j) is A_ij for each declared coupling, A_ii on the diagonal,
/// zero elsewhere; B is block diagonal. Both covariances must be symmetric
/// PSD (min eigenvalue >= -1e-10 after symmetrization) and block diagonal
/// with respect to the state partition.
///
/// Throws DimensionMismatch, GraphError (coupling to a non-neighbor) or
/// InvalidInstance (covariance assumptions).
GlobalSystem assemble_global(const InterconnectionGraph& graph,
                             std::vector<SubsystemDynamics> subsystems, Matrix sigma_x,
                             Matrix sigma_w);

/// Stage cost z'Qz on z = [x; u], terminal cost x'Q_T x, horizon T >= 1.
class CostSpec {
public:
    CostSpec(Matrix Q, Matrix Q_T, int horizon);

    const Matrix& Q() const noexcept { return Q_; }
    const Matrix& Q_T() const noexcept { return Q_T_; }
    int horizon() const noexcept { return horizon_; }

    int state_dim() const noexcept { return static_cast<int>(Q_T_.rows()); }
    int input_dim() const noexcept { return static_cast<int>(Q_.rows() - Q_T_.rows()); }

    Matrix Qxx() const;
    Matrix Qxu() const;
    Matrix Qux() const;
    Matrix Quu() const;

private:
    Matrix Q_;
    Matrix Q_T_;
    int horizon_;
};

/// One constraint E[z(k)' W z(k)] <= budgets[k], k = 0..T-1.
struct PowerConstraint {
    Matrix W;
    std::vector<double> budgets;

    bool operator==(const PowerConstraint&) const = default;
};

class PowerConstraintSet {
public:
    PowerConstraintSet() = default;

    /// All W share one square symmetric shape. Every budget must be finite
    /// and strictly positive.
    explicit PowerConstraintSet(std::vector<PowerConstraint> constraints);

    std::size_t size() const noexcept { return constraints_.size(); }
    bool empty() const noexcept { return constraints_.empty(); }
    const PowerConstraint& operator[](std::size_t i) const { return constraints_[i]; }
    auto begin() const noexcept { return constraints_.begin(); }
    auto end() const noexcept { return constraints_.end(); }

    double max_budget() const;
    double min_budget() const;

    /// Throws DimensionMismatch unless each W is dim x dim and each
    /// constraint carries exactly `horizon` budgets.
    void check_compatible(int dim, int horizon) const;

private:
    std::vector<PowerConstraint> constraints_;
};

/// A complete problem: system, cost and constraints with matching sizes.
struct ProblemInstance {
    GlobalSystem system;
    CostSpec cost;
    PowerConstraintSet constraints;

    ProblemInstance(GlobalSystem system, CostSpec cost, PowerConstraintSet constraints = {});
};

struct ValidationCheck {
    std::string name;
    bool passed = false;
    /// Enforced checks decide ValidationReport::passed(); the others are
    /// informational (controllability, detectability).
    bool enforced = true;
    /// The quantity the check tested, such as an eigenvalue or a rank.
    double value = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool passed() const;
    const ValidationCheck* find(std::string_view name) const;
};

/// Checks that every covariance and weight matrix is PSD and that Quu is
/// positive definite (min eigenvalue > 1e-10). Controllability of (A, B) and
/// detectability of (Qxx^{1/2}, A) are reported without being enforced.
/// Never throws; every finding goes in the report.
ValidationReport validate_instance(const GlobalSystem& system, const CostSpec& cost,
                                   const PowerConstraintSet& constraints);

}  // namespace dlqg
