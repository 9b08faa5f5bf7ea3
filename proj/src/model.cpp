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

#include "dlqg/model.hpp"

#include "dlqg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <sstream>

namespace dlqg {

namespace {

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Largest |entry| outside the diagonal blocks of the state partition.
double off_block_magnitude(const Matrix& x, const std::vector<SubsystemBlock>& blocks) {
    double worst = 0.0;
    for (std::size_t a = 0; a < blocks.size(); ++a) {
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (a == b || blocks[a].state_dim == 0 || blocks[b].state_dim == 0) {
                continue;
            }
            worst = std::max(worst, x.block(blocks[a].state_offset, blocks[b].state_offset,
                                            blocks[a].state_dim, blocks[b].state_dim)
                                        .cwiseAbs()
                                        .maxCoeff());
        }
    }
    return worst;
}

void check_covariance(const Matrix& sigma, int n, const std::vector<SubsystemBlock>& blocks,
                      const char* name) {
    if (sigma.rows() != n || sigma.cols() != n) {
        throw DimensionMismatch(std::string(name) + " must be " + std::to_string(n) + "x"
                                + std::to_string(n) + ", got " + dims(sigma));
    }
    if (!linalg::is_symmetric(sigma, 1e-12)) {
        throw InvalidInstance(std::string(name) + " is not symmetric");
    }
    const double lambda = linalg::min_eigenvalue(sigma);
    if (n > 0 && lambda < -linalg::kPsdTolerance) {
        throw InvalidInstance(std::string(name) + " is not positive semidefinite (min eigenvalue "
                              + std::to_string(lambda) + ")");
    }
    const double scale = n > 0 ? 1.0 + sigma.cwiseAbs().maxCoeff() : 1.0;
    if (off_block_magnitude(sigma, blocks) > 1e-12 * scale) {
        throw InvalidInstance(std::string(name)
                              + " must be block diagonal across subsystems (independent "
                                "subsystem noises)");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// InterconnectionGraph

InterconnectionGraph::InterconnectionGraph(int node_count, const std::vector<Edge>& edges)
    : node_count_(node_count) {
    if (node_count < 1) {
        throw GraphError("graph needs at least one node");
    }
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
            throw GraphError("edge (" + std::to_string(a) + ", " + std::to_string(b)
                             + ") references a node outside 0.." + std::to_string(node_count - 1));
        }
        if (a == b) {
            throw GraphError("self-loop at node " + std::to_string(a));
        }
        edges_.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    adjacency_.assign(static_cast<std::size_t>(node_count), {});
    for (auto [a, b] : edges_) {
        adjacency_[static_cast<std::size_t>(a)].push_back(b);
        adjacency_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& list : adjacency_) {
        std::sort(list.begin(), list.end());
    }

    std::vector<bool> seen(static_cast<std::size_t>(node_count), false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int reached = 1;
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int w : adjacency_[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = true;
                ++reached;
                frontier.push(w);
            }
        }
    }
    if (reached != node_count) {
        throw GraphError("graph is disconnected: " + std::to_string(reached) + " of "
                         + std::to_string(node_count) + " nodes reachable from node 0");
    }
}

const std::vector<int>& InterconnectionGraph::neighbors(int node) const {
    if (node < 0 || node >= node_count_) {
        throw GraphError("node " + std::to_string(node) + " out of range");
    }
    return adjacency_[static_cast<std::size_t>(node)];
}

bool InterconnectionGraph::adjacent(int i, int j) const {
    const auto& list = neighbors(i);
    return std::binary_search(list.begin(), list.end(), j);
}

// ---------------------------------------------------------------------------
// GlobalSystem

GlobalSystem::GlobalSystem(InterconnectionGraph graph, std::vector<SubsystemDynamics> subsystems,
                           std::vector<SubsystemBlock> partition, Matrix A, Matrix B,
                           Matrix sigma_x, Matrix sigma_w)
    : graph_(std::move(graph)),
      subsystems_(std::move(subsystems)),
      partition_(std::move(partition)),
      A_(std::move(A)),
      B_(std::move(B)),
      sigma_x_(std::move(sigma_x)),
      sigma_w_(std::move(sigma_w)) {}

GlobalSystem assemble_global(const InterconnectionGraph& graph,
                             std::vector<SubsystemDynamics> subsystems, Matrix sigma_x,
                             Matrix sigma_w) {
    const int N = graph.node_count();
    if (static_cast<int>(subsystems.size()) != N) {
        throw DimensionMismatch("graph has " + std::to_string(N) + " nodes but "
                                + std::to_string(subsystems.size()) + " subsystems were given");
    }

    std::vector<SubsystemBlock> blocks(static_cast<std::size_t>(N));
    int n = 0;
    int m = 0;
    for (int i = 0; i < N; ++i) {
        const auto& sub = subsystems[static_cast<std::size_t>(i)];
        if (sub.A.rows() != sub.A.cols()) {
            throw DimensionMismatch("A_" + std::to_string(i) + " must be square, got " + dims(sub.A));
        }
        if (sub.B.rows() != sub.A.rows()) {
            throw DimensionMismatch("B_" + std::to_string(i) + " must have "
                                    + std::to_string(sub.A.rows()) + " rows, got " + dims(sub.B));
        }
        blocks[static_cast<std::size_t>(i)] = {n, static_cast<int>(sub.A.rows()), m,
                                               static_cast<int>(sub.B.cols())};
        n += static_cast<int>(sub.A.rows());
        m += static_cast<int>(sub.B.cols());
    }

    Matrix A = Matrix::Zero(n, n);
    Matrix B = Matrix::Zero(n, m);
    for (int i = 0; i < N; ++i) {
        const auto& sub = subsystems[static_cast<std::size_t>(i)];
        const auto& bi = blocks[static_cast<std::size_t>(i)];
        A.block(bi.state_offset, bi.state_offset, bi.state_dim, bi.state_dim) = sub.A;
        B.block(bi.state_offset, bi.input_offset, bi.state_dim, bi.input_dim) = sub.B;
        for (const auto& [j, Aij] : sub.coupling) {
            if (j < 0 || j >= N || j == i || !graph.adjacent(i, j)) {
                throw GraphError("subsystem " + std::to_string(i) + " declares coupling from node "
                                 + std::to_string(j) + ", which is not one of its neighbors");
            }
            const auto& bj = blocks[static_cast<std::size_t>(j)];
            if (Aij.rows() != bi.state_dim || Aij.cols() != bj.state_dim) {
                throw DimensionMismatch("A_" + std::to_string(i) + std::to_string(j) + " must be "
                                        + std::to_string(bi.state_dim) + "x"
                                        + std::to_string(bj.state_dim) + ", got " + dims(Aij));
            }
            A.block(bi.state_offset, bj.state_offset, bi.state_dim, bj.state_dim) = Aij;
        }
    }

    check_covariance(sigma_x, n, blocks, "Sigma_x");
    check_covariance(sigma_w, n, blocks, "Sigma_w");

    return GlobalSystem(graph, std::move(subsystems), std::move(blocks), std::move(A),
                        std::move(B), std::move(sigma_x), std::move(sigma_w));
}

// ---------------------------------------------------------------------------
// CostSpec

CostSpec::CostSpec(Matrix Q, Matrix Q_T, int horizon)
    : Q_(std::move(Q)), Q_T_(std::move(Q_T)), horizon_(horizon) {
    if (Q_.rows() != Q_.cols()) {
        throw DimensionMismatch("Q must be square, got " + dims(Q_));
    }
    if (Q_T_.rows() != Q_T_.cols() || Q_T_.rows() > Q_.rows()) {
        throw DimensionMismatch("Q_T must be square and no larger than Q, got " + dims(Q_T_));
    }
    if (horizon_ < 1) {
        throw InvalidInstance("horizon T must be a positive integer, got "
                              + std::to_string(horizon_));
    }
    if (!linalg::is_symmetric(Q_, 1e-12)) {
        throw InvalidInstance("Q is not symmetric");
    }
    if (!linalg::is_symmetric(Q_T_, 1e-12)) {
        throw InvalidInstance("Q_T is not symmetric");
    }
}

Matrix CostSpec::Qxx() const { return Q_.topLeftCorner(state_dim(), state_dim()); }
Matrix CostSpec::Qxu() const { return Q_.topRightCorner(state_dim(), input_dim()); }
Matrix CostSpec::Qux() const { return Q_.bottomLeftCorner(input_dim(), state_dim()); }
Matrix CostSpec::Quu() const { return Q_.bottomRightCorner(input_dim(), input_dim()); }

// ---------------------------------------------------------------------------
// PowerConstraintSet

PowerConstraintSet::PowerConstraintSet(std::vector<PowerConstraint> constraints)
    : constraints_(std::move(constraints)) {
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        const auto& c = constraints_[i];
        const std::string tag = "W[" + std::to_string(i) + "]";
        if (c.W.rows() != c.W.cols()) {
            throw DimensionMismatch(tag + " must be square, got " + dims(c.W));
        }
        if (c.W.rows() != constraints_.front().W.rows()) {
            throw DimensionMismatch(tag + " differs in size from W[0]");
        }
        if (!linalg::is_symmetric(c.W, 1e-12)) {
            throw InvalidInstance(tag + " is not symmetric");
        }
        for (std::size_t k = 0; k < c.budgets.size(); ++k) {
            const double p = c.budgets[k];
            if (!std::isfinite(p) || p <= 0.0) {
                throw InvalidInstance("budget p[" + std::to_string(i) + "][" + std::to_string(k)
                                      + "] must be finite and positive");
            }
        }
    }
}

double PowerConstraintSet::max_budget() const {
    double best = 0.0;
    for (const auto& c : constraints_) {
        for (double p : c.budgets) {
            best = std::max(best, p);
        }
    }
    return best;
}

double PowerConstraintSet::min_budget() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : constraints_) {
        for (double p : c.budgets) {
            best = std::min(best, p);
        }
    }
    return best;
}

void PowerConstraintSet::check_compatible(int dim, int horizon) const {
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        const auto& c = constraints_[i];
        if (c.W.rows() != dim) {
            throw DimensionMismatch("W[" + std::to_string(i) + "] must be " + std::to_string(dim)
                                    + "x" + std::to_string(dim) + ", got " + dims(c.W));
        }
        if (static_cast<int>(c.budgets.size()) != horizon) {
            throw DimensionMismatch("constraint " + std::to_string(i) + " needs "
                                    + std::to_string(horizon) + " budgets, got "
                                    + std::to_string(c.budgets.size()));
        }
    }
}

// ---------------------------------------------------------------------------
// ProblemInstance

ProblemInstance::ProblemInstance(GlobalSystem system_in, CostSpec cost_in,
                                 PowerConstraintSet constraints_in)
    : system(std::move(system_in)), cost(std::move(cost_in)), constraints(std::move(constraints_in)) {
    const int n = system.state_dim();
    const int m = system.input_dim();
    if (cost.Q().rows() != n + m || cost.state_dim() != n) {
        throw DimensionMismatch("cost is sized for n=" + std::to_string(cost.state_dim())
                                + ", m=" + std::to_string(cost.input_dim()) + " but the system has n="
                                + std::to_string(n) + ", m=" + std::to_string(m));
    }
    constraints.check_compatible(n + m, cost.horizon());
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const ValidationCheck& c) { return c.passed || !c.enforced; });
}

const ValidationCheck* ValidationReport::find(std::string_view name) const {
    for (const auto& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

namespace {

ValidationCheck psd_check(std::string name, const Matrix& x) {
    const double lambda = linalg::min_eigenvalue(x);
    const bool ok = x.size() == 0 || lambda >= -linalg::kPsdTolerance;
    std::ostringstream detail;
    detail << "min eigenvalue " << (x.size() == 0 ? 0.0 : lambda);
    return {std::move(name), ok, true, x.size() == 0 ? 0.0 : lambda, detail.str()};
}

ValidationCheck controllability_check(const Matrix& A, const Matrix& B) {
    const auto n = A.rows();
    Matrix reach(n, B.cols() * n);
    Matrix block = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        reach.middleCols(i * B.cols(), B.cols()) = block;
        block = A * block;
    }
    const int rank = linalg::numerical_rank(reach);
    std::ostringstream detail;
    detail << "rank [B AB ... A^(n-1)B] = " << rank << " of " << n;
    return {"(A,B) controllability", rank == n, false, static_cast<double>(rank), detail.str()};
}

// PBH test on the eigenvalues of A outside the open unit disc.
ValidationCheck detectability_check(const Matrix& A, const Matrix& Qxx) {
    const auto n = A.rows();
    ValidationCheck check{"(Q^1/2,A) detectability", true, false, 0.0, ""};
    if (n == 0) {
        check.detail = "empty state";
        return check;
    }
    Matrix C;
    try {
        C = linalg::psd_sqrt(Qxx);
    } catch (const Error&) {
        check.passed = false;
        check.detail = "Qxx is not positive semidefinite";
        return check;
    }
    Eigen::EigenSolver<Matrix> eig(A, false);
    using Complex = std::complex<double>;
    Eigen::MatrixXcd pbh(2 * n, n);
    int worst_rank = static_cast<int>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex lambda = eig.eigenvalues()(i);
        if (std::abs(lambda) < 1.0 - 1e-12) {
            continue;
        }
        pbh.topRows(n) = lambda * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
        pbh.bottomRows(n) = C.cast<Complex>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
        const auto& s = svd.singularValues();
        int rank = 0;
        for (Eigen::Index j = 0; j < s.size(); ++j) {
            if (s(j) > 1e-10 * std::max(1.0, s(0))) {
                ++rank;
            }
        }
        worst_rank = std::min(worst_rank, rank);
    }
    check.passed = worst_rank == n;
    check.value = worst_rank;
    check.detail = "min PBH rank over unstable modes = " + std::to_string(worst_rank) + " of "
                   + std::to_string(n);
    return check;
}

}  // namespace

ValidationReport validate_instance(const GlobalSystem& system, const CostSpec& cost,
                                   const PowerConstraintSet& constraints) {
    ValidationReport report;
    auto& checks = report.checks;
    const int n = system.state_dim();
    const int m = system.input_dim();

    const bool sizes_ok = cost.Q().rows() == n + m && cost.state_dim() == n;
    checks.push_back({"cost dimensions", sizes_ok, true, 0.0,
                      "Q is " + dims(cost.Q()) + ", expected " + std::to_string(n + m) + "x"
                          + std::to_string(n + m)});

    checks.push_back(psd_check("Sigma_x positive semidefiniteness", system.sigma_x()));
    checks.push_back(psd_check("Sigma_w positive semidefiniteness", system.sigma_w()));
    checks.push_back(psd_check("Q positive semidefiniteness", cost.Q()));
    checks.push_back(psd_check("Q_T positive semidefiniteness", cost.Q_T()));

    {
        const Matrix Quu = cost.Quu();
        const double lambda = linalg::min_eigenvalue(Quu);
        std::ostringstream detail;
        detail << "min eigenvalue " << (Quu.size() == 0 ? 0.0 : lambda) << " (must exceed 1e-10)";
        checks.push_back({"Quu positive definiteness", Quu.size() == 0 || lambda > 1e-10, true,
                          Quu.size() == 0 ? 0.0 : lambda, detail.str()});
    }

    for (std::size_t i = 0; i < constraints.size(); ++i) {
        checks.push_back(psd_check("W[" + std::to_string(i) + "] positive semidefiniteness",
                                   constraints[i].W));
    }
    {
        bool ok = true;
        std::string detail = "each constraint carries " + std::to_string(cost.horizon()) + " budgets";
        try {
            constraints.check_compatible(n + m, cost.horizon());
        } catch (const Error& e) {
            ok = false;
            detail = e.what();
        }
        checks.push_back({"constraint dimensions", ok, true, 0.0, detail});
    }

    checks.push_back(controllability_check(system.A(), system.B()));
    if (sizes_ok) {
        checks.push_back(detectability_check(system.A(), cost.Qxx()));
    }
    return report;
}

}  // namespace dlqg
