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

#include "support.hpp"

#include <algorithm>
#include <numeric>

#ifndef DLQG_SOURCE_DIR
#define DLQG_SOURCE_DIR "."
#endif

namespace dlqg::testing {

ProblemInstance single_node(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& Q_T,
                            int horizon, const Matrix& sigma_x, const Matrix& sigma_w,
                            std::vector<PowerConstraint> constraints) {
    InterconnectionGraph graph(1, {});
    GlobalSystem system = assemble_global(graph, {SubsystemDynamics{A, B, {}}}, sigma_x, sigma_w);
    return ProblemInstance(std::move(system), CostSpec(Q, Q_T, horizon),
                           PowerConstraintSet(std::move(constraints)));
}

ProblemInstance two_player(int n1, const Matrix& A, const Matrix& B1, const Matrix& B2,
                           const Matrix& Q, const Matrix& Q_T, int horizon, const Matrix& sigma_x,
                           const Matrix& sigma_w, std::vector<PowerConstraint> constraints) {
    const auto n = A.rows();
    const auto n2 = n - n1;
    InterconnectionGraph graph(2, {{0, 1}});
    SubsystemDynamics s0{A.topLeftCorner(n1, n1), B1, {{1, A.topRightCorner(n1, n2)}}};
    SubsystemDynamics s1{A.bottomRightCorner(n2, n2), B2, {{0, A.bottomLeftCorner(n2, n1)}}};
    GlobalSystem system = assemble_global(graph, {s0, s1}, sigma_x, sigma_w);
    return ProblemInstance(std::move(system), CostSpec(Q, Q_T, horizon),
                           PowerConstraintSet(std::move(constraints)));
}

ProblemInstance coupled_pair(int horizon, std::vector<PowerConstraint> constraints) {
    Matrix A(2, 2);
    A << 1.0, 0.1, 0.1, 1.0;
    const Matrix one = Matrix::Ones(1, 1);
    return two_player(1, A, one, one, Matrix::Identity(4, 4), Matrix::Identity(2, 2), horizon,
                      Matrix::Identity(2, 2), Matrix::Identity(2, 2), std::move(constraints));
}

ProblemInstance scalar(double a, double b, int horizon, double sigma_x, double sigma_w,
                       std::vector<PowerConstraint> constraints) {
    return single_node(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Identity(2, 2),
                       Matrix::Ones(1, 1), horizon, Matrix::Constant(1, 1, sigma_x),
                       Matrix::Constant(1, 1, sigma_w), std::move(constraints));
}

Matrix input_power(int n, int m) {
    Matrix W = Matrix::Zero(n + m, n + m);
    W.bottomRightCorner(m, m).setIdentity();
    return W;
}

Matrix diag(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    std::copy(values.begin(), values.end(), v.data());
    return v.asDiagonal();
}

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.data()[i] = normal(rng);
    }
    return out;
}

Matrix random_psd(Rng& rng, Eigen::Index n, double shift) {
    const Matrix R = random_matrix(rng, n, n);
    Matrix out = R * R.transpose() / static_cast<double>(std::max<Eigen::Index>(n, 1));
    out += shift * Matrix::Identity(n, n);
    return 0.5 * (out + out.transpose());
}

Matrix random_block_psd(Rng& rng, const std::vector<int>& blocks, double shift) {
    const int n = std::accumulate(blocks.begin(), blocks.end(), 0);
    Matrix out = Matrix::Zero(n, n);
    int at = 0;
    for (int b : blocks) {
        out.block(at, at, b, b) = random_psd(rng, b, shift);
        at += b;
    }
    return out;
}

InterconnectionGraph random_connected_graph(Rng& rng, int n, double p) {
    std::vector<InterconnectionGraph::Edge> edges;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int v = 1; v < n; ++v) {
        std::uniform_int_distribution<int> pick(0, v - 1);
        edges.emplace_back(order[static_cast<std::size_t>(v)],
                           order[static_cast<std::size_t>(pick(rng))]);
    }
    std::bernoulli_distribution extra(p);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (extra(rng)) {
                edges.emplace_back(i, j);
            }
        }
    }
    return InterconnectionGraph(n, edges);
}

std::string source_path(const std::string& relative) {
    return std::string(DLQG_SOURCE_DIR) + "/" + relative;
}

}  // namespace dlqg::testing
