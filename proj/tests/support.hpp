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

// Instance builders and random generators shared by the unit tests and the
// acceptance runner.

#pragma once

#include "dlqg/model.hpp"

#include <random>
#include <vector>

namespace dlqg::testing {

using Rng = std::mt19937_64;

/// Single-node instance (N = 1).
ProblemInstance single_node(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& Q_T,
                            int horizon, const Matrix& sigma_x, const Matrix& sigma_w,
                            std::vector<PowerConstraint> constraints = {});

/// Two nodes joined by one edge. A is the aggregate n x n matrix with the
/// first n1 states belonging to node 0; B = blkdiag(B1, B2).
ProblemInstance two_player(int n1, const Matrix& A, const Matrix& B1, const Matrix& B2,
                           const Matrix& Q, const Matrix& Q_T, int horizon, const Matrix& sigma_x,
                           const Matrix& sigma_w, std::vector<PowerConstraint> constraints = {});

/// A = [[1, 0.1], [0.1, 1]], B = I, Q = I_4, Q_T = I_2, Sigma_x = Sigma_w = I.
ProblemInstance coupled_pair(int horizon, std::vector<PowerConstraint> constraints = {});

/// Scalar A = a, B = b, Q = I_2, Q_T = 1.
ProblemInstance scalar(double a, double b, int horizon, double sigma_x, double sigma_w,
                       std::vector<PowerConstraint> constraints = {});

/// Input-power weight selecting u'u on z = [x; u].
Matrix input_power(int n, int m);

Matrix diag(std::initializer_list<double> values);
Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0);
/// R R' / cols + shift I.
Matrix random_psd(Rng& rng, Eigen::Index n, double shift = 0.0);
/// Block-diagonal PSD matrix with the given block sizes.
Matrix random_block_psd(Rng& rng, const std::vector<int>& blocks, double shift = 0.0);

/// Random connected graph on n nodes: a random spanning tree plus extra
/// edges with probability p.
InterconnectionGraph random_connected_graph(Rng& rng, int n, double p);

/// Path to a file below the source tree.
std::string source_path(const std::string& relative);

}  // namespace dlqg::testing
