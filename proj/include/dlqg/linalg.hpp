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

// Small dense helpers shared by the modules. Everything operates on
// dynamically sized Eigen matrices; problem sizes are desk scale.

#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace dlqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Eigenvalues in [-kPsdTolerance, 0) are treated as zero.
inline constexpr double kPsdTolerance = 1e-10;

Matrix symmetrized(const Matrix& x);

/// Smallest eigenvalue of the symmetric part of a square matrix.
/// Returns +inf for an empty matrix.
double min_eigenvalue(const Matrix& x);

bool is_psd(const Matrix& x, double tol = kPsdTolerance);

/// max |x - x'| <= tol * (1 + max |x|)
bool is_symmetric(const Matrix& x, double tol = 1e-12);

/// Symmetric square root U diag(sqrt(max(l, 0))) U' of a PSD matrix.
/// Throws InvalidInstance when an eigenvalue is below -kPsdTolerance.
Matrix psd_sqrt(const Matrix& x);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix; eigenvalues
/// below rel_tol * max eigenvalue are dropped. Optionally reports the rank.
Matrix psd_pseudo_inverse(const Matrix& x, int* rank = nullptr, double rel_tol = 1e-12);

/// Rank from singular values above rel_tol * largest singular value.
int numerical_rank(const Matrix& x, double rel_tol = 1e-10);

/// Count of eigenvalues of a symmetric matrix above rel_tol * max |eigenvalue|.
int psd_rank(const Matrix& x, double rel_tol = 1e-9);

Matrix from_row_major(std::span<const double> data, Eigen::Index rows, Eigen::Index cols);
std::vector<double> to_row_major(const Matrix& x);

/// Sub-matrix x(rows, cols) for arbitrary index lists.
Matrix select(const Matrix& x, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace linalg
}  // namespace dlqg
