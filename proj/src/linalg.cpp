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

#include "dlqg/linalg.hpp"

#include "dlqg/errors.hpp"

#include <cmath>
#include <limits>

namespace dlqg::linalg {

Matrix symmetrized(const Matrix& x) {
    return 0.5 * (x + x.transpose());
}

double min_eigenvalue(const Matrix& x) {
    if (x.size() == 0) {
        return std::numeric_limits<double>::infinity();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(x), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

bool is_psd(const Matrix& x, double tol) {
    return min_eigenvalue(x) >= -tol;
}

bool is_symmetric(const Matrix& x, double tol) {
    if (x.rows() != x.cols()) {
        return false;
    }
    if (x.size() == 0) {
        return true;
    }
    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    return (x - x.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Matrix psd_sqrt(const Matrix& x) {
    if (x.size() == 0) {
        return x;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(x));
    Vector lambda = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -kPsdTolerance) {
            throw InvalidInstance("matrix is not positive semidefinite (eigenvalue "
                                  + std::to_string(lambda(i)) + ")");
        }
        lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
    }
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix psd_pseudo_inverse(const Matrix& x, int* rank, double rel_tol) {
    if (x.size() == 0) {
        if (rank != nullptr) {
            *rank = 0;
        }
        return x;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(x));
    const Vector& lambda = eig.eigenvalues();
    const double cutoff = rel_tol * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
    Vector inv = Vector::Zero(lambda.size());
    int r = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > cutoff && lambda(i) > 0.0) {
            inv(i) = 1.0 / lambda(i);
            ++r;
        }
    }
    if (rank != nullptr) {
        *rank = r;
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

int numerical_rank(const Matrix& x, double rel_tol) {
    if (x.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(x);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_tol * s(0)) {
            ++r;
        }
    }
    return r;
}

int psd_rank(const Matrix& x, double rel_tol) {
    if (x.size() == 0) {
        return 0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(x), Eigen::EigenvaluesOnly);
    const Vector& lambda = eig.eigenvalues();
    const double scale = lambda.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        return 0;
    }
    int r = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > rel_tol * scale) {
            ++r;
        }
    }
    return r;
}

Matrix from_row_major(std::span<const double> data, Eigen::Index rows, Eigen::Index cols) {
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw DimensionMismatch("expected " + std::to_string(rows * cols) + " entries for a "
                                + std::to_string(rows) + "x" + std::to_string(cols)
                                + " matrix, got " + std::to_string(data.size()));
    }
    Matrix out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            out(r, c) = data[static_cast<std::size_t>(r * cols + c)];
        }
    }
    return out;
}

std::vector<double> to_row_major(const Matrix& x) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(x.size()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            out.push_back(x(r, c));
        }
    }
    return out;
}

Matrix select(const Matrix& x, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x(rows[r], cols[c]);
        }
    }
    return out;
}

}  // namespace dlqg::linalg
