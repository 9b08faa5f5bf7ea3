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

#pragma once

#include <stdexcept>
#include <string>

namespace dlqg {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector sizes disagree with the declared partition.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Interconnection graph is malformed or disconnected. Also raised when a
/// coupling references a node that is not a neighbor.
class GraphError : public Error {
public:
    using Error::Error;
};

/// Numerical data violates a standing assumption (PSD covariances,
/// block-diagonal noise, positive budgets, ...).
class InvalidInstance : public Error {
public:
    using Error::Error;
};

/// Operation only implemented for a subset of instances (e.g. N <= 2).
class Unsupported : public Error {
public:
    using Error::Error;
};

/// Malformed JSON or a document that does not match the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// File access failed.
class IoError : public Error {
public:
    using Error::Error;
};

/// Stage matrix Y(k) = B'S(k+1)B + Quu(k) is not safely invertible.
class SingularY : public Error {
public:
    SingularY(int stage, double min_eigenvalue)
        : Error("Y(" + std::to_string(stage) + ") is singular: min eigenvalue "
                + std::to_string(min_eigenvalue)),
          stage_(stage),
          min_eigenvalue_(min_eigenvalue) {}

    int stage() const noexcept { return stage_; }
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    int stage_;
    double min_eigenvalue_;
};

/// Multiplier ascent detected an instance with no feasible policy.
class InfeasibleInstance : public Error {
public:
    using Error::Error;
};

/// Brute-force search was asked to enumerate too many gain entries.
class TooManyParameters : public Error {
public:
    TooManyParameters(int count, int limit)
        : Error("brute-force search over " + std::to_string(count)
                + " gain entries exceeds the limit of " + std::to_string(limit)),
          count_(count) {}

    int count() const noexcept { return count_; }

private:
    int count_;
};

}  // namespace dlqg
