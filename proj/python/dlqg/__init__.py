# Copyright 2026 The dlqg Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Constrained LQG synthesis for delayed-information two-player systems."""

from ._core import (
    DimensionMismatch,
    DualCertificate,
    Error,
    GainSchedule,
    InfeasibleInstance,
    InvalidInstance,
    IoError,
    NotConverged,
    ProblemInstance,
    SchemaError,
    SynthesisResult,
    Unsupported,
    __doc__,
    __version__,
    brute_force_search,
    check_nestedness,
    load_problem,
    parse_problem,
    policy_cost,
    simulate,
    solve_dual,
    synthesize,
    validate,
)

__all__ = [
    "DimensionMismatch",
    "DualCertificate",
    "Error",
    "GainSchedule",
    "InfeasibleInstance",
    "InvalidInstance",
    "IoError",
    "NotConverged",
    "ProblemInstance",
    "SchemaError",
    "SynthesisResult",
    "Unsupported",
    "__doc__",
    "__version__",
    "brute_force_search",
    "check_nestedness",
    "load_problem",
    "parse_problem",
    "policy_cost",
    "simulate",
    "solve_dual",
    "synthesize",
    "validate",
]
