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

import json
from pathlib import Path

import numpy as np
import pytest

import dlqg

ROOT = Path(__file__).resolve().parents[2]
EXAMPLE = ROOT / "data" / "two_player.json"
BAD_QUU = ROOT / "tests" / "data" / "bad_quu.json"


@pytest.fixture(scope="module")
def problem():
    return dlqg.load_problem(str(EXAMPLE))


@pytest.fixture(scope="module")
def certificate(problem):
    return dlqg.solve_dual(problem)


def test_version():
    assert dlqg.__version__.startswith("0.1")


def test_problem_shapes(problem):
    assert problem.nodes == 2
    assert problem.horizon == 4
    assert problem.A.shape == (2, 2)
    assert problem.Q.shape == (4, 4)
    np.testing.assert_allclose(problem.A, [[1.0, 0.1], [0.1, 1.0]])


def test_round_trip(problem):
    again = dlqg.parse_problem(problem.to_json())
    assert again.to_json() == problem.to_json()


def test_validation_reports(problem):
    assert dlqg.validate(problem)["passed"]
    report = dlqg.validate(dlqg.load_problem(str(BAD_QUU)))
    assert not report["passed"]
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    assert "Quu positive definiteness" in failed


def test_nestedness(problem):
    report = dlqg.check_nestedness(problem)
    assert report["passed"]
    assert report["distances"] == [[0, 1], [1, 0]]


def test_pipeline(problem, certificate):
    assert certificate.converged
    assert certificate.tau.shape == (1, 4)
    assert min(certificate.lmi_residuals) >= -1e-8
    result = dlqg.synthesize(problem, certificate)
    cost = result.cost(problem)
    assert cost == pytest.approx(dlqg.policy_cost(problem, result.gains), rel=1e-12)
    assert cost == pytest.approx(certificate.decomposed_dual_value, rel=1e-4)
    assert np.all(result.loads <= 0.4 * (1 + 1e-6))
    report = dlqg.simulate(problem, result.gains, trials=20000, seed=3)
    assert abs(report["cost"]["mean"] - cost) <= 4 * report["cost"]["stderr"]
    again = dlqg.simulate(problem, result.gains, trials=20000, seed=3, threads=2)
    assert json.dumps(again) == json.dumps(report)


def test_certificate_json(certificate):
    doc = json.loads(certificate.to_json())
    assert doc["converged"] is True
    assert len(doc["S"]) == 5


def test_errors():
    with pytest.raises(dlqg.SchemaError):
        dlqg.parse_problem("{")
    with pytest.raises(dlqg.IoError):
        dlqg.load_problem("/nonexistent.json")
    assert issubclass(dlqg.SchemaError, dlqg.Error)
    with pytest.raises(ValueError):
        dlqg.solve_dual(dlqg.load_problem(str(EXAMPLE)), schedule="sometimes")


def test_brute_force_scalar():
    text = json.dumps(
        {
            "nodes": 1,
            "edges": [],
            "subsystems": [{"n": 1, "m": 1, "A": [1.0], "B": [1.0]}],
            "Sigma_x": [1.0],
            "Sigma_w": [1.0],
            "cost": {"Q": [1.0, 0.0, 0.0, 1.0], "Q_T": [1.0], "T": 1},
        }
    )
    result = dlqg.brute_force_search(dlqg.parse_problem(text))
    assert result["cost"] == pytest.approx(2.5, abs=1e-4)
    assert result["gains"].L1[0][0, 0] == pytest.approx(0.5, abs=1e-3)
