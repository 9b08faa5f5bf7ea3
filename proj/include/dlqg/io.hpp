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

// File formats. Matrices are stored as flat row-major arrays of numbers.
//
// Problem file:
//   {"nodes": N, "edges": [[i, j], ...],
//    "subsystems": [{"n": n_i, "m": m_i, "A": [...], "B": [...],
//                    "coupling": {"j": [...]}}],
//    "Sigma_x": [...], "Sigma_w": [...],
//    "cost": {"Q": [...], "Q_T": [...], "T": T},
//    "constraints": [{"W": [...], "p": [T numbers]}]}
// Unknown keys are rejected at every level.
//
// Certificate file:
//   {"S": [T+1 matrices], "tau": [M rows of T numbers], "dual_value": v,
//    "lmi_residuals": [T numbers], "iters": i, "converged": b, ...}
//
// Gains file:
//   {"L0": [T matrices], "L1": [T matrices], "L2": [T matrices]}

#pragma once

#include "dlqg/dual_solver.hpp"
#include "dlqg/info_structure.hpp"
#include "dlqg/model.hpp"
#include "dlqg/simulate.hpp"
#include "dlqg/synthesis.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace dlqg::io {

/// Throws IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

/// Throws SchemaError (malformed JSON with line and column, unknown or
/// missing keys, wrong array lengths) and whatever the model constructors
/// throw for inconsistent data.
ProblemInstance parse_problem(std::string_view text);
ProblemInstance load_problem(const std::filesystem::path& path);
std::string emit_problem(const ProblemInstance& instance);

std::string emit_certificate(const DualCertificate& certificate);
/// Shapes are checked against the instance. Y and L are left empty.
DualCertificate parse_certificate(std::string_view text, const ProblemInstance& instance);

std::string emit_gains(const GainSchedule& gains);
GainSchedule parse_gains(std::string_view text, const ProblemInstance& instance);

/// One row per entry: k,gain,row,col,value.
std::string gains_csv(const GainSchedule& gains);

std::string validation_json(const ValidationReport& report);
std::string nestedness_json(const NestednessReport& report, const DistanceMatrix& distances);
std::string sim_report_json(const SimReport& report);

/// Recorded trajectories as trial,k,entity,quantity,value.
std::string trajectories_csv(const SimReport& report);

}  // namespace dlqg::io
