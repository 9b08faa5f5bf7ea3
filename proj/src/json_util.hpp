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

// JSON helpers shared by the file formats and the command line reports.

#pragma once

#include "dlqg/linalg.hpp"

#include <nlohmann/json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace dlqg::detail {

using OrderedJson = nlohmann::ordered_json;

OrderedJson matrix_json(const Matrix& x);
OrderedJson matrix_list_json(const std::vector<Matrix>& xs);
/// Matrix as a list of rows (used for M x T tables).
OrderedJson table_json(const Matrix& x);
/// Non-finite values become null.
OrderedJson number_json(double v);

/// Parses text, turning syntax errors into SchemaError with line and column.
nlohmann::json parse_json(std::string_view text, std::string_view what);

/// Strict readers; every error message names the JSON path.
void check_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required, const std::string& where);
const nlohmann::json& member(const nlohmann::json& obj, std::string_view key,
                             const std::string& where);
long long read_integer(const nlohmann::json& j, const std::string& where);
double read_number(const nlohmann::json& j, const std::string& where);
std::vector<double> read_numbers(const nlohmann::json& j, const std::string& where);
Matrix read_matrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                   const std::string& where);
std::vector<Matrix> read_matrix_list(const nlohmann::json& j, std::size_t count, Eigen::Index rows,
                                     Eigen::Index cols, const std::string& where);

}  // namespace dlqg::detail
