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

#include "dlqg/io.hpp"

#include "dlqg/errors.hpp"
#include "json_util.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dlqg {

namespace detail {

using nlohmann::json;

OrderedJson number_json(double v) {
    return std::isfinite(v) ? OrderedJson(v) : OrderedJson(nullptr);
}

OrderedJson matrix_json(const Matrix& x) {
    OrderedJson out = OrderedJson::array();
    for (double v : linalg::to_row_major(x)) {
        out.push_back(number_json(v));
    }
    return out;
}

OrderedJson matrix_list_json(const std::vector<Matrix>& xs) {
    OrderedJson out = OrderedJson::array();
    for (const auto& x : xs) {
        out.push_back(matrix_json(x));
    }
    return out;
}

OrderedJson table_json(const Matrix& x) {
    OrderedJson out = OrderedJson::array();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        OrderedJson row = OrderedJson::array();
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            row.push_back(number_json(x(r, c)));
        }
        out.push_back(std::move(row));
    }
    return out;
}

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw SchemaError("malformed " + std::string(what) + ": " + e.what());
    }
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required, const std::string& where) {
    if (!obj.is_object()) {
        throw SchemaError(where + ": expected an object");
    }
    for (const auto& item : obj.items()) {
        bool known = false;
        for (auto key : allowed) {
            known = known || item.key() == key;
        }
        if (!known) {
            throw SchemaError(where + ": unknown key \"" + item.key() + "\"");
        }
    }
    for (auto key : required) {
        if (!obj.contains(std::string(key))) {
            throw SchemaError(where + ": missing key \"" + std::string(key) + "\"");
        }
    }
}

const json& member(const json& obj, std::string_view key, const std::string& where) {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) {
        throw SchemaError(where + ": missing key \"" + std::string(key) + "\"");
    }
    return *it;
}

long long read_integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) {
        throw SchemaError(where + ": expected an integer");
    }
    return j.get<long long>();
}

double read_number(const json& j, const std::string& where) {
    if (!j.is_number()) {
        throw SchemaError(where + ": expected a number");
    }
    return j.get<double>();
}

std::vector<double> read_numbers(const json& j, const std::string& where) {
    if (!j.is_array()) {
        throw SchemaError(where + ": expected an array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(read_number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

Matrix read_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
    const auto values = read_numbers(j, where);
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw SchemaError(where + ": expected " + std::to_string(rows * cols) + " numbers ("
                          + std::to_string(rows) + "x" + std::to_string(cols) + " row-major), got "
                          + std::to_string(values.size()));
    }
    return linalg::from_row_major(values, rows, cols);
}

std::vector<Matrix> read_matrix_list(const json& j, std::size_t count, Eigen::Index rows,
                                     Eigen::Index cols, const std::string& where) {
    if (!j.is_array() || j.size() != count) {
        throw SchemaError(where + ": expected an array of " + std::to_string(count) + " matrices");
    }
    std::vector<Matrix> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(read_matrix(j[i], rows, cols, where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

}  // namespace detail

namespace io {

using nlohmann::json;
using detail::OrderedJson;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw IoError("error while reading " + path.string());
    }
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw IoError("error while writing " + path.string());
    }
}

// ---------------------------------------------------------------------------
// Problem

ProblemInstance parse_problem(std::string_view text) {
    const json doc = detail::parse_json(text, "problem file");
    detail::check_keys(doc, {"nodes", "edges", "subsystems", "Sigma_x", "Sigma_w", "cost", "constraints"},
                       {"nodes", "edges", "subsystems", "Sigma_x", "Sigma_w", "cost"}, "problem");

    const long long N = detail::read_integer(doc["nodes"], "problem.nodes");
    if (N < 1) {
        throw SchemaError("problem.nodes: must be at least 1");
    }
    const json& edges_json = doc["edges"];
    if (!edges_json.is_array()) {
        throw SchemaError("problem.edges: expected an array of [i, j] pairs");
    }
    std::vector<InterconnectionGraph::Edge> edges;
    for (std::size_t e = 0; e < edges_json.size(); ++e) {
        const std::string where = "problem.edges[" + std::to_string(e) + "]";
        const json& pair = edges_json[e];
        if (!pair.is_array() || pair.size() != 2) {
            throw SchemaError(where + ": expected [i, j]");
        }
        edges.emplace_back(static_cast<int>(detail::read_integer(pair[0], where + "[0]")),
                           static_cast<int>(detail::read_integer(pair[1], where + "[1]")));
    }
    InterconnectionGraph graph(static_cast<int>(N), edges);

    const json& subs_json = doc["subsystems"];
    if (!subs_json.is_array() || static_cast<long long>(subs_json.size()) != N) {
        throw SchemaError("problem.subsystems: expected an array of " + std::to_string(N)
                          + " subsystems");
    }
    std::vector<int> n_of;
    std::vector<int> m_of;
    for (std::size_t i = 0; i < subs_json.size(); ++i) {
        const std::string where = "problem.subsystems[" + std::to_string(i) + "]";
        detail::check_keys(subs_json[i], {"n", "m", "A", "B", "coupling"}, {"n", "m", "A", "B"}, where);
        const long long n = detail::read_integer(subs_json[i]["n"], where + ".n");
        const long long m = detail::read_integer(subs_json[i]["m"], where + ".m");
        if (n < 1 || m < 0) {
            throw SchemaError(where + ": need n >= 1 and m >= 0");
        }
        n_of.push_back(static_cast<int>(n));
        m_of.push_back(static_cast<int>(m));
    }

    std::vector<SubsystemDynamics> subsystems;
    int n_total = 0;
    int m_total = 0;
    for (std::size_t i = 0; i < subs_json.size(); ++i) {
        const std::string where = "problem.subsystems[" + std::to_string(i) + "]";
        const json& s = subs_json[i];
        SubsystemDynamics dyn;
        dyn.A = detail::read_matrix(s["A"], n_of[i], n_of[i], where + ".A");
        dyn.B = detail::read_matrix(s["B"], n_of[i], m_of[i], where + ".B");
        if (s.contains("coupling")) {
            const json& coupling = s["coupling"];
            if (!coupling.is_object()) {
                throw SchemaError(where + ".coupling: expected an object keyed by neighbor index");
            }
            for (const auto& item : coupling.items()) {
                const std::string cw = where + ".coupling." + item.key();
                int j = -1;
                std::size_t used = 0;
                try {
                    j = std::stoi(item.key(), &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != item.key().size() || j < 0 || j >= N) {
                    throw SchemaError(cw + ": key must be a node index in 0.." + std::to_string(N - 1));
                }
                dyn.coupling[j] =
                    detail::read_matrix(item.value(), n_of[i], n_of[static_cast<std::size_t>(j)], cw);
            }
        }
        n_total += n_of[i];
        m_total += m_of[i];
        subsystems.push_back(std::move(dyn));
    }

    Matrix sigma_x = detail::read_matrix(doc["Sigma_x"], n_total, n_total, "problem.Sigma_x");
    Matrix sigma_w = detail::read_matrix(doc["Sigma_w"], n_total, n_total, "problem.Sigma_w");

    const json& cost_json = doc["cost"];
    detail::check_keys(cost_json, {"Q", "Q_T", "T"}, {"Q", "Q_T", "T"}, "problem.cost");
    const long long T = detail::read_integer(cost_json["T"], "problem.cost.T");
    if (T < 1) {
        throw SchemaError("problem.cost.T: must be at least 1");
    }
    const int z = n_total + m_total;
    CostSpec cost(detail::read_matrix(cost_json["Q"], z, z, "problem.cost.Q"),
                  detail::read_matrix(cost_json["Q_T"], n_total, n_total, "problem.cost.Q_T"),
                  static_cast<int>(T));

    std::vector<PowerConstraint> constraints;
    if (doc.contains("constraints")) {
        const json& cons = doc["constraints"];
        if (!cons.is_array()) {
            throw SchemaError("problem.constraints: expected an array");
        }
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const std::string where = "problem.constraints[" + std::to_string(i) + "]";
            detail::check_keys(cons[i], {"W", "p"}, {"W", "p"}, where);
            PowerConstraint c;
            c.W = detail::read_matrix(cons[i]["W"], z, z, where + ".W");
            c.budgets = detail::read_numbers(cons[i]["p"], where + ".p");
            if (static_cast<long long>(c.budgets.size()) != T) {
                throw SchemaError(where + ".p: expected " + std::to_string(T) + " budgets, got "
                                  + std::to_string(c.budgets.size()));
            }
            constraints.push_back(std::move(c));
        }
    }

    GlobalSystem system =
        assemble_global(graph, std::move(subsystems), std::move(sigma_x), std::move(sigma_w));
    return ProblemInstance(std::move(system), std::move(cost),
                           PowerConstraintSet(std::move(constraints)));
}

ProblemInstance load_problem(const std::filesystem::path& path) {
    return parse_problem(read_file(path));
}

std::string emit_problem(const ProblemInstance& instance) {
    const auto& system = instance.system;
    OrderedJson doc;
    doc["nodes"] = system.node_count();
    OrderedJson edges = OrderedJson::array();
    for (auto [a, b] : system.graph().edges()) {
        edges.push_back({a, b});
    }
    doc["edges"] = std::move(edges);
    OrderedJson subs = OrderedJson::array();
    for (const auto& s : system.subsystems()) {
        OrderedJson sj;
        sj["n"] = s.state_dim();
        sj["m"] = s.input_dim();
        sj["A"] = detail::matrix_json(s.A);
        sj["B"] = detail::matrix_json(s.B);
        if (!s.coupling.empty()) {
            OrderedJson coupling = OrderedJson::object();
            for (const auto& [j, Aij] : s.coupling) {
                coupling[std::to_string(j)] = detail::matrix_json(Aij);
            }
            sj["coupling"] = std::move(coupling);
        }
        subs.push_back(std::move(sj));
    }
    doc["subsystems"] = std::move(subs);
    doc["Sigma_x"] = detail::matrix_json(system.sigma_x());
    doc["Sigma_w"] = detail::matrix_json(system.sigma_w());
    doc["cost"] = {{"Q", detail::matrix_json(instance.cost.Q())},
                   {"Q_T", detail::matrix_json(instance.cost.Q_T())},
                   {"T", instance.cost.horizon()}};
    OrderedJson cons = OrderedJson::array();
    for (const auto& c : instance.constraints) {
        cons.push_back({{"W", detail::matrix_json(c.W)}, {"p", c.budgets}});
    }
    doc["constraints"] = std::move(cons);
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Certificate

std::string emit_certificate(const DualCertificate& certificate) {
    OrderedJson doc;
    doc["S"] = detail::matrix_list_json(certificate.S);
    doc["tau"] = detail::table_json(certificate.tau.values());
    doc["dual_value"] = detail::number_json(certificate.dual_value);
    OrderedJson residuals = OrderedJson::array();
    for (double r : certificate.lmi_residuals) {
        residuals.push_back(detail::number_json(r));
    }
    doc["lmi_residuals"] = std::move(residuals);
    doc["iters"] = certificate.iterations;
    doc["converged"] = certificate.converged;
    doc["max_violation"] = detail::number_json(certificate.max_violation);
    doc["complementary_slackness"] = detail::number_json(certificate.complementary_slackness);
    doc["decomposed_dual_value"] = detail::number_json(certificate.decomposed_dual_value);
    return doc.dump(2) + "\n";
}

namespace {

double optional_number(const json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key) || doc[key].is_null()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return detail::read_number(doc[key], where + "." + key);
}

}  // namespace

DualCertificate parse_certificate(std::string_view text, const ProblemInstance& instance) {
    const json doc = detail::parse_json(text, "certificate file");
    const std::string where = "certificate";
    detail::check_keys(doc,
                       {"S", "tau", "dual_value", "lmi_residuals", "iters", "converged",
                        "max_violation", "complementary_slackness", "decomposed_dual_value"},
                       {"S", "tau", "dual_value", "lmi_residuals", "iters", "converged"}, where);
    const int n = instance.system.state_dim();
    const int T = instance.cost.horizon();
    const auto M = instance.constraints.size();

    DualCertificate cert;
    cert.S = detail::read_matrix_list(doc["S"], static_cast<std::size_t>(T + 1), n, n, where + ".S");
    const json& tau = doc["tau"];
    if (!tau.is_array() || tau.size() != M) {
        throw SchemaError(where + ".tau: expected " + std::to_string(M) + " rows");
    }
    Matrix tau_values(static_cast<Eigen::Index>(M), T);
    for (std::size_t i = 0; i < M; ++i) {
        const auto row = detail::read_numbers(tau[i], where + ".tau[" + std::to_string(i) + "]");
        if (static_cast<int>(row.size()) != T) {
            throw SchemaError(where + ".tau[" + std::to_string(i) + "]: expected "
                              + std::to_string(T) + " entries");
        }
        for (int k = 0; k < T; ++k) {
            tau_values(static_cast<Eigen::Index>(i), k) = row[static_cast<std::size_t>(k)];
        }
    }
    cert.tau = M > 0 ? MultiplierSchedule(tau_values) : MultiplierSchedule(0, T);
    cert.dual_value = detail::read_number(doc["dual_value"], where + ".dual_value");
    cert.lmi_residuals = detail::read_numbers(doc["lmi_residuals"], where + ".lmi_residuals");
    if (static_cast<int>(cert.lmi_residuals.size()) != T) {
        throw SchemaError(where + ".lmi_residuals: expected " + std::to_string(T) + " entries");
    }
    cert.iterations = static_cast<int>(detail::read_integer(doc["iters"], where + ".iters"));
    if (!doc["converged"].is_boolean()) {
        throw SchemaError(where + ".converged: expected true or false");
    }
    cert.converged = doc["converged"].get<bool>();
    cert.max_violation = optional_number(doc, "max_violation", where);
    cert.complementary_slackness = optional_number(doc, "complementary_slackness", where);
    cert.decomposed_dual_value = optional_number(doc, "decomposed_dual_value", where);
    return cert;
}

// ---------------------------------------------------------------------------
// Gains

std::string emit_gains(const GainSchedule& gains) {
    OrderedJson doc;
    doc["L0"] = detail::matrix_list_json(gains.L0);
    doc["L1"] = detail::matrix_list_json(gains.L1);
    doc["L2"] = detail::matrix_list_json(gains.L2);
    return doc.dump(2) + "\n";
}

GainSchedule parse_gains(std::string_view text, const ProblemInstance& instance) {
    const json doc = detail::parse_json(text, "gains file");
    detail::check_keys(doc, {"L0", "L1", "L2"}, {"L0", "L1", "L2"}, "gains");
    const PartitionedData part = partition(instance.system, instance.cost);
    const auto T = static_cast<std::size_t>(instance.cost.horizon());
    GainSchedule gains;
    gains.L0 = detail::read_matrix_list(doc["L0"], T, part.input_dim(0), part.state_dim(0), "gains.L0");
    gains.L1 = detail::read_matrix_list(doc["L1"], T, part.input_dim(1), part.state_dim(1), "gains.L1");
    gains.L2 = detail::read_matrix_list(doc["L2"], T, part.input_dim(2), part.state_dim(2), "gains.L2");
    return gains;
}

std::string gains_csv(const GainSchedule& gains) {
    std::ostringstream out;
    out.precision(17);
    out << "k,gain,row,col,value\n";
    const std::array<std::pair<const char*, const std::vector<Matrix>*>, 3> lists = {
        {{"L0", &gains.L0}, {"L1", &gains.L1}, {"L2", &gains.L2}}};
    for (std::size_t k = 0; k < gains.L0.size(); ++k) {
        for (const auto& [name, list] : lists) {
            const Matrix& L = (*list)[k];
            for (Eigen::Index r = 0; r < L.rows(); ++r) {
                for (Eigen::Index c = 0; c < L.cols(); ++c) {
                    out << k << ',' << name << ',' << r << ',' << c << ',' << L(r, c) << '\n';
                }
            }
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Reports

std::string validation_json(const ValidationReport& report) {
    OrderedJson doc;
    doc["passed"] = report.passed();
    OrderedJson checks = OrderedJson::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"enforced", c.enforced},
                          {"value", detail::number_json(c.value)},
                          {"detail", c.detail}});
    }
    doc["checks"] = std::move(checks);
    return doc.dump(2) + "\n";
}

std::string nestedness_json(const NestednessReport& report, const DistanceMatrix& distances) {
    OrderedJson doc;
    doc["passed"] = report.passed;
    doc["nodes"] = distances.size();
    doc["triples_checked"] = report.triples_checked;
    OrderedJson d = OrderedJson::array();
    for (int i = 0; i < distances.size(); ++i) {
        OrderedJson row = OrderedJson::array();
        for (int j = 0; j < distances.size(); ++j) {
            row.push_back(distances(i, j));
        }
        d.push_back(std::move(row));
    }
    doc["distances"] = std::move(d);
    OrderedJson binding = OrderedJson::array();
    for (const auto& t : report.binding) {
        binding.push_back({t.n, t.j, t.i});
    }
    doc["binding_triples"] = std::move(binding);
    doc["violation"] = report.violation
                           ? OrderedJson{report.violation->n, report.violation->j, report.violation->i}
                           : OrderedJson(nullptr);
    return doc.dump(2) + "\n";
}

std::string sim_report_json(const SimReport& report) {
    OrderedJson doc;
    doc["trials"] = report.trials;
    doc["seed"] = report.seed;
    doc["cost"] = {{"mean", detail::number_json(report.cost_mean)},
                   {"stderr", detail::number_json(report.cost_stderr)},
                   {"analytic", detail::number_json(report.analytic_cost)}};
    doc["loads"] = {{"mean", detail::table_json(report.load_mean)},
                    {"stderr", detail::table_json(report.load_stderr)},
                    {"analytic", detail::table_json(report.analytic_loads)}};
    doc["violations"] = report.violations;
    OrderedJson gap = OrderedJson::array();
    for (double g : report.covariance_gap) {
        gap.push_back(detail::number_json(g));
    }
    doc["covariance_gap"] = std::move(gap);
    doc["cross_covariance"] = {{"max_zscore", detail::number_json(report.max_cross_zscore())},
                               {"mean", detail::matrix_list_json(report.cross_mean)},
                               {"stderr", detail::matrix_list_json(report.cross_stderr)}};
    if (!report.trajectories.empty()) {
        OrderedJson trace = OrderedJson::array();
        for (const auto& msg : report.trajectories.front().messages) {
            auto entity = [](int id) {
                return id == kCoordinator ? std::string("coordinator") : "unit" + std::to_string(id);
            };
            trace.push_back({{"k", msg.time},
                             {"from", entity(msg.from)},
                             {"to", entity(msg.to)},
                             {"content", msg.content},
                             {"delay", msg.delay},
                             {"payload", msg.payload}});
        }
        doc["protocol_trace"] = std::move(trace);
    }
    return doc.dump(2) + "\n";
}

std::string trajectories_csv(const SimReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "trial,k,entity,quantity,value\n";
    auto emit = [&](std::int64_t trial, std::size_t k, const char* entity, const char* name,
                    const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            out << trial << ',' << k << ',' << entity << ',' << name << '[' << i << "]," << v(i)
                << '\n';
        }
    };
    for (const auto& t : report.trajectories) {
        for (std::size_t k = 0; k < t.x.size(); ++k) {
            emit(t.trial, k, "plant", "x", t.x[k]);
            if (k < t.u.size()) {
                emit(t.trial, k, "plant", "u", t.u[k]);
                emit(t.trial, k, "coordinator", "xhat", t.xhat[k]);
                emit(t.trial, k, "units", "omega", t.omega[k]);
            }
        }
    }
    return out.str();
}

}  // namespace io
}  // namespace dlqg
