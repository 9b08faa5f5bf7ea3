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

#include "dlqg/cli.hpp"

#include "dlqg/dual_solver.hpp"
#include "dlqg/errors.hpp"
#include "dlqg/info_structure.hpp"
#include "dlqg/io.hpp"
#include "dlqg/log.hpp"
#include "dlqg/oracle.hpp"
#include "dlqg/simulate.hpp"
#include "dlqg/synthesis.hpp"
#include "json_util.hpp"
#include "logging.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#ifndef DLQG_VERSION
#define DLQG_VERSION "0.0.0"
#endif

namespace dlqg::cli {

std::string version() { return DLQG_VERSION; }

namespace {

using detail::OrderedJson;

struct Options {
    bool json = false;
    std::string input;
    std::string cert;
    std::string gains;
    std::string out;
    std::string csv;

    int max_iters = DualOptions{}.max_iters;
    double tol = DualOptions{}.relative_tolerance;
    double step = 0.0;
    std::string schedule = "diminishing";

    std::int64_t trials = 1000;
    std::uint64_t seed = 0;
    int threads = 1;
    bool trace = false;

    std::string grid;
};

void print_json(std::ostream& out, const OrderedJson& doc) { out << doc.dump(2) << "\n"; }

// ---------------------------------------------------------------------------
// Subcommands

int cmd_validate(const Options& opt, std::ostream& out) {
    const ProblemInstance instance = io::load_problem(opt.input);
    const ValidationReport report =
        validate_instance(instance.system, instance.cost, instance.constraints);
    if (opt.json) {
        out << io::validation_json(report);
    } else {
        for (const auto& c : report.checks) {
            out << (c.passed ? "PASS " : (c.enforced ? "FAIL " : "WARN ")) << c.name;
            if (!c.detail.empty()) {
                out << ": " << c.detail;
            }
            out << "\n";
        }
        out << (report.passed() ? "instance is valid\n" : "instance is invalid\n");
    }
    return report.passed() ? kSuccess : kValidationFailure;
}

int cmd_check_nestedness(const Options& opt, std::ostream& out) {
    const ProblemInstance instance = io::load_problem(opt.input);
    const auto& graph = instance.system.graph();
    const DistanceMatrix d = all_pairs_distances(graph);
    const NestednessReport report = check_partial_nestedness(d);
    out << io::nestedness_json(report, d);
    return report.passed ? kSuccess : kValidationFailure;
}

bool require_valid(const ProblemInstance& instance, std::ostream& err) {
    const ValidationReport report =
        validate_instance(instance.system, instance.cost, instance.constraints);
    if (!report.passed()) {
        for (const auto& c : report.checks) {
            if (c.enforced && !c.passed) {
                err << "invalid instance: " << c.name << ": " << c.detail << "\n";
            }
        }
    }
    return report.passed();
}

OrderedJson certificate_summary(const DualCertificate& cert) {
    double worst_residual = std::numeric_limits<double>::infinity();
    for (double r : cert.lmi_residuals) {
        worst_residual = std::min(worst_residual, r);
    }
    return {{"converged", cert.converged},
            {"iters", cert.iterations},
            {"dual_value", detail::number_json(cert.dual_value)},
            {"decomposed_dual_value", detail::number_json(cert.decomposed_dual_value)},
            {"max_violation", detail::number_json(cert.max_violation)},
            {"complementary_slackness", detail::number_json(cert.complementary_slackness)},
            {"min_lmi_residual", detail::number_json(worst_residual)}};
}

int cmd_solve_dual(const Options& opt, std::ostream& out, std::ostream& err) {
    const ProblemInstance instance = io::load_problem(opt.input);
    if (!require_valid(instance, err)) {
        return kValidationFailure;
    }
    DualOptions options;
    options.max_iters = opt.max_iters;
    options.relative_tolerance = opt.tol;
    options.step = opt.step;
    options.schedule =
        opt.schedule == "constant" ? StepSchedule::Constant : StepSchedule::Diminishing;

    DualCertificate cert;
    try {
        cert = solve_dual(instance, options);
    } catch (const NotConverged& e) {
        err << "error: " << e.what() << "\n";
        if (!opt.out.empty()) {
            io::write_file(opt.out, io::emit_certificate(e.last_iterate()));
        }
        return kSolverFailure;
    }
    if (!opt.out.empty()) {
        io::write_file(opt.out, io::emit_certificate(cert));
    }
    const OrderedJson summary = certificate_summary(cert);
    if (opt.json) {
        print_json(out, summary);
    } else {
        out << (cert.converged ? "converged" : "stopped at max_iters") << " after "
            << cert.iterations << " iterations\n"
            << "dual value " << cert.dual_value << "\n"
            << "decomposed dual value " << cert.decomposed_dual_value << "\n"
            << "max violation " << cert.max_violation << ", complementary slackness "
            << cert.complementary_slackness << "\n";
    }
    if (!cert.converged) {
        err << "warning: tolerances not met; the certificate holds the best feasible iterate\n";
        return kSolverFailure;
    }
    return kSuccess;
}

int cmd_synthesize(const Options& opt, std::ostream& out) {
    const ProblemInstance instance = io::load_problem(opt.input);
    const DualCertificate cert = io::parse_certificate(io::read_file(opt.cert), instance);
    const SynthesisResult result = synthesize(instance, cert);
    if (!opt.out.empty()) {
        io::write_file(opt.out, io::emit_gains(result.gains));
    }
    if (!opt.csv.empty()) {
        io::write_file(opt.csv, io::gains_csv(result.gains));
    }
    const SubproblemCovariances sub =
        subproblem_covariances(result.partition, cert, instance.cost, instance.constraints,
                               result.gains, result.trajectory);
    const double cost = result.trajectory.cost(instance.cost);
    if (opt.json) {
        print_json(out, {{"horizon", result.gains.horizon()},
                         {"cost", detail::number_json(cost)},
                         {"loads", detail::table_json(result.trajectory.loads)},
                         {"max_abs_z_trace", detail::number_json(sub.max_abs_z_trace())}});
    } else {
        out << "synthesized " << result.gains.horizon() << " stages\n"
            << "closed-loop cost " << cost << "\n"
            << "max |tr(Z V)| " << sub.max_abs_z_trace() << "\n";
    }
    return kSuccess;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
    const ProblemInstance instance = io::load_problem(opt.input);
    GainSchedule gains = io::parse_gains(io::read_file(opt.gains), instance);
    SimConfig config;
    config.trials = opt.trials;
    config.seed = opt.seed;
    config.threads = opt.threads;
    config.record_trajectories = !opt.csv.empty() || opt.trace;
    if (!opt.cert.empty()) {
        const DualCertificate cert = io::parse_certificate(io::read_file(opt.cert), instance);
        gains.S = cert.S;
        gains.tau = cert.tau;
        config.gains_online = true;
    }
    const SimReport report =
        run_monte_carlo(instance.system, gains, instance.cost, instance.constraints, config);
    if (!opt.csv.empty()) {
        io::write_file(opt.csv, io::trajectories_csv(report));
    }
    out << io::sim_report_json(report);
    return kSuccess;
}

oracle::GridSpec parse_grid(const std::string& text) {
    oracle::GridSpec grid;
    if (text.empty()) {
        return grid;
    }
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw SchemaError("--grid expects lower,upper,step[,fine_step], got \"" + text + "\"");
        }
    }
    if (values.size() < 3 || values.size() > 4) {
        throw SchemaError("--grid expects lower,upper,step[,fine_step], got \"" + text + "\"");
    }
    grid.lower = values[0];
    grid.upper = values[1];
    grid.coarse_step = values[2];
    if (values.size() == 4) {
        grid.fine_step = values[3];
    }
    return grid;
}

int cmd_oracle_compare(const Options& opt, std::ostream& out) {
    const ProblemInstance instance = io::load_problem(opt.input);
    const GainSchedule gains = io::parse_gains(io::read_file(opt.gains), instance);
    const oracle::GridSpec grid = parse_grid(opt.grid);

    const oracle::PolicyEvaluation given =
        oracle::exact_policy_cost(instance.system, instance.cost, instance.constraints, gains);
    const oracle::SearchResult search =
        oracle::brute_force_search(instance.system, instance.cost, instance.constraints, grid);

    // L0(0) acts on xhat(0) = 0 and is excluded from the gain comparison.
    double gain_gap = 0.0;
    for (int k = 0; k < gains.horizon(); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (k > 0 && gains.L0[ku].size() > 0) {
            gain_gap = std::max(gain_gap, (gains.L0[ku] - search.gains.L0[ku]).cwiseAbs().maxCoeff());
        }
        for (int l = 1; l <= 2; ++l) {
            const Matrix& a = gains.local(l)[ku];
            if (a.size() > 0) {
                gain_gap = std::max(gain_gap, (a - search.gains.local(l)[ku]).cwiseAbs().maxCoeff());
            }
        }
    }
    const double excess = instance.constraints.empty() ? 0.0 : given.max_excess(instance.constraints);
    const double diff = given.cost - search.cost;
    print_json(out, {{"parameters", search.parameter_count},
                     {"evaluations", search.evaluations},
                     {"grid", {{"lower", grid.lower},
                               {"upper", grid.upper},
                               {"coarse_step", grid.coarse_step},
                               {"fine_step", grid.fine_step}}},
                     {"gains", {{"cost", detail::number_json(given.cost)},
                                {"loads", detail::table_json(given.loads)},
                                {"max_excess", detail::number_json(excess)}}},
                     {"brute_force", {{"cost", detail::number_json(search.cost)},
                                      {"feasible", search.feasible},
                                      {"loads", detail::table_json(search.loads)},
                                      {"gains", {{"L0", detail::matrix_list_json(search.gains.L0)},
                                                 {"L1", detail::matrix_list_json(search.gains.L1)},
                                                 {"L2", detail::matrix_list_json(search.gains.L2)}}}}},
                     {"cost_difference", detail::number_json(diff)},
                     {"max_gain_difference", detail::number_json(gain_gap)},
                     {"within_tolerance", std::abs(diff) <= 1e-3}});
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    configure_logging_from_env();

    Options opt;
    CLI::App app{"Delayed-information constrained LQG synthesis", "dlqg"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1);
    app.add_flag("--json", opt.json, "Machine-readable output on stdout");

    auto* validate = app.add_subcommand("validate", "Check the standing assumptions of an instance");
    validate->add_option("--input", opt.input, "Problem file")->required();

    auto* nested = app.add_subcommand("check-nestedness", "Verify partial nestedness of the graph");
    nested->add_option("--input", opt.input, "Problem file")->required();

    auto* solve = app.add_subcommand("solve-dual", "Compute the dual certificate");
    solve->add_option("--input", opt.input, "Problem file")->required();
    solve->add_option("--out", opt.out, "Certificate output file");
    solve->add_option("--max-iters", opt.max_iters, "Iteration limit")->check(CLI::PositiveNumber);
    solve->add_option("--tol", opt.tol, "Tolerance relative to the largest budget")
        ->check(CLI::PositiveNumber);
    solve->add_option("--step", opt.step, "Initial step size (0 selects the scale-aware default)");
    solve->add_option("--schedule", opt.schedule, "Step schedule")
        ->check(CLI::IsMember({"diminishing", "constant"}));

    auto* synth = app.add_subcommand("synthesize", "Build the coordinator and local gains");
    synth->add_option("--input", opt.input, "Problem file")->required();
    synth->add_option("--cert", opt.cert, "Certificate file")->required();
    synth->add_option("--out", opt.out, "Gains output file");
    synth->add_option("--csv", opt.csv, "Gains CSV output file");

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo run of the delayed protocol");
    sim->add_option("--input", opt.input, "Problem file")->required();
    sim->add_option("--gains", opt.gains, "Gains file")->required();
    sim->add_option("--cert", opt.cert, "Certificate file; enables online gain recomputation");
    sim->add_option("--trials", opt.trials, "Number of trials")->check(CLI::PositiveNumber);
    sim->add_option("--seed", opt.seed, "Random seed");
    sim->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    sim->add_option("--csv", opt.csv, "Trajectory CSV output file");
    sim->add_flag("--trace", opt.trace, "Include the message trace of trial 0 in the report");

    auto* compare = app.add_subcommand("oracle-compare", "Compare gains with a brute-force search");
    compare->add_option("--input", opt.input, "Problem file")->required();
    compare->add_option("--gains", opt.gains, "Gains file")->required();
    compare->add_option("--grid", opt.grid, "lower,upper,step[,fine_step]");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForVersion&) {
        out << version() << "\n";
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kInputError;
    }

    try {
        if (validate->parsed()) {
            return cmd_validate(opt, out);
        }
        if (nested->parsed()) {
            return cmd_check_nestedness(opt, out);
        }
        if (solve->parsed()) {
            return cmd_solve_dual(opt, out, err);
        }
        if (synth->parsed()) {
            return cmd_synthesize(opt, out);
        }
        if (sim->parsed()) {
            return cmd_simulate(opt, out);
        }
        if (compare->parsed()) {
            return cmd_oracle_compare(opt, out);
        }
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const InfeasibleInstance& e) {
        err << "error: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kValidationFailure;
    }
    err << app.help();
    return kInputError;
}

}  // namespace dlqg::cli
