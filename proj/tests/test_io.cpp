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

#include "dlqg/dual_solver.hpp"
#include "dlqg/errors.hpp"
#include "dlqg/io.hpp"
#include "dlqg/synthesis.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace dlqg {
namespace {

std::string bundled() { return io::read_file(testing::source_path("data/two_player.json")); }

void expect_same_instance(const ProblemInstance& a, const ProblemInstance& b) {
    EXPECT_EQ(a.system.node_count(), b.system.node_count());
    EXPECT_EQ(a.system.A(), b.system.A());
    EXPECT_EQ(a.system.B(), b.system.B());
    EXPECT_EQ(a.system.sigma_x(), b.system.sigma_x());
    EXPECT_EQ(a.system.sigma_w(), b.system.sigma_w());
    EXPECT_EQ(a.cost.Q(), b.cost.Q());
    EXPECT_EQ(a.cost.Q_T(), b.cost.Q_T());
    EXPECT_EQ(a.cost.horizon(), b.cost.horizon());
    ASSERT_EQ(a.constraints.size(), b.constraints.size());
    for (std::size_t i = 0; i < a.constraints.size(); ++i) {
        EXPECT_EQ(a.constraints[i].W, b.constraints[i].W);
        EXPECT_EQ(a.constraints[i].budgets, b.constraints[i].budgets);
    }
}

TEST(Problem, RoundTripIsBitExact) {
    const ProblemInstance p = io::parse_problem(bundled());
    const std::string once = io::emit_problem(p);
    const ProblemInstance q = io::parse_problem(once);
    expect_same_instance(p, q);
    EXPECT_EQ(io::emit_problem(q), once);
}

TEST(Problem, RoundTripKeepsAwkwardDoubles) {
    testing::Rng rng(3);
    const ProblemInstance p = testing::coupled_pair(2, {{testing::random_psd(rng, 4), {0.1 + 1e-17, 1.0 / 3.0}}});
    const ProblemInstance q = io::parse_problem(io::emit_problem(p));
    expect_same_instance(p, q);
}

TEST(Problem, UnknownKeyIsRejected) {
    std::string text = bundled();
    text.insert(text.find('{') + 1, "\"colour\": 1, ");
    try {
        io::parse_problem(text);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
    }
}

TEST(Problem, MissingKeyAndWrongShape) {
    std::string text = bundled();
    const auto pos = text.find("\"Sigma_w\"");
    std::string missing = text;
    missing.replace(pos, 2, "\"X");
    EXPECT_THROW(io::parse_problem(missing), SchemaError);
    std::string shape = text;
    shape.replace(text.find("[0.4, 0.4, 0.4, 0.4]"), 20, "[0.4, 0.4, 0.4]");
    EXPECT_THROW(io::parse_problem(shape), SchemaError);
}

TEST(Problem, MalformedJsonReportsPosition) {
    try {
        io::parse_problem("{\n  \"nodes\": 1,\n  \"edges\": [,]\n}");
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("line 3"), std::string::npos) << what;
        EXPECT_NE(what.find("column"), std::string::npos) << what;
    }
}

TEST(Problem, MissingFileIsIoError) {
    EXPECT_THROW(io::load_problem("/nonexistent/problem.json"), IoError);
}

TEST(Certificate, RoundTrip) {
    const ProblemInstance p = io::parse_problem(bundled());
    const DualCertificate c = solve_dual(p);
    const std::string text = io::emit_certificate(c);
    const DualCertificate d = io::parse_certificate(text, p);
    ASSERT_EQ(d.S.size(), c.S.size());
    for (std::size_t k = 0; k < c.S.size(); ++k) EXPECT_EQ(d.S[k], c.S[k]);
    EXPECT_EQ(d.tau.values(), c.tau.values());
    EXPECT_EQ(d.dual_value, c.dual_value);
    EXPECT_EQ(d.iterations, c.iterations);
    EXPECT_EQ(d.converged, c.converged);
    EXPECT_EQ(d.decomposed_dual_value, c.decomposed_dual_value);
    EXPECT_EQ(io::emit_certificate(d), text);

    // Gains derived from the loaded certificate are the same.
    const SynthesisResult a = synthesize(p, c);
    const SynthesisResult b = synthesize(p, d);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(a.gains.L0[static_cast<std::size_t>(k)], b.gains.L0[static_cast<std::size_t>(k)]);
}

TEST(Certificate, WrongHorizonIsRejected) {
    const ProblemInstance p = io::parse_problem(bundled());
    const std::string text = io::emit_certificate(solve_dual(p));
    EXPECT_THROW(io::parse_certificate(text, testing::coupled_pair(2)), Error);
}

TEST(Gains, RoundTripAndCsv) {
    const ProblemInstance p = io::parse_problem(bundled());
    const SynthesisResult s = synthesize(p, solve_dual(p));
    const GainSchedule g = io::parse_gains(io::emit_gains(s.gains), p);
    ASSERT_EQ(g.horizon(), 4);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(g.L0[k], s.gains.L0[k]);
        EXPECT_EQ(g.L1[k], s.gains.L1[k]);
        EXPECT_EQ(g.L2[k], s.gains.L2[k]);
    }
    const std::string csv = io::gains_csv(s.gains);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,gain,row,col,value");
    // Four entries of L0 plus one each of L1 and L2 per stage.
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 6);
}

TEST(Files, WriteThenRead) {
    const auto path = std::filesystem::temp_directory_path() / "dlqg_io_test.txt";
    io::write_file(path, "abc\n");
    EXPECT_EQ(io::read_file(path), "abc\n");
    std::filesystem::remove(path);
    EXPECT_THROW(io::write_file("/nonexistent/dir/x.txt", "x"), IoError);
}

}  // namespace
}  // namespace dlqg
