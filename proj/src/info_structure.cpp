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

#include "dlqg/info_structure.hpp"

#include "dlqg/errors.hpp"

#include <queue>
#include <string>

namespace dlqg {

DistanceMatrix::DistanceMatrix(std::vector<std::vector<int>> table)
    : size_(static_cast<int>(table.size())) {
    values_.reserve(table.size() * table.size());
    for (const auto& row : table) {
        if (row.size() != table.size()) {
            throw DimensionMismatch("distance table must be square");
        }
        for (int d : row) {
            if (d < 0) {
                throw GraphError("distance table holds a negative entry");
            }
            values_.push_back(d);
        }
    }
}

DistanceMatrix all_pairs_distances(const InterconnectionGraph& graph) {
    const int N = graph.node_count();
    std::vector<std::vector<int>> table(static_cast<std::size_t>(N),
                                        std::vector<int>(static_cast<std::size_t>(N), -1));
    for (int source = 0; source < N; ++source) {
        auto& row = table[static_cast<std::size_t>(source)];
        std::queue<int> frontier;
        row[static_cast<std::size_t>(source)] = 0;
        frontier.push(source);
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop();
            for (int w : graph.neighbors(v)) {
                if (row[static_cast<std::size_t>(w)] < 0) {
                    row[static_cast<std::size_t>(w)] = row[static_cast<std::size_t>(v)] + 1;
                    frontier.push(w);
                }
            }
        }
        for (int d : row) {
            if (d < 0) {
                // InterconnectionGraph rejects disconnected input already.
                throw GraphError("graph is disconnected");
            }
        }
    }
    return DistanceMatrix(std::move(table));
}

NestednessReport check_partial_nestedness(const DistanceMatrix& d) {
    NestednessReport report;
    const int N = d.size();
    for (int n = 0; n < N; ++n) {
        for (int j = 0; j < N; ++j) {
            for (int i = 0; i < N; ++i) {
                ++report.triples_checked;
                const int direct = d(n, i);
                const int relayed = d(n, j) + d(j, i);
                if (direct > relayed + 1) {
                    report.passed = false;
                    report.violation = NodeTriple{n, j, i};
                    return report;
                }
                if (direct == relayed && n != j && j != i && n != i) {
                    report.binding.push_back({n, j, i});
                }
            }
        }
    }
    return report;
}

NestednessReport check_partial_nestedness(const InterconnectionGraph& graph) {
    return check_partial_nestedness(all_pairs_distances(graph));
}

InformationSetDescriptor information_set(const InterconnectionGraph& graph, int node, int time) {
    if (node < 0 || node >= graph.node_count()) {
        throw GraphError("node " + std::to_string(node) + " out of range");
    }
    const DistanceMatrix d = all_pairs_distances(graph);
    InformationSetDescriptor out;
    out.node = node;
    out.time = time;
    for (int n = 0; n < graph.node_count(); ++n) {
        out.state_horizon.push_back(time - d(n, node));
        out.input_horizon.push_back(time - d(n, node) - 1);
    }
    return out;
}

int common_information_horizon(const InterconnectionGraph& graph, int k) {
    if (graph.node_count() > 2) {
        throw Unsupported("the coordinator decomposition is implemented for at most two players");
    }
    if (k < 0) {
        throw InvalidInstance("time index must be non-negative");
    }
    return k - 1;
}

}  // namespace dlqg
