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

// Delay-induced information structure. Node i learns x_n(t) after d_ni
// steps, so its information set at time k holds x_n(0 : k - d_ni) for every
// node n. The structure is partially nested iff d_ni <= d_nj + d_ji + 1 for
// all triples, which the triangle inequality guarantees on any connected
// undirected graph.

#pragma once

#include "dlqg/model.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace dlqg {

/// Hop distances d(i, j). Any N x N table of non-negative integers can be
/// wrapped; all_pairs_distances produces the shortest-path one.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::vector<std::vector<int>> table);

    int size() const noexcept { return size_; }
    int operator()(int i, int j) const {
        return values_[static_cast<std::size_t>(i * size_ + j)];
    }

private:
    int size_;
    std::vector<int> values_;
};

/// BFS from every node.
DistanceMatrix all_pairs_distances(const InterconnectionGraph& graph);

struct NodeTriple {
    int n = 0;
    int j = 0;
    int i = 0;

    bool operator==(const NodeTriple&) const = default;
};

struct NestednessReport {
    bool passed = true;
    /// Pairwise-distinct triples with d_ni == d_nj + d_ji.
    std::vector<NodeTriple> binding;
    /// First triple with d_ni > d_nj + d_ji + 1, if any.
    std::optional<NodeTriple> violation;
    std::size_t triples_checked = 0;
};

/// Exhaustive O(N^3) check of d_ni <= d_nj + d_ji + 1.
NestednessReport check_partial_nestedness(const InterconnectionGraph& graph);
NestednessReport check_partial_nestedness(const DistanceMatrix& distances);

/// What node `node` knows at time `time`: for every n the newest state
/// timestamp k - d_ni and input timestamp k - d_ni - 1 (negative means
/// nothing received yet).
struct InformationSetDescriptor {
    int node = 0;
    int time = 0;
    std::vector<int> state_horizon;
    std::vector<int> input_horizon;
};

InformationSetDescriptor information_set(const InterconnectionGraph& graph, int node, int time);

/// Newest timestamp of the data shared by both players at time k, i.e. the
/// coordinator knows x(0:k-1), u(0:k-1). Returns -1 at k = 0.
/// Throws Unsupported for more than two nodes.
int common_information_horizon(const InterconnectionGraph& graph, int k);

}  // namespace dlqg
