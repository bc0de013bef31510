// Copyright 2026 The covplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef COVPLAN_COMMS_HPP_
#define COVPLAN_COMMS_HPP_

#include <cstddef>
#include <limits>
#include <vector>

#include "covplan/matrix.hpp"
#include "covplan/world.hpp"

namespace covplan {

// Symmetric 0/1 adjacency with zero diagonal. Robots i != j are linked iff
// the Euclidean distance between their cells is <= comm_range.
struct CommGraph {
  Matrix adjacency;
  std::vector<Cell> positions;
  double comm_range = 0.0;

  std::size_t size() const { return adjacency.rows(); }
  bool connected(std::size_t i, std::size_t j) const { return adjacency(i, j) != 0.0; }
  // Ascending robot indices adjacent to i.
  std::vector<std::size_t> neighbors(std::size_t i) const;
};

struct GraphShift {
  Matrix shift;
  // Upper bound on the adjacency spectral radius used for scaling.
  double spectral_radius = 0.0;

  std::size_t size() const { return shift.rows(); }
};

CommGraph build_graph(const RobotState& robots, double comm_range);

// Upper bound on the spectral radius of a nonnegative symmetric matrix,
// from power iteration on (A + I) with the Collatz-Wielandt bound. Iterates
// until the bound and the Rayleigh quotient agree to `rel_tol`.
double spectral_radius_bound(const Matrix& adjacency, double rel_tol = 1e-6,
                             int max_iterations = 100000);

// S = A / max(1, lambda_max(A)).
GraphShift normalize(const CommGraph& graph, double rel_tol = 1e-6);

// [S^0 X, S^1 X, ..., S^K X]. Each additional power is one synchronous
// neighbour exchange. Throws std::invalid_argument on a row-count mismatch.
std::vector<Matrix> exchange(const Matrix& features, const Matrix& shift, std::size_t hops);
std::vector<Matrix> exchange(const Matrix& features, const GraphShift& shift, std::size_t hops);

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

// Breadth-first hop counts from `source`; kUnreachable for other components.
std::vector<std::size_t> hop_distances(const CommGraph& graph, std::size_t source);

}  // namespace covplan

#endif  // COVPLAN_COMMS_HPP_
