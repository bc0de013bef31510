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
#include "covplan/comms.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace covplan {

std::vector<std::size_t> CommGraph::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j) {
    if (j != i && connected(i, j)) out.push_back(j);
  }
  return out;
}

CommGraph build_graph(const RobotState& robots, double comm_range) {
  const std::size_t n = robots.size();
  CommGraph graph;
  graph.adjacency = Matrix(n, n);
  graph.positions = robots.positions;
  graph.comm_range = comm_range;
  const double r2 = comm_range * comm_range;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = robots.positions[i].x - robots.positions[j].x;
      const double dy = robots.positions[i].y - robots.positions[j].y;
      if (dx * dx + dy * dy <= r2) {
        graph.adjacency(i, j) = 1.0;
        graph.adjacency(j, i) = 1.0;
      }
    }
  }
  return graph;
}

double spectral_radius_bound(const Matrix& adjacency, double rel_tol, int max_iterations) {
  const std::size_t n = adjacency.rows();
  if (n == 0) return 0.0;
  std::vector<double> x(n, 1.0);
  std::vector<double> y(n, 0.0);
  double upper = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    // y = (A + I) x
    for (std::size_t i = 0; i < n; ++i) {
      double acc = x[i];
      const auto row = adjacency.row(i);
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
      y[i] = acc;
    }
    upper = 0.0;
    double xy = 0.0;
    double xx = 0.0;
    double ymax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] > 0.0) upper = std::max(upper, y[i] / x[i]);
      xy += x[i] * y[i];
      xx += x[i] * x[i];
      ymax = std::max(ymax, y[i]);
    }
    const double rayleigh = xy / xx;
    const double lambda = upper - 1.0;
    if (upper - rayleigh <= rel_tol * std::max(lambda, 1.0)) break;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ymax;
  }
  return std::max(upper - 1.0, 0.0);
}

GraphShift normalize(const CommGraph& graph, double rel_tol) {
  GraphShift out;
  out.spectral_radius = spectral_radius_bound(graph.adjacency, rel_tol);
  const double scale = 1.0 / std::max(1.0, out.spectral_radius);
  out.shift = graph.adjacency;
  for (double& v : out.shift.data()) v *= scale;
  return out;
}

std::vector<Matrix> exchange(const Matrix& features, const Matrix& shift, std::size_t hops) {
  if (shift.rows() != shift.cols()) throw std::invalid_argument("exchange: shift must be square");
  if (features.rows() != shift.rows()) {
    throw std::invalid_argument("exchange: feature rows (" + std::to_string(features.rows()) +
                                ") differ from robot count (" + std::to_string(shift.rows()) + ")");
  }
  std::vector<Matrix> out;
  out.reserve(hops + 1);
  out.push_back(features);
  for (std::size_t k = 1; k <= hops; ++k) out.push_back(multiply(shift, out.back()));
  return out;
}

std::vector<Matrix> exchange(const Matrix& features, const GraphShift& shift, std::size_t hops) {
  return exchange(features, shift.shift, hops);
}

std::vector<std::size_t> hop_distances(const CommGraph& graph, std::size_t source) {
  std::vector<std::size_t> dist(graph.size(), kUnreachable);
  std::deque<std::size_t> queue;
  dist[source] = 0;
  queue.push_back(source);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < graph.size(); ++v) {
      if (v != u && graph.connected(u, v) && dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace covplan
