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
#ifndef COVPLAN_NN_GRAD_CHECK_HPP_
#define COVPLAN_NN_GRAD_CHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "covplan/nn/tensor.hpp"

namespace covplan::nn {

struct GradCheckOptions {
  double epsilon = 1e-6;
  double tolerance = 1e-4;
  // Coordinates sampled per probe; probes at most this large are checked in full.
  std::size_t samples_per_probe = 24;
  std::uint64_t seed = 1;
  double denominator_floor = 1e-8;
  std::size_t keep_worst = 5;
};

struct GradCheckEntry {
  std::string probe;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t kinks_excluded = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::vector<GradCheckEntry> worst;  // descending rel_error
  bool passed() const { return max_rel_error < tolerance && checked > 0; }
  std::string summary() const;
};

// One perturbable array and the analytic gradient the objective writes for it.
struct Probe {
  std::string name;
  std::span<double> values;
  std::span<const double> analytic;
};

struct Evaluation {
  double loss = 0.0;
  // Activation-pattern signature; a change under perturbation marks a kink.
  std::uint64_t signature = 0;
};

// Central-difference check. objective(true) must zero and then fill every
// probe's analytic gradient; objective(false) only evaluates. The relative
// error of a coordinate is |a - fd| / max(|a|, |fd|, floor); coordinates whose
// +/-epsilon evaluations change the activation signature are excluded.
GradCheckReport grad_check(std::span<const Probe> probes,
                           const std::function<Evaluation(bool with_backward)>& objective,
                           const GradCheckOptions& options = {});

inline std::vector<Probe> probes_from(const std::vector<NamedParam<double>>& params) {
  std::vector<Probe> out;
  for (const auto& p : params) out.push_back({p.name, p.tensor->data(), p.tensor->grad()});
  return out;
}

}  // namespace covplan::nn

#endif  // COVPLAN_NN_GRAD_CHECK_HPP_
