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
#ifndef COVPLAN_GRAD_SUITE_HPP_
#define COVPLAN_GRAD_SUITE_HPP_

#include <string>
#include <vector>

#include "covplan/nn/grad_check.hpp"

namespace covplan {

struct GradSuiteEntry {
  std::string name;
  nn::GradCheckReport report;
};

// Float64 central-difference checks of every layer, every loss, the full
// planner, the map predictor and the composed predictor -> planner chain, on
// small seeded inputs. Layers are checked w.r.t. parameters and input.
std::vector<GradSuiteEntry> run_grad_suite(const nn::GradCheckOptions& options = {});

bool all_passed(const std::vector<GradSuiteEntry>& entries);
double max_rel_error(const std::vector<GradSuiteEntry>& entries);

}  // namespace covplan

#endif  // COVPLAN_GRAD_SUITE_HPP_
