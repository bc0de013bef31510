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

#ifndef COVPLAN_PARALLEL_HPP_
#define COVPLAN_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace covplan {

// Number of worker threads to use when a caller passes jobs == 0.
std::size_t default_jobs();

// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
// processed exactly once; callers write results by index so the outcome does
// not depend on scheduling. The first exception thrown by any body is
// rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body);

}  // namespace covplan

#endif  // COVPLAN_PARALLEL_HPP_
