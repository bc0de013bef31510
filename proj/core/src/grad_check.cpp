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
#include "covplan/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "covplan/rng.hpp"

namespace covplan::nn {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << "grad-check: checked=" << checked << " kinks_excluded=" << kinks_excluded
     << " max_rel_err=" << max_rel_error << " tolerance=" << tolerance
     << (passed() ? " PASS" : " FAIL");
  for (const auto& e : worst) {
    os << "\n  " << e.probe << "[" << e.index << "] analytic=" << e.analytic
       << " numeric=" << e.numeric << " rel_err=" << e.rel_error;
  }
  return os.str();
}

GradCheckReport grad_check(std::span<const Probe> probes,
                           const std::function<Evaluation(bool)>& objective,
                           const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  const Evaluation base = objective(true);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(probes.size());
  for (const Probe& p : probes) analytic.emplace_back(p.analytic.begin(), p.analytic.end());

  Rng rng(options.seed);
  std::vector<GradCheckEntry> entries;
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    const Probe& probe = probes[pi];
    std::vector<std::size_t> idx(probe.values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.size() > options.samples_per_probe) {
      for (std::size_t i = 0; i < options.samples_per_probe; ++i) {
        std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
      }
      idx.resize(options.samples_per_probe);
      std::sort(idx.begin(), idx.end());
    }
    for (std::size_t i : idx) {
      const double original = probe.values[i];
      probe.values[i] = original + options.epsilon;
      const Evaluation plus = objective(false);
      probe.values[i] = original - options.epsilon;
      const Evaluation minus = objective(false);
      probe.values[i] = original;
      if (plus.signature != base.signature || minus.signature != base.signature) {
        ++report.kinks_excluded;
        continue;
      }
      const double numeric = (plus.loss - minus.loss) / (2.0 * options.epsilon);
      const double a = analytic[pi][i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      report.max_rel_error = std::max(report.max_rel_error, rel);
      entries.push_back({probe.name, i, a, numeric, rel});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const GradCheckEntry& x, const GradCheckEntry& y) { return x.rel_error > y.rel_error; });
  if (entries.size() > options.keep_worst) entries.resize(options.keep_worst);
  report.worst = std::move(entries);
  return report;
}

}  // namespace covplan::nn
