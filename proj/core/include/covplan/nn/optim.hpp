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
#ifndef COVPLAN_NN_OPTIM_HPP_
#define COVPLAN_NN_OPTIM_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "covplan/nn/tensor.hpp"

namespace covplan::nn {

template <typename T>
void zero_grads(const std::vector<NamedParam<T>>& params) {
  for (const auto& p : params) p.tensor->zero_grad();
}

template <typename T>
class Sgd {
 public:
  explicit Sgd(double lr, double momentum = 0.0) : lr_(lr), momentum_(momentum) {}

  void step(const std::vector<NamedParam<T>>& params) {
    if (velocity_.empty()) {
      for (const auto& p : params) velocity_.emplace_back(p.tensor->size(), 0.0);
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
      Tensor<T>& t = *params[k].tensor;
      for (std::size_t i = 0; i < t.size(); ++i) {
        velocity_[k][i] = momentum_ * velocity_[k][i] + t.grad()[i];
        t[i] = static_cast<T>(t[i] - lr_ * velocity_[k][i]);
      }
    }
  }

 private:
  double lr_;
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

template <typename T>
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<NamedParam<T>>& params) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.tensor->size(), 0.0);
        v_.emplace_back(p.tensor->size(), 0.0);
      }
    }
    if (m_.size() != params.size()) throw std::logic_error("adam: parameter list changed");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Tensor<T>& t = *params[k].tensor;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double g = t.grad()[i];
        m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
        v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
        const double mhat = m_[k][i] / c1;
        const double vhat = v_[k][i] / c2;
        t[i] = static_cast<T>(t[i] - lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace covplan::nn

#endif  // COVPLAN_NN_OPTIM_HPP_
