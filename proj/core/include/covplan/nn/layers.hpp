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
#ifndef COVPLAN_NN_LAYERS_HPP_
#define COVPLAN_NN_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "covplan/matrix.hpp"
#include "covplan/nn/tensor.hpp"
#include "covplan/rng.hpp"

namespace covplan::nn {

// Forward caches whatever backward needs; backward accumulates parameter
// gradients and returns the gradient with respect to the forward input.
// One forward must precede each backward.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string describe() const = 0;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<NamedParam<T>> params(const std::string& /*prefix*/) { return {}; }
  virtual void init(Rng& /*rng*/) {}
  virtual void signature(Signature& /*sig*/) const {}
};

namespace detail {

inline void require_rank(const char* op, const Shape& shape, std::size_t rank) {
  if (shape.size() != rank) {
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) +
                                " input, got " + shape_string(shape));
  }
}

inline void require_dim(const char* op, const char* what, std::size_t got, std::size_t want) {
  if (got != want) {
    throw std::invalid_argument(std::string(op) + ": " + what + " dimension is " +
                                std::to_string(got) + ", expected " + std::to_string(want));
  }
}

// Kaiming-uniform for ReLU networks: U(-sqrt(6/fan_in), sqrt(6/fan_in)).
template <typename T>
void kaiming_uniform(Tensor<T>& t, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (T& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

inline std::uint64_t pack_bits(std::span<const unsigned char> bits, std::size_t start) {
  std::uint64_t w = 0;
  for (std::size_t b = 0; b < 64 && start + b < bits.size(); ++b) {
    w |= static_cast<std::uint64_t>(bits[start + b] != 0) << b;
  }
  return w;
}

}  // namespace detail

// 2-D cross-correlation over [B, C, H, W] with square kernels and zero padding.
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
         std::size_t stride = 1, std::size_t padding = 0)
      : in_(in_channels), out_(out_channels), k_(kernel), s_(stride), p_(padding),
        weight_({out_channels, in_channels, kernel, kernel}), bias_({out_channels}) {
    if (in_ == 0 || out_ == 0 || k_ == 0 || s_ == 0) {
      throw std::invalid_argument("conv2d: channels, kernel and stride must be positive");
    }
    weight_.enable_grad();
    bias_.enable_grad();
  }

  std::string describe() const override {
    return "conv2d(" + std::to_string(in_) + "," + std::to_string(out_) + ",k" +
           std::to_string(k_) + ",s" + std::to_string(s_) + ",p" + std::to_string(p_) + ")";
  }

  void init(Rng& rng) override {
    detail::kaiming_uniform(weight_, in_ * k_ * k_, rng);
    std::fill(bias_.data().begin(), bias_.data().end(), T(0));
  }

  std::vector<NamedParam<T>> params(const std::string& prefix) override {
    return {{prefix + ".weight", &weight_}, {prefix + ".bias", &bias_}};
  }

  // Disables the input-gradient computation for layers fed by constants.
  void set_input_grad(bool enabled) { input_grad_ = enabled; }

  std::size_t output_extent(std::size_t extent, const char* which) const {
    if (extent + 2 * p_ < k_) {
      throw std::invalid_argument("conv2d: input " + std::string(which) + " " +
                                  std::to_string(extent) + " is smaller than kernel " +
                                  std::to_string(k_) + " with padding " + std::to_string(p_));
    }
    return (extent + 2 * p_ - k_) / s_ + 1;
  }

  // Accumulation runs in T over an im2col buffer [in*k*k, oh*ow], so every
  // inner loop is a unit-stride pass over a whole output plane.
  Tensor<T> forward(const Tensor<T>& x, Mode /*mode*/) override {
    detail::require_rank("conv2d", x.shape(), 4);
    detail::require_dim("conv2d", "input channel", x.dim(1), in_);
    const std::size_t batch = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = output_extent(h, "height"), ow = output_extent(w, "width");
    const std::size_t plane = oh * ow, rows = in_ * k_ * k_;
    input_ = x;
    Tensor<T> y({batch, out_, oh, ow});
    for (std::size_t b = 0; b < batch; ++b) {
      im2col(x, b, oh, ow);
      for (std::size_t o = 0; o < out_; ++o) {
        T* dst = y.ptr() + (b * out_ + o) * plane;
        std::fill(dst, dst + plane, bias_[o]);
        const T* wrow = weight_.ptr() + o * rows;
        for (std::size_t r = 0; r < rows; ++r) axpy(wrow[r], cols_.data() + r * plane, dst, plane);
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const Tensor<T>& x = input_;
    const std::size_t batch = x.dim(0);
    const std::size_t oh = grad_out.dim(2), ow = grad_out.dim(3);
    const std::size_t plane = oh * ow, rows = in_ * k_ * k_;
    Tensor<T> grad_in(x.shape());
    std::vector<T> dcols(input_grad_ ? rows * plane : 0);
    for (std::size_t b = 0; b < batch; ++b) {
      im2col(x, b, oh, ow);
      if (input_grad_) std::fill(dcols.begin(), dcols.end(), T(0));
      for (std::size_t o = 0; o < out_; ++o) {
        const T* g = grad_out.ptr() + (b * out_ + o) * plane;
        bias_.grad()[o] += dot(g, nullptr, plane);
        const T* wrow = weight_.ptr() + o * rows;
        T* dwrow = weight_.grad().data() + o * rows;
        for (std::size_t r = 0; r < rows; ++r) {
          dwrow[r] += dot(g, cols_.data() + r * plane, plane);
          if (input_grad_) axpy(wrow[r], g, dcols.data() + r * plane, plane);
        }
      }
      if (input_grad_) col2im(dcols, grad_in, b, oh, ow);
    }
    return grad_in;
  }

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }
  std::size_t out_channels() const { return out_; }

 private:
  // Input column ox*s + kw - pad for an output column, or -1 when padded.
  std::ptrdiff_t source_column(std::size_t ox, std::size_t kw, std::size_t w) const {
    const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * s_ + kw) - static_cast<std::ptrdiff_t>(p_);
    return ix >= 0 && ix < static_cast<std::ptrdiff_t>(w) ? ix : -1;
  }

  void im2col(const Tensor<T>& x, std::size_t b, std::size_t oh, std::size_t ow) {
    const std::size_t h = x.dim(2), w = x.dim(3), plane = oh * ow;
    cols_.assign(in_ * k_ * k_ * plane, T(0));
    for (std::size_t c = 0; c < in_; ++c) {
      const T* src = x.ptr() + ((b * in_ + c) * h) * w;
      for (std::size_t kh = 0; kh < k_; ++kh) {
        for (std::size_t kw = 0; kw < k_; ++kw) {
          T* dst = cols_.data() + ((c * k_ + kh) * k_ + kw) * plane;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s_ + kh) - static_cast<std::ptrdiff_t>(p_);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            const T* row = src + static_cast<std::size_t>(iy) * w;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const std::ptrdiff_t ix = source_column(ox, kw, w);
              if (ix >= 0) dst[oy * ow + ox] = row[ix];
            }
          }
        }
      }
    }
  }

  void col2im(const std::vector<T>& dcols, Tensor<T>& grad_in, std::size_t b, std::size_t oh,
              std::size_t ow) const {
    const std::size_t h = grad_in.dim(2), w = grad_in.dim(3), plane = oh * ow;
    for (std::size_t c = 0; c < in_; ++c) {
      T* dst = grad_in.ptr() + ((b * in_ + c) * h) * w;
      for (std::size_t kh = 0; kh < k_; ++kh) {
        for (std::size_t kw = 0; kw < k_; ++kw) {
          const T* src = dcols.data() + ((c * k_ + kh) * k_ + kw) * plane;
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * s_ + kh) - static_cast<std::ptrdiff_t>(p_);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            T* row = dst + static_cast<std::size_t>(iy) * w;
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const std::ptrdiff_t ix = source_column(ox, kw, w);
              if (ix >= 0) row[ix] += src[oy * ow + ox];
            }
          }
        }
      }
    }
  }

  static void axpy(T a, const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
  }

  // Sum of a[i] * b[i] (or of a[i] when b is null) with fixed-width partial sums.
  static T dot(const T* a, const T* b, std::size_t n) {
    T part[8] = {};
    std::size_t i = 0;
    if (b) {
      for (; i + 8 <= n; i += 8)
        for (std::size_t j = 0; j < 8; ++j) part[j] += a[i + j] * b[i + j];
    } else {
      for (; i + 8 <= n; i += 8)
        for (std::size_t j = 0; j < 8; ++j) part[j] += a[i + j];
    }
    T s = T(0);
    for (; i < n; ++i) s += b ? a[i] * b[i] : a[i];
    for (T v : part) s += v;
    return s;
  }

  std::size_t in_, out_, k_, s_, p_;
  Tensor<T> weight_;
  Tensor<T> bias_;
  Tensor<T> input_;
  std::vector<T> cols_;
  bool input_grad_ = true;
};

// Max pooling over [B, C, H, W]; backward routes gradient to the first
// maximal element of each window.
template <typename T>
class MaxPool2d final : public Layer<T> {
 public:
  explicit MaxPool2d(std::size_t kernel = 2, std::size_t stride = 2) : k_(kernel), s_(stride) {
    if (k_ == 0 || s_ == 0) throw std::invalid_argument("maxpool: kernel and stride must be positive");
  }

  std::string describe() const override {
    return "maxpool(k" + std::to_string(k_) + ",s" + std::to_string(s_) + ")";
  }

  Tensor<T> forward(const Tensor<T>& x, Mode /*mode*/) override {
    detail::require_rank("maxpool", x.shape(), 4);
    const std::size_t batch = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h < k_ || w < k_) {
      throw std::invalid_argument("maxpool: input " + shape_string(x.shape()) +
                                  " smaller than kernel " + std::to_string(k_));
    }
    const std::size_t oh = (h - k_) / s_ + 1, ow = (w - k_) / s_ + 1;
    input_shape_ = x.shape();
    Tensor<T> y({batch, ch, oh, ow});
    argmax_.assign(y.size(), 0);
    std::size_t out_idx = 0;
    for (std::size_t bc = 0; bc < batch * ch; ++bc) {
      const std::size_t base = bc * h * w;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox, ++out_idx) {
          std::size_t best = base + (oy * s_) * w + ox * s_;
          for (std::size_t ky = 0; ky < k_; ++ky) {
            for (std::size_t kx = 0; kx < k_; ++kx) {
              const std::size_t idx = base + (oy * s_ + ky) * w + ox * s_ + kx;
              if (x[idx] > x[best]) best = idx;
            }
          }
          argmax_[out_idx] = best;
          y[out_idx] = x[best];
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> grad_in(input_shape_);
    for (std::size_t i = 0; i < argmax_.size(); ++i) grad_in[argmax_[i]] += grad_out[i];
    return grad_in;
  }

  void signature(Signature& sig) const override {
    for (std::size_t idx : argmax_) sig.add(idx);
  }

 private:
  std::size_t k_, s_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  std::string describe() const override { return "relu"; }

  Tensor<T> forward(const Tensor<T>& x, Mode /*mode*/) override {
    Tensor<T> y(x.shape());
    mask_.assign(x.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] > T(0)) {
        mask_[i] = 1;
        y[i] = x[i];
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> grad_in(grad_out.shape());
    for (std::size_t i = 0; i < mask_.size(); ++i) {
      if (mask_[i]) grad_in[i] = grad_out[i];
    }
    return grad_in;
  }

  void signature(Signature& sig) const override {
    for (std::size_t i = 0; i < mask_.size(); i += 64) sig.add(detail::pack_bits(mask_, i));
  }

 private:
  std::vector<unsigned char> mask_;
};

// Fully connected layer over [B, in].
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features)
      : in_(in_features), out_(out_features), weight_({out_features, in_features}),
        bias_({out_features}) {
    if (in_ == 0 || out_ == 0) throw std::invalid_argument("dense: widths must be positive");
    weight_.enable_grad();
    bias_.enable_grad();
  }

  std::string describe() const override {
    return "dense(" + std::to_string(in_) + "," + std::to_string(out_) + ")";
  }

  void init(Rng& rng) override {
    detail::kaiming_uniform(weight_, in_, rng);
    std::fill(bias_.data().begin(), bias_.data().end(), T(0));
  }

  std::vector<NamedParam<T>> params(const std::string& prefix) override {
    return {{prefix + ".weight", &weight_}, {prefix + ".bias", &bias_}};
  }

  Tensor<T> forward(const Tensor<T>& x, Mode /*mode*/) override {
    detail::require_rank("dense", x.shape(), 2);
    detail::require_dim("dense", "input feature", x.dim(1), in_);
    input_ = x;
    const std::size_t batch = x.dim(0);
    Tensor<T> y({batch, out_});
    for (std::size_t b = 0; b < batch; ++b) {
      const T* xr = x.ptr() + b * in_;
      for (std::size_t o = 0; o < out_; ++o) {
        const T* wr = weight_.ptr() + o * in_;
        double acc = bias_[o];
        for (std::size_t i = 0; i < in_; ++i) acc += static_cast<double>(wr[i]) * xr[i];
        y[b * out_ + o] = static_cast<T>(acc);
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const std::size_t batch = input_.dim(0);
    Tensor<T> grad_in({batch, in_});
    std::vector<double> dx(in_);
    for (std::size_t o = 0; o < out_; ++o) {
      double db = 0.0;
      for (std::size_t b = 0; b < batch; ++b) db += grad_out[b * out_ + o];
      bias_.grad()[o] += static_cast<T>(db);
      T* dw = weight_.grad().data() + o * in_;
      for (std::size_t i = 0; i < in_; ++i) {
        double acc = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          acc += static_cast<double>(grad_out[b * out_ + o]) * input_[b * in_ + i];
        }
        dw[i] += static_cast<T>(acc);
      }
    }
    for (std::size_t b = 0; b < batch; ++b) {
      std::fill(dx.begin(), dx.end(), 0.0);
      for (std::size_t o = 0; o < out_; ++o) {
        const double g = grad_out[b * out_ + o];
        const T* wr = weight_.ptr() + o * in_;
        for (std::size_t i = 0; i < in_; ++i) dx[i] += g * wr[i];
      }
      for (std::size_t i = 0; i < in_; ++i) grad_in[b * in_ + i] = static_cast<T>(dx[i]);
    }
    return grad_in;
  }

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Tensor<T> weight_;
  Tensor<T> bias_;
  Tensor<T> input_;
};

// Inverted dropout: scales kept units by 1/(1-p) in training, identity in eval.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  }

  std::string describe() const override { return "dropout(" + std::to_string(rate_) + ")"; }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
    train_ = mode == Mode::Train && rate_ > 0.0;
    if (!train_) return x;
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    mask_.assign(x.size(), T(0));
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!rng_.bernoulli(rate_)) {
        mask_[i] = keep_scale;
        y[i] = x[i] * keep_scale;
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    if (!train_) return grad_out;
    Tensor<T> grad_in(grad_out.shape());
    for (std::size_t i = 0; i < mask_.size(); ++i) grad_in[i] = grad_out[i] * mask_[i];
    return grad_in;
  }

  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

 private:
  double rate_;
  Rng rng_;
  bool train_ = false;
  std::vector<T> mask_;
};

// [B, ...] -> [B, prod(...)].
template <typename T>
class Flatten final : public Layer<T> {
 public:
  std::string describe() const override { return "flatten"; }

  Tensor<T> forward(const Tensor<T>& x, Mode /*mode*/) override {
    if (x.rank() < 1) throw std::invalid_argument("flatten: scalar input");
    input_shape_ = x.shape();
    return x.reshaped({x.dim(0), x.size() / std::max<std::size_t>(x.dim(0), 1)});
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override { return grad_out.reshaped(input_shape_); }

 private:
  Shape input_shape_;
};

template <typename T>
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> h = x;
    for (auto& layer : layers_) h = layer->forward(h, mode);
    return h;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    Tensor<T> g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
    return g;
  }

  std::vector<NamedParam<T>> params(const std::string& prefix) {
    std::vector<NamedParam<T>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      for (auto& p : layers_[i]->params(prefix + "." + std::to_string(i))) out.push_back(p);
    }
    return out;
  }

  void init(Rng& rng) {
    for (auto& layer : layers_) layer->init(rng);
  }

  void signature(Signature& sig) const {
    for (const auto& layer : layers_) layer->signature(sig);
  }

  std::string describe() const {
    std::string s;
    for (const auto& layer : layers_) s += layer->describe() + ";";
    return s;
  }

  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// Polynomial graph filter Y = sum_k S^k X H_k + b over node features [N, in].
// Each power of S is one neighbour exchange, so K taps need K rounds.
template <typename T>
class GraphConv {
 public:
  GraphConv(std::size_t in_features, std::size_t out_features, std::size_t hops)
      : in_(in_features), out_(out_features), hops_(hops), bias_({out_features}) {
    if (in_ == 0 || out_ == 0) throw std::invalid_argument("graphconv: widths must be positive");
    for (std::size_t k = 0; k <= hops_; ++k) {
      taps_.emplace_back(Shape{in_, out_});
      taps_.back().enable_grad();
    }
    bias_.enable_grad();
  }

  std::string describe() const {
    return "graphconv(" + std::to_string(in_) + "," + std::to_string(out_) + ",K" +
           std::to_string(hops_) + ")";
  }

  void init(Rng& rng) {
    for (auto& tap : taps_) detail::kaiming_uniform(tap, in_ * (hops_ + 1), rng);
    std::fill(bias_.data().begin(), bias_.data().end(), T(0));
  }

  std::vector<NamedParam<T>> params(const std::string& prefix) {
    std::vector<NamedParam<T>> out;
    for (std::size_t k = 0; k <= hops_; ++k) out.push_back({prefix + ".tap" + std::to_string(k), &taps_[k]});
    out.push_back({prefix + ".bias", &bias_});
    return out;
  }

  // Row i of S Z using only the rows j with S(i, j) != 0, in ascending j.
  static void shift_row(const Matrix& shift, std::size_t i, const Tensor<T>& z, T* out) {
    const std::size_t f = z.dim(1);
    std::vector<double> acc(f, 0.0);
    const auto srow = shift.row(i);
    for (std::size_t j = 0; j < srow.size(); ++j) {
      const double s = srow[j];
      if (s == 0.0) continue;
      const T* zr = z.ptr() + j * f;
      for (std::size_t c = 0; c < f; ++c) acc[c] += s * zr[c];
    }
    for (std::size_t c = 0; c < f; ++c) out[c] = static_cast<T>(acc[c]);
  }

  // y = b + sum_k z_k H_k for one node, from its K+1 shifted feature rows.
  void output_row(std::span<const T* const> z_rows, T* y) const {
    std::vector<double> acc(out_);
    for (std::size_t o = 0; o < out_; ++o) acc[o] = bias_[o];
    for (std::size_t k = 0; k <= hops_; ++k) {
      const T* z = z_rows[k];
      const T* h = taps_[k].ptr();
      for (std::size_t f = 0; f < in_; ++f) {
        const double zf = z[f];
        if (zf == 0.0) continue;
        const T* hr = h + f * out_;
        for (std::size_t o = 0; o < out_; ++o) acc[o] += zf * hr[o];
      }
    }
    for (std::size_t o = 0; o < out_; ++o) y[o] = static_cast<T>(acc[o]);
  }

  Tensor<T> forward(const Tensor<T>& x, const Matrix& shift) {
    detail::require_rank("graphconv", x.shape(), 2);
    detail::require_dim("graphconv", "input feature", x.dim(1), in_);
    if (shift.rows() != x.dim(0) || shift.cols() != x.dim(0)) {
      throw std::invalid_argument("graphconv: shift is " + std::to_string(shift.rows()) + "x" +
                                  std::to_string(shift.cols()) + " for " +
                                  std::to_string(x.dim(0)) + " nodes");
    }
    const std::size_t n = x.dim(0);
    shift_ = shift;
    shifted_.clear();
    shifted_.push_back(x);
    for (std::size_t k = 1; k <= hops_; ++k) {
      Tensor<T> z({n, in_});
      for (std::size_t i = 0; i < n; ++i) shift_row(shift, i, shifted_.back(), z.ptr() + i * in_);
      shifted_.push_back(std::move(z));
    }
    Tensor<T> y({n, out_});
    std::vector<const T*> rows(hops_ + 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k <= hops_; ++k) rows[k] = shifted_[k].ptr() + i * in_;
      output_row(rows, y.ptr() + i * out_);
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    const std::size_t n = grad_out.dim(0);
    for (std::size_t o = 0; o < out_; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += grad_out[i * out_ + o];
      bias_.grad()[o] += static_cast<T>(acc);
    }
    // dZ_k = dY H_k^T, dH_k = Z_k^T dY.
    std::vector<std::vector<double>> dz(hops_ + 1, std::vector<double>(n * in_, 0.0));
    for (std::size_t k = 0; k <= hops_; ++k) {
      const Tensor<T>& z = shifted_[k];
      T* dh = taps_[k].grad().data();
      const T* h = taps_[k].ptr();
      for (std::size_t i = 0; i < n; ++i) {
        const T* gi = grad_out.ptr() + i * out_;
        const T* zi = z.ptr() + i * in_;
        for (std::size_t f = 0; f < in_; ++f) {
          const T zf = zi[f];
          if (zf == T(0)) continue;
          T* dhr = dh + f * out_;
          for (std::size_t o = 0; o < out_; ++o) dhr[o] += zf * gi[o];
        }
        for (std::size_t f = 0; f < in_; ++f) {
          const T* hr = h + f * out_;
          T part[8] = {};
          std::size_t o = 0;
          for (; o + 8 <= out_; o += 8)
            for (std::size_t j = 0; j < 8; ++j) part[j] += gi[o + j] * hr[o + j];
          T acc = T(0);
          for (; o < out_; ++o) acc += gi[o] * hr[o];
          for (T v : part) acc += v;
          dz[k][i * in_ + f] = acc;
        }
      }
    }
    // dX = sum_k (S^T)^k dZ_k, evaluated Horner-style from the highest tap.
    std::vector<double> g = dz[hops_];
    std::vector<double> next(n * in_);
    for (std::size_t k = hops_; k-- > 0;) {
      next = dz[k];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double s = shift_(j, i);  // (S^T)(i, j)
          if (s == 0.0) continue;
          for (std::size_t f = 0; f < in_; ++f) next[i * in_ + f] += s * g[j * in_ + f];
        }
      }
      g.swap(next);
    }
    Tensor<T> grad_in({n, in_});
    for (std::size_t i = 0; i < g.size(); ++i) grad_in[i] = static_cast<T>(g[i]);
    return grad_in;
  }

  std::size_t hops() const { return hops_; }
  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Tensor<T>& tap(std::size_t k) { return taps_.at(k); }
  Tensor<T>& bias() { return bias_; }

 private:
  std::size_t in_, out_, hops_;
  std::vector<Tensor<T>> taps_;
  Tensor<T> bias_;
  Matrix shift_;
  std::vector<Tensor<T>> shifted_;
};

// Stateless form of the graph filter on precomputed shift powers
// [S^0, ..., S^K]. Throws std::invalid_argument when the tap count differs
// from the number of shift matrices.
template <typename T>
Tensor<T> graphconv_forward(const Tensor<T>& x, const std::vector<Matrix>& shift_powers,
                            const std::vector<Tensor<T>>& taps) {
  if (taps.size() != shift_powers.size()) {
    throw std::invalid_argument("graphconv: " + std::to_string(taps.size()) + " taps for " +
                                std::to_string(shift_powers.size()) + " shift matrices");
  }
  detail::require_rank("graphconv", x.shape(), 2);
  const std::size_t n = x.dim(0), in = x.dim(1);
  if (taps.empty()) throw std::invalid_argument("graphconv: no taps");
  const std::size_t out = taps[0].dim(1);
  std::vector<double> acc(n * out, 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const Matrix& s = shift_powers[k];
    detail::require_dim("graphconv", "tap input", taps[k].dim(0), in);
    if (s.rows() != n || s.cols() != n) throw std::invalid_argument("graphconv: shift size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double sij = s(i, j);
        if (sij == 0.0) continue;
        for (std::size_t f = 0; f < in; ++f) {
          const double v = sij * x[j * in + f];
          for (std::size_t o = 0; o < out; ++o) acc[i * out + o] += v * taps[k][f * out + o];
        }
      }
    }
  }
  Tensor<T> y({n, out});
  for (std::size_t i = 0; i < acc.size(); ++i) y[i] = static_cast<T>(acc[i]);
  return y;
}

}  // namespace covplan::nn

#endif  // COVPLAN_NN_LAYERS_HPP_
