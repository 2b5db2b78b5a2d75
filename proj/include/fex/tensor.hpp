// fex/tensor.hpp

// Copyright 2026 The fex authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEX_TENSOR_HPP_
#define FEX_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fex {

/// Deterministic random stream. The generator is pinned to mt19937_64 and all
/// distributions are derived from raw 64-bit draws in-house, so a given seed
/// produces the same sample stream on every platform and toolchain.
class RandomSource {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/53-bit-uniform/box-muller";

  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

/// Node of the recorded computation graph. Edges point from an op output to
/// its inputs; `backprop` scatters the output adjoint into the parents' grad
/// buffers. Leaves have no parents and keep their grad across backward calls.
struct TensorNode {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until backward touches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(const std::vector<double>& self_grad)> backprop;

  bool is_leaf() const { return parents.empty(); }
  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

}  // namespace detail

/// Shared handle to an n-dimensional array of doubles with an optional
/// gradient buffer. Copies are shallow; ops build new nodes and record the
/// graph needed for reverse-mode differentiation whenever an input requires
/// gradients.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Uniform init in (-bound, bound); the convention for learnable weights is
  /// bound = sqrt(1 / fan_in).
  static Tensor uniform(Shape shape, double bound, RandomSource& rng,
                        bool requires_grad = true);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->values.size(); }
  std::size_t extent(std::size_t axis) const { return node_->shape.at(axis); }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  bool is_leaf() const { return node_->is_leaf(); }

  const std::vector<double>& values() const { return node_->values; }
  /// Mutable access to the raw buffer. Only meaningful on leaves (inputs and
  /// parameters); graph outputs are owned by the ops that produced them.
  std::vector<double>& values_mut() { return node_->values; }

  /// Gradient buffer; throws if no backward pass has touched this tensor.
  const std::vector<double>& grad() const;
  std::vector<double>& grad_mut();
  void zero_grad();

  /// Value of a rank-0 or single-element tensor.
  double item() const;

  std::shared_ptr<detail::TensorNode> node() const { return node_; }

  static Tensor wrap(std::shared_ptr<detail::TensorNode> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

/// Runs reverse-mode accumulation from a scalar loss. Every tensor that
/// participated in the computation receives d(loss)/d(tensor) in its grad
/// buffer. Leaf gradients accumulate across repeated calls; interior node
/// gradients are reset per call.
void backward(const Tensor& loss);

enum class Padding { kValid, kSame };

/// Output length of a strided 1D convolution along one axis:
/// valid: floor((in - kernel) / stride) + 1, same: ceil(in / stride).
std::size_t conv_output_length(std::size_t in, std::size_t kernel,
                               std::size_t stride, Padding padding);

// Elementwise / reduction ops. All ops are cross-correlations (no kernel
// flip) and accumulate in double.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor sum(const Tensor& a);

Tensor relu(const Tensor& x);
/// Exact Gaussian-CDF GELU: x * Phi(x).
Tensor gelu(const Tensor& x);
/// |x|, with gradient 0 at the origin.
Tensor abs_value(const Tensor& x);
/// |x|^(1/p) for p > 1, with gradient 0 at the origin.
Tensor magnitude_root(const Tensor& x, double p);
/// ln(x + eps) for eps > 0. Intended for nonnegative inputs (energies).
Tensor log_eps(const Tensor& x, double eps);

/// input [C_in x T], weight [C_out x C_in x K], bias [C_out] or null.
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor* bias,
              std::size_t stride, Padding padding);

/// input [C_in x T x F], weight [C_out x C_in x Kt x Kf].
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor* bias,
              std::size_t stride_time, std::size_t stride_feature,
              Padding padding);

/// Applies each of the F filters [F x K] to every input channel separately:
/// input [C x T] -> output [(C*F) x T_out], channel c with filter f landing
/// at row c*F + f. bias, when given, is per filter [F].
Tensor depthwise_conv1d(const Tensor& input, const Tensor& weight,
                        const Tensor* bias, std::size_t stride);

/// input [N x D_in], weight [D_out x D_in], bias [D_out] or null.
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor* bias);

/// Zero-mean unit-variance normalization over the last axis, then per-element
/// affine with gain/offset of length D (the last extent).
Tensor layer_norm(const Tensor& input, const Tensor& gain,
                  const Tensor& offset, double eps);

/// input [C x T]; normalizes each group of C/groups channels over its whole
/// (channel, time) slice, then applies a per-channel affine.
Tensor group_norm(const Tensor& input, std::size_t groups, const Tensor& gain,
                  const Tensor& offset, double eps);

/// Row-wise log-softmax of a [N x D] tensor.
Tensor log_softmax_rows(const Tensor& input);

/// Same data, new shape (sizes must agree).
Tensor reshape(const Tensor& input, Shape shape);

/// [C x T] -> [1 x T x C]; turns conv1d channels into a feature axis.
Tensor channels_to_plane(const Tensor& input);

/// [C x T x F] -> [T x (F*C)]; output column f*C + c takes channel c of
/// feature f, so all channels of one frequency band stay adjacent.
Tensor merge_channels_into_features(const Tensor& input);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  bool passed = false;
};

/// Central-finite-difference check of reverse-mode gradients of a scalar
/// function f with respect to leaf x. Relative error uses a denominator
/// clamped below at 1, so tiny gradients are compared absolutely. When
/// max_coordinates > 0 and smaller than x, a random subset is checked.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f,
                           Tensor& x, double fd_epsilon, double tolerance,
                           std::size_t max_coordinates = 0,
                           RandomSource* rng = nullptr);

}  // namespace fex

#endif  // FEX_TENSOR_HPP_
