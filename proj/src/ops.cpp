// fex/ops.cpp

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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fex/tensor.hpp"

namespace fex {

namespace {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

Tensor make_output(Shape shape, std::vector<double> values,
                   std::vector<NodePtr> grad_parents,
                   std::function<void(const std::vector<double>&)> backprop) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  if (!grad_parents.empty()) {
    node->requires_grad = true;
    node->parents = std::move(grad_parents);
    node->backprop = std::move(backprop);
  }
  return Tensor::wrap(node);
}

std::vector<NodePtr> collect_grad_parents(
    std::initializer_list<const Tensor*> inputs) {
  std::vector<NodePtr> parents;
  for (const Tensor* t : inputs) {
    if (t != nullptr && t->defined() && t->requires_grad()) {
      parents.push_back(t->node());
    }
  }
  return parents;
}

void accumulate(const NodePtr& node, std::size_t index, double value) {
  if (node->requires_grad) {
    node->ensure_grad();
    node->grad[index] += value;
  }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch, " +
                                shape_to_string(a.shape()) + " vs " +
                                shape_to_string(b.shape()));
  }
}

Tensor elementwise_binary(const Tensor& a, const Tensor& b, const char* op,
                          double (*fwd)(double, double), double b_sign) {
  check_same_shape(a, b, op);
  const std::size_t n = a.size();
  std::vector<double> out(n);
  const bool is_mul = b_sign == 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = fwd(a.values()[i], b.values()[i]);
  }
  NodePtr an = a.node();
  NodePtr bn = b.node();
  return make_output(
      a.shape(), std::move(out), collect_grad_parents({&a, &b}),
      [an, bn, n, is_mul, b_sign](const std::vector<double>& g) {
        for (std::size_t i = 0; i < n; ++i) {
          if (is_mul) {
            accumulate(an, i, g[i] * bn->values[i]);
            accumulate(bn, i, g[i] * an->values[i]);
          } else {
            accumulate(an, i, g[i]);
            accumulate(bn, i, b_sign * g[i]);
          }
        }
      });
}

Tensor elementwise_unary(const Tensor& x, std::vector<double> out,
                         std::vector<double> local_grad) {
  NodePtr xn = x.node();
  const std::size_t n = x.size();
  auto dydx = std::make_shared<std::vector<double>>(std::move(local_grad));
  return make_output(x.shape(), std::move(out), collect_grad_parents({&x}),
                     [xn, n, dydx](const std::vector<double>& g) {
                       for (std::size_t i = 0; i < n; ++i) {
                         accumulate(xn, i, g[i] * (*dydx)[i]);
                       }
                     });
}

void check_bias(const Tensor* bias, std::size_t expected, const char* op) {
  if (bias == nullptr || !bias->defined()) return;
  if (bias->rank() != 1 || bias->extent(0) != expected) {
    throw std::invalid_argument(std::string(op) + ": bias must have shape [" +
                                std::to_string(expected) + "], got " +
                                shape_to_string(bias->shape()));
  }
}

}  // namespace

std::size_t conv_output_length(std::size_t in, std::size_t kernel,
                               std::size_t stride, Padding padding) {
  if (kernel == 0) throw std::invalid_argument("conv kernel must be positive");
  if (stride == 0) throw std::invalid_argument("conv stride must be positive");
  if (padding == Padding::kValid) {
    if (kernel > in) {
      throw std::invalid_argument("conv kernel " + std::to_string(kernel) +
                                  " exceeds input length " +
                                  std::to_string(in));
    }
    return (in - kernel) / stride + 1;
  }
  return (in + stride - 1) / stride;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise_binary(
      a, b, "add", [](double x, double y) { return x + y; }, 1.0);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise_binary(
      a, b, "sub", [](double x, double y) { return x - y; }, -1.0);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise_binary(
      a, b, "mul", [](double x, double y) { return x * y; }, 0.0);
}

Tensor scale(const Tensor& a, double factor) {
  const std::size_t n = a.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = factor * a.values()[i];
  NodePtr an = a.node();
  return make_output(a.shape(), std::move(out), collect_grad_parents({&a}),
                     [an, n, factor](const std::vector<double>& g) {
                       for (std::size_t i = 0; i < n; ++i) {
                         accumulate(an, i, factor * g[i]);
                       }
                     });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  NodePtr an = a.node();
  const std::size_t n = a.size();
  return make_output({1}, {total}, collect_grad_parents({&a}),
                     [an, n](const std::vector<double>& g) {
                       for (std::size_t i = 0; i < n; ++i) {
                         accumulate(an, i, g[0]);
                       }
                     });
}

Tensor relu(const Tensor& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n), dydx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.values()[i];
    out[i] = v > 0.0 ? v : 0.0;
    dydx[i] = v > 0.0 ? 1.0 : 0.0;
  }
  return elementwise_unary(x, std::move(out), std::move(dydx));
}

Tensor gelu(const Tensor& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n), dydx(n);
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.values()[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
    out[i] = v * cdf;
    dydx[i] = cdf + v * pdf;
  }
  return elementwise_unary(x, std::move(out), std::move(dydx));
}

Tensor abs_value(const Tensor& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n), dydx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.values()[i];
    out[i] = std::abs(v);
    dydx[i] = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  }
  return elementwise_unary(x, std::move(out), std::move(dydx));
}

Tensor magnitude_root(const Tensor& x, double p) {
  if (!(p > 1.0)) {
    throw std::invalid_argument("magnitude_root: p must exceed 1, got " +
                                std::to_string(p));
  }
  const std::size_t n = x.size();
  const double q = 1.0 / p;
  std::vector<double> out(n), dydx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.values()[i];
    const double a = std::abs(v);
    out[i] = std::pow(a, q);
    dydx[i] = v == 0.0 ? 0.0
                       : q * std::pow(a, q - 1.0) * (v > 0.0 ? 1.0 : -1.0);
  }
  return elementwise_unary(x, std::move(out), std::move(dydx));
}

Tensor log_eps(const Tensor& x, double eps) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("log_eps: eps must be positive");
  }
  const std::size_t n = x.size();
  std::vector<double> out(n), dydx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.values()[i] + eps;
    out[i] = std::log(v);
    dydx[i] = 1.0 / v;
  }
  return elementwise_unary(x, std::move(out), std::move(dydx));
}

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor* bias,
              std::size_t stride, Padding padding) {
  if (input.rank() != 2) {
    throw std::invalid_argument("conv1d: input must be [channels x time], got " +
                                shape_to_string(input.shape()));
  }
  if (weight.rank() != 3) {
    throw std::invalid_argument(
        "conv1d: weight must be [out x in x kernel], got " +
        shape_to_string(weight.shape()));
  }
  const std::size_t c_in = input.extent(0);
  const std::size_t t_in = input.extent(1);
  const std::size_t c_out = weight.extent(0);
  const std::size_t k = weight.extent(2);
  if (weight.extent(1) != c_in) {
    throw std::invalid_argument(
        "conv1d: weight expects " + std::to_string(weight.extent(1)) +
        " input channels, input has " + std::to_string(c_in));
  }
  check_bias(bias, c_out, "conv1d");
  const std::size_t t_out = conv_output_length(t_in, k, stride, padding);
  // Same padding splits the deficit with the extra sample on the right.
  const std::ptrdiff_t pad_left =
      padding == Padding::kValid
          ? 0
          : static_cast<std::ptrdiff_t>(
                std::max<std::ptrdiff_t>(
                    0, static_cast<std::ptrdiff_t>((t_out - 1) * stride + k) -
                           static_cast<std::ptrdiff_t>(t_in))) /
                2;

  const bool has_bias = bias != nullptr && bias->defined();
  std::vector<double> out(c_out * t_out, 0.0);
  const std::vector<double>& in_v = input.values();
  const std::vector<double>& w_v = weight.values();
  for (std::size_t oc = 0; oc < c_out; ++oc) {
    for (std::size_t ot = 0; ot < t_out; ++ot) {
      double acc = has_bias ? bias->values()[oc] : 0.0;
      const std::ptrdiff_t start =
          static_cast<std::ptrdiff_t>(ot * stride) - pad_left;
      for (std::size_t ic = 0; ic < c_in; ++ic) {
        const double* in_row = in_v.data() + ic * t_in;
        const double* w_row = w_v.data() + (oc * c_in + ic) * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const std::ptrdiff_t t = start + static_cast<std::ptrdiff_t>(kk);
          if (t >= 0 && t < static_cast<std::ptrdiff_t>(t_in)) {
            acc += in_row[t] * w_row[kk];
          }
        }
      }
      out[oc * t_out + ot] = acc;
    }
  }

  NodePtr in_n = input.node();
  NodePtr w_n = weight.node();
  NodePtr b_n = has_bias ? bias->node() : nullptr;
  return make_output(
      {c_out, t_out}, std::move(out),
      collect_grad_parents({&input, &weight, bias}),
      [in_n, w_n, b_n, c_in, t_in, c_out, t_out, k, stride,
       pad_left](const std::vector<double>& g) {
        for (std::size_t oc = 0; oc < c_out; ++oc) {
          for (std::size_t ot = 0; ot < t_out; ++ot) {
            const double go = g[oc * t_out + ot];
            if (b_n) accumulate(b_n, oc, go);
            const std::ptrdiff_t start =
                static_cast<std::ptrdiff_t>(ot * stride) - pad_left;
            for (std::size_t ic = 0; ic < c_in; ++ic) {
              for (std::size_t kk = 0; kk < k; ++kk) {
                const std::ptrdiff_t t =
                    start + static_cast<std::ptrdiff_t>(kk);
                if (t < 0 || t >= static_cast<std::ptrdiff_t>(t_in)) continue;
                const std::size_t in_idx = ic * t_in + t;
                const std::size_t w_idx = (oc * c_in + ic) * k + kk;
                accumulate(in_n, in_idx, go * w_n->values[w_idx]);
                accumulate(w_n, w_idx, go * in_n->values[in_idx]);
              }
            }
          }
        }
      });
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor* bias,
              std::size_t stride_time, std::size_t stride_feature,
              Padding padding) {
  if (input.rank() != 3) {
    throw std::invalid_argument(
        "conv2d: input must be [channels x time x features], got " +
        shape_to_string(input.shape()));
  }
  if (weight.rank() != 4) {
    throw std::invalid_argument(
        "conv2d: weight must be [out x in x kt x kf], got " +
        shape_to_string(weight.shape()));
  }
  const std::size_t c_in = input.extent(0);
  const std::size_t t_in = input.extent(1);
  const std::size_t f_in = input.extent(2);
  const std::size_t c_out = weight.extent(0);
  const std::size_t kt = weight.extent(2);
  const std::size_t kf = weight.extent(3);
  if (weight.extent(1) != c_in) {
    throw std::invalid_argument(
        "conv2d: weight expects " + std::to_string(weight.extent(1)) +
        " input channels, input has " + std::to_string(c_in));
  }
  check_bias(bias, c_out, "conv2d");
  const std::size_t t_out = conv_output_length(t_in, kt, stride_time, padding);
  const std::size_t f_out =
      conv_output_length(f_in, kf, stride_feature, padding);
  auto pad_for = [padding](std::size_t in, std::size_t out, std::size_t kk,
                           std::size_t stride) -> std::ptrdiff_t {
    if (padding == Padding::kValid) return 0;
    const std::ptrdiff_t deficit =
        static_cast<std::ptrdiff_t>((out - 1) * stride + kk) -
        static_cast<std::ptrdiff_t>(in);
    return std::max<std::ptrdiff_t>(0, deficit) / 2;
  };
  const std::ptrdiff_t pad_t = pad_for(t_in, t_out, kt, stride_time);
  const std::ptrdiff_t pad_f = pad_for(f_in, f_out, kf, stride_feature);

  const bool has_bias = bias != nullptr && bias->defined();
  std::vector<double> out(c_out * t_out * f_out, 0.0);
  const std::vector<double>& in_v = input.values();
  const std::vector<double>& w_v = weight.values();
  for (std::size_t oc = 0; oc < c_out; ++oc) {
    for (std::size_t ot = 0; ot < t_out; ++ot) {
      const std::ptrdiff_t t0 =
          static_cast<std::ptrdiff_t>(ot * stride_time) - pad_t;
      for (std::size_t of = 0; of < f_out; ++of) {
        const std::ptrdiff_t f0 =
            static_cast<std::ptrdiff_t>(of * stride_feature) - pad_f;
        double acc = has_bias ? bias->values()[oc] : 0.0;
        for (std::size_t ic = 0; ic < c_in; ++ic) {
          for (std::size_t it = 0; it < kt; ++it) {
            const std::ptrdiff_t t = t0 + static_cast<std::ptrdiff_t>(it);
            if (t < 0 || t >= static_cast<std::ptrdiff_t>(t_in)) continue;
            const double* in_row = in_v.data() + (ic * t_in + t) * f_in;
            const double* w_row =
                w_v.data() + ((oc * c_in + ic) * kt + it) * kf;
            for (std::size_t jf = 0; jf < kf; ++jf) {
              const std::ptrdiff_t f = f0 + static_cast<std::ptrdiff_t>(jf);
              if (f < 0 || f >= static_cast<std::ptrdiff_t>(f_in)) continue;
              acc += in_row[f] * w_row[jf];
            }
          }
        }
        out[(oc * t_out + ot) * f_out + of] = acc;
      }
    }
  }

  NodePtr in_n = input.node();
  NodePtr w_n = weight.node();
  NodePtr b_n = has_bias ? bias->node() : nullptr;
  return make_output(
      {c_out, t_out, f_out}, std::move(out),
      collect_grad_parents({&input, &weight, bias}),
      [in_n, w_n, b_n, c_in, t_in, f_in, c_out, t_out, f_out, kt, kf,
       stride_time, stride_feature, pad_t,
       pad_f](const std::vector<double>& g) {
        for (std::size_t oc = 0; oc < c_out; ++oc) {
          for (std::size_t ot = 0; ot < t_out; ++ot) {
            const std::ptrdiff_t t0 =
                static_cast<std::ptrdiff_t>(ot * stride_time) - pad_t;
            for (std::size_t of = 0; of < f_out; ++of) {
              const std::ptrdiff_t f0 =
                  static_cast<std::ptrdiff_t>(of * stride_feature) - pad_f;
              const double go = g[(oc * t_out + ot) * f_out + of];
              if (b_n) accumulate(b_n, oc, go);
              for (std::size_t ic = 0; ic < c_in; ++ic) {
                for (std::size_t it = 0; it < kt; ++it) {
                  const std::ptrdiff_t t =
                      t0 + static_cast<std::ptrdiff_t>(it);
                  if (t < 0 || t >= static_cast<std::ptrdiff_t>(t_in)) {
                    continue;
                  }
                  for (std::size_t jf = 0; jf < kf; ++jf) {
                    const std::ptrdiff_t f =
                        f0 + static_cast<std::ptrdiff_t>(jf);
                    if (f < 0 || f >= static_cast<std::ptrdiff_t>(f_in)) {
                      continue;
                    }
                    const std::size_t in_idx = (ic * t_in + t) * f_in + f;
                    const std::size_t w_idx =
                        ((oc * c_in + ic) * kt + it) * kf + jf;
                    accumulate(in_n, in_idx, go * w_n->values[w_idx]);
                    accumulate(w_n, w_idx, go * in_n->values[in_idx]);
                  }
                }
              }
            }
          }
        }
      });
}

Tensor depthwise_conv1d(const Tensor& input, const Tensor& weight,
                        const Tensor* bias, std::size_t stride) {
  if (input.rank() != 2) {
    throw std::invalid_argument(
        "depthwise_conv1d: input must be [channels x time], got " +
        shape_to_string(input.shape()));
  }
  if (weight.rank() != 2) {
    throw std::invalid_argument(
        "depthwise_conv1d: weight must be [filters x kernel], got " +
        shape_to_string(weight.shape()));
  }
  const std::size_t c = input.extent(0);
  const std::size_t t_in = input.extent(1);
  const std::size_t f = weight.extent(0);
  const std::size_t k = weight.extent(1);
  check_bias(bias, f, "depthwise_conv1d");
  const std::size_t t_out = conv_output_length(t_in, k, stride, Padding::kValid);

  const bool has_bias = bias != nullptr && bias->defined();
  std::vector<double> out(c * f * t_out, 0.0);
  for (std::size_t ic = 0; ic < c; ++ic) {
    for (std::size_t fi = 0; fi < f; ++fi) {
      const std::size_t row = ic * f + fi;
      for (std::size_t ot = 0; ot < t_out; ++ot) {
        double acc = has_bias ? bias->values()[fi] : 0.0;
        for (std::size_t kk = 0; kk < k; ++kk) {
          acc += input.values()[ic * t_in + ot * stride + kk] *
                 weight.values()[fi * k + kk];
        }
        out[row * t_out + ot] = acc;
      }
    }
  }

  NodePtr in_n = input.node();
  NodePtr w_n = weight.node();
  NodePtr b_n = has_bias ? bias->node() : nullptr;
  return make_output(
      {c * f, t_out}, std::move(out),
      collect_grad_parents({&input, &weight, bias}),
      [in_n, w_n, b_n, c, t_in, f, k, t_out,
       stride](const std::vector<double>& g) {
        for (std::size_t ic = 0; ic < c; ++ic) {
          for (std::size_t fi = 0; fi < f; ++fi) {
            const std::size_t row = ic * f + fi;
            for (std::size_t ot = 0; ot < t_out; ++ot) {
              const double go = g[row * t_out + ot];
              if (b_n) accumulate(b_n, fi, go);
              for (std::size_t kk = 0; kk < k; ++kk) {
                const std::size_t in_idx = ic * t_in + ot * stride + kk;
                const std::size_t w_idx = fi * k + kk;
                accumulate(in_n, in_idx, go * w_n->values[w_idx]);
                accumulate(w_n, w_idx, go * in_n->values[in_idx]);
              }
            }
          }
        }
      });
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor* bias) {
  if (input.rank() != 2 || weight.rank() != 2) {
    throw std::invalid_argument("linear: input and weight must be rank 2");
  }
  const std::size_t n = input.extent(0);
  const std::size_t d_in = input.extent(1);
  const std::size_t d_out = weight.extent(0);
  if (weight.extent(1) != d_in) {
    throw std::invalid_argument(
        "linear: weight expects " + std::to_string(weight.extent(1)) +
        " input features, input has " + std::to_string(d_in));
  }
  check_bias(bias, d_out, "linear");

  const bool has_bias = bias != nullptr && bias->defined();
  std::vector<double> out(n * d_out, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* in_row = input.values().data() + r * d_in;
    for (std::size_t o = 0; o < d_out; ++o) {
      const double* w_row = weight.values().data() + o * d_in;
      double acc = has_bias ? bias->values()[o] : 0.0;
      for (std::size_t d = 0; d < d_in; ++d) acc += in_row[d] * w_row[d];
      out[r * d_out + o] = acc;
    }
  }

  NodePtr in_n = input.node();
  NodePtr w_n = weight.node();
  NodePtr b_n = has_bias ? bias->node() : nullptr;
  return make_output(
      {n, d_out}, std::move(out), collect_grad_parents({&input, &weight, bias}),
      [in_n, w_n, b_n, n, d_in, d_out](const std::vector<double>& g) {
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t o = 0; o < d_out; ++o) {
            const double go = g[r * d_out + o];
            if (b_n) accumulate(b_n, o, go);
            for (std::size_t d = 0; d < d_in; ++d) {
              accumulate(in_n, r * d_in + d, go * w_n->values[o * d_in + d]);
              accumulate(w_n, o * d_in + d, go * in_n->values[r * d_in + d]);
            }
          }
        }
      });
}

Tensor layer_norm(const Tensor& input, const Tensor& gain,
                  const Tensor& offset, double eps) {
  if (input.rank() == 0) {
    throw std::invalid_argument("layer_norm: input must have rank >= 1");
  }
  const std::size_t d = input.extent(input.rank() - 1);
  if (gain.rank() != 1 || gain.extent(0) != d || offset.rank() != 1 ||
      offset.extent(0) != d) {
    throw std::invalid_argument(
        "layer_norm: gain and offset must have shape [" + std::to_string(d) +
        "]");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("layer_norm: eps must be positive");
  }
  const std::size_t rows = input.size() / d;
  std::vector<double> out(input.size());
  std::vector<double> xhat(input.size());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = input.values().data() + r * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += x[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = x[i] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double s = 1.0 / std::sqrt(var + eps);
    inv_std[r] = s;
    for (std::size_t i = 0; i < d; ++i) {
      const double h = (x[i] - mean) * s;
      xhat[r * d + i] = h;
      out[r * d + i] = gain.values()[i] * h + offset.values()[i];
    }
  }

  NodePtr in_n = input.node();
  NodePtr g_n = gain.node();
  NodePtr o_n = offset.node();
  auto xhat_p = std::make_shared<std::vector<double>>(std::move(xhat));
  auto s_p = std::make_shared<std::vector<double>>(std::move(inv_std));
  return make_output(
      input.shape(), std::move(out),
      collect_grad_parents({&input, &gain, &offset}),
      [in_n, g_n, o_n, xhat_p, s_p, rows, d](const std::vector<double>& g) {
        std::vector<double> h(d);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gr = g.data() + r * d;
          const double* xr = xhat_p->data() + r * d;
          double mean_h = 0.0, mean_hx = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            h[i] = gr[i] * g_n->values[i];
            mean_h += h[i];
            mean_hx += h[i] * xr[i];
            accumulate(g_n, i, gr[i] * xr[i]);
            accumulate(o_n, i, gr[i]);
          }
          mean_h /= static_cast<double>(d);
          mean_hx /= static_cast<double>(d);
          const double s = (*s_p)[r];
          for (std::size_t i = 0; i < d; ++i) {
            accumulate(in_n, r * d + i,
                       s * (h[i] - mean_h - xr[i] * mean_hx));
          }
        }
      });
}

Tensor group_norm(const Tensor& input, std::size_t groups, const Tensor& gain,
                  const Tensor& offset, double eps) {
  if (input.rank() != 2) {
    throw std::invalid_argument(
        "group_norm: input must be [channels x time], got " +
        shape_to_string(input.shape()));
  }
  const std::size_t c = input.extent(0);
  const std::size_t t = input.extent(1);
  if (groups == 0 || c % groups != 0) {
    throw std::invalid_argument("group_norm: groups must divide " +
                                std::to_string(c) + " channels, got " +
                                std::to_string(groups));
  }
  if (gain.rank() != 1 || gain.extent(0) != c || offset.rank() != 1 ||
      offset.extent(0) != c) {
    throw std::invalid_argument(
        "group_norm: gain and offset must have shape [" + std::to_string(c) +
        "]");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("group_norm: eps must be positive");
  }
  const std::size_t cs = c / groups;
  const std::size_t gn = cs * t;  // elements per group
  std::vector<double> out(input.size());
  std::vector<double> xhat(input.size());
  std::vector<double> inv_std(groups);
  for (std::size_t gr = 0; gr < groups; ++gr) {
    const std::size_t base = gr * cs * t;
    double mean = 0.0;
    for (std::size_t i = 0; i < gn; ++i) mean += input.values()[base + i];
    mean /= static_cast<double>(gn);
    double var = 0.0;
    for (std::size_t i = 0; i < gn; ++i) {
      const double d = input.values()[base + i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(gn);
    const double s = 1.0 / std::sqrt(var + eps);
    inv_std[gr] = s;
    for (std::size_t ci = 0; ci < cs; ++ci) {
      const std::size_t ch = gr * cs + ci;
      for (std::size_t ti = 0; ti < t; ++ti) {
        const std::size_t idx = ch * t + ti;
        const double h = (input.values()[idx] - mean) * s;
        xhat[idx] = h;
        out[idx] = gain.values()[ch] * h + offset.values()[ch];
      }
    }
  }

  NodePtr in_n = input.node();
  NodePtr g_n = gain.node();
  NodePtr o_n = offset.node();
  auto xhat_p = std::make_shared<std::vector<double>>(std::move(xhat));
  auto s_p = std::make_shared<std::vector<double>>(std::move(inv_std));
  return make_output(
      input.shape(), std::move(out),
      collect_grad_parents({&input, &gain, &offset}),
      [in_n, g_n, o_n, xhat_p, s_p, groups, cs, t,
       gn](const std::vector<double>& g) {
        std::vector<double> h(gn);
        for (std::size_t gr = 0; gr < groups; ++gr) {
          double mean_h = 0.0, mean_hx = 0.0;
          for (std::size_t ci = 0; ci < cs; ++ci) {
            const std::size_t ch = gr * cs + ci;
            for (std::size_t ti = 0; ti < t; ++ti) {
              const std::size_t idx = ch * t + ti;
              const double hv = g[idx] * g_n->values[ch];
              h[ci * t + ti] = hv;
              mean_h += hv;
              mean_hx += hv * (*xhat_p)[idx];
              accumulate(g_n, ch, g[idx] * (*xhat_p)[idx]);
              accumulate(o_n, ch, g[idx]);
            }
          }
          mean_h /= static_cast<double>(gn);
          mean_hx /= static_cast<double>(gn);
          const double s = (*s_p)[gr];
          for (std::size_t ci = 0; ci < cs; ++ci) {
            const std::size_t ch = gr * cs + ci;
            for (std::size_t ti = 0; ti < t; ++ti) {
              const std::size_t idx = ch * t + ti;
              accumulate(in_n, idx,
                         s * (h[ci * t + ti] - mean_h -
                              (*xhat_p)[idx] * mean_hx));
            }
          }
        }
      });
}

Tensor log_softmax_rows(const Tensor& input) {
  if (input.rank() != 2) {
    throw std::invalid_argument("log_softmax_rows: input must be rank 2, got " +
                                shape_to_string(input.shape()));
  }
  const std::size_t n = input.extent(0);
  const std::size_t d = input.extent(1);
  std::vector<double> out(input.size());
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = input.values().data() + r * d;
    double m = x[0];
    for (std::size_t i = 1; i < d; ++i) m = std::max(m, x[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < d; ++i) z += std::exp(x[i] - m);
    const double log_z = m + std::log(z);
    for (std::size_t i = 0; i < d; ++i) out[r * d + i] = x[i] - log_z;
  }

  NodePtr in_n = input.node();
  auto out_p = std::make_shared<std::vector<double>>(out);
  return make_output(input.shape(), std::move(out),
                     collect_grad_parents({&input}),
                     [in_n, out_p, n, d](const std::vector<double>& g) {
                       for (std::size_t r = 0; r < n; ++r) {
                         double g_sum = 0.0;
                         for (std::size_t i = 0; i < d; ++i) {
                           g_sum += g[r * d + i];
                         }
                         for (std::size_t i = 0; i < d; ++i) {
                           const std::size_t idx = r * d + i;
                           accumulate(in_n, idx,
                                      g[idx] -
                                          std::exp((*out_p)[idx]) * g_sum);
                         }
                       }
                     });
}

Tensor reshape(const Tensor& input, Shape shape) {
  if (shape_size(shape) != input.size()) {
    throw std::invalid_argument("reshape: cannot view " +
                                shape_to_string(input.shape()) + " as " +
                                shape_to_string(shape));
  }
  NodePtr in_n = input.node();
  std::vector<double> out = input.values();
  const std::size_t n = input.size();
  return make_output(std::move(shape), std::move(out),
                     collect_grad_parents({&input}),
                     [in_n, n](const std::vector<double>& g) {
                       for (std::size_t i = 0; i < n; ++i) {
                         accumulate(in_n, i, g[i]);
                       }
                     });
}

Tensor channels_to_plane(const Tensor& input) {
  if (input.rank() != 2) {
    throw std::invalid_argument(
        "channels_to_plane: input must be [channels x time], got " +
        shape_to_string(input.shape()));
  }
  const std::size_t c = input.extent(0);
  const std::size_t t = input.extent(1);
  std::vector<double> out(input.size());
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t ti = 0; ti < t; ++ti) {
      out[ti * c + ci] = input.values()[ci * t + ti];
    }
  }
  NodePtr in_n = input.node();
  return make_output({1, t, c}, std::move(out), collect_grad_parents({&input}),
                     [in_n, c, t](const std::vector<double>& g) {
                       for (std::size_t ci = 0; ci < c; ++ci) {
                         for (std::size_t ti = 0; ti < t; ++ti) {
                           accumulate(in_n, ci * t + ti, g[ti * c + ci]);
                         }
                       }
                     });
}

Tensor merge_channels_into_features(const Tensor& input) {
  if (input.rank() != 3) {
    throw std::invalid_argument(
        "merge_channels_into_features: input must be "
        "[channels x time x features], got " +
        shape_to_string(input.shape()));
  }
  const std::size_t c = input.extent(0);
  const std::size_t t = input.extent(1);
  const std::size_t f = input.extent(2);
  std::vector<double> out(input.size());
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t ti = 0; ti < t; ++ti) {
      for (std::size_t fi = 0; fi < f; ++fi) {
        out[ti * (f * c) + fi * c + ci] = input.values()[(ci * t + ti) * f + fi];
      }
    }
  }
  NodePtr in_n = input.node();
  return make_output(
      {t, f * c}, std::move(out), collect_grad_parents({&input}),
      [in_n, c, t, f](const std::vector<double>& g) {
        for (std::size_t ci = 0; ci < c; ++ci) {
          for (std::size_t ti = 0; ti < t; ++ti) {
            for (std::size_t fi = 0; fi < f; ++fi) {
              accumulate(in_n, (ci * t + ti) * f + fi,
                         g[ti * (f * c) + fi * c + ci]);
            }
          }
        }
      });
}

}  // namespace fex
