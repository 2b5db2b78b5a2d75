// fex/tensor.cpp

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

#include "fex/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace fex {

std::uint64_t RandomSource::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace {

std::shared_ptr<detail::TensorNode> make_node(Shape shape,
                                              std::vector<double> values,
                                              bool requires_grad) {
  for (std::size_t e : shape) {
    if (e == 0) {
      throw std::invalid_argument("tensor extents must be positive, got " +
                                  shape_to_string(shape));
    }
  }
  if (shape_size(shape) != values.size()) {
    throw std::invalid_argument("tensor data length " +
                                std::to_string(values.size()) +
                                " does not match shape " +
                                shape_to_string(shape));
  }
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> values(shape_size(shape), 0.0);
  return wrap(make_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> values(shape_size(shape), value);
  return wrap(make_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values,
                           bool requires_grad) {
  return wrap(make_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({1}, {value}, requires_grad);
}

Tensor Tensor::uniform(Shape shape, double bound, RandomSource& rng,
                       bool requires_grad) {
  std::vector<double> values(shape_size(shape));
  for (double& v : values) v = rng.uniform(-bound, bound);
  return wrap(make_node(std::move(shape), std::move(values), requires_grad));
}

const std::vector<double>& Tensor::grad() const {
  if (!has_grad()) {
    throw std::runtime_error("tensor has no gradient buffer; run backward() "
                             "on a loss that depends on it");
  }
  return node_->grad;
}

std::vector<double>& Tensor::grad_mut() {
  if (!has_grad()) {
    throw std::runtime_error("tensor has no gradient buffer");
  }
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.assign(node_->values.size(), 0.0);
}

double Tensor::item() const {
  if (size() != 1) {
    throw std::invalid_argument("item() on tensor of shape " +
                                shape_to_string(shape()));
  }
  return node_->values[0];
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  }
  auto root = loss.node();
  if (!root->requires_grad) {
    throw std::invalid_argument(
        "backward: loss does not depend on any tensor that requires grad");
  }

  // Post-order DFS; the resulting list ends with the root, so iterating it in
  // reverse visits every node before its parents.
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> visited;
  struct Frame {
    detail::TensorNode* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& frame = stack.back();
    if (frame.next_parent < frame.node->parents.size()) {
      detail::TensorNode* parent =
          frame.node->parents[frame.next_parent++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.push_back({parent, 0});
      }
    } else {
      order.push_back(frame.node);
      stack.pop_back();
    }
  }

  // Interior adjoints are per-call scratch; leaf gradients accumulate.
  for (detail::TensorNode* node : order) {
    if (node->is_leaf()) {
      node->ensure_grad();
    } else {
      node->grad.assign(node->values.size(), 0.0);
    }
  }
  root->ensure_grad();
  root->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* node = *it;
    if (node->backprop) node->backprop(node->grad);
  }
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f,
                           Tensor& x, double fd_epsilon, double tolerance,
                           std::size_t max_coordinates, RandomSource* rng) {
  if (!x.requires_grad()) {
    throw std::invalid_argument("grad_check: x must require grad");
  }
  x.zero_grad();
  Tensor loss = f(x);
  backward(loss);
  const std::vector<double> analytic = x.grad();

  std::vector<std::size_t> coords(x.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  if (max_coordinates > 0 && max_coordinates < coords.size()) {
    if (rng == nullptr) {
      throw std::invalid_argument(
          "grad_check: coordinate subsampling needs a RandomSource");
    }
    for (std::size_t i = 0; i < max_coordinates; ++i) {
      const std::size_t j = i + rng->uniform_int(coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(max_coordinates);
  }

  GradCheckReport report;
  std::vector<double>& data = x.values_mut();
  for (std::size_t i : coords) {
    const double saved = data[i];
    data[i] = saved + fd_epsilon;
    const double up = f(x).item();
    data[i] = saved - fd_epsilon;
    const double down = f(x).item();
    data[i] = saved;
    const double fd = (up - down) / (2.0 * fd_epsilon);
    const double g = analytic[i];
    const double denom = std::max({1.0, std::abs(fd), std::abs(g)});
    report.max_rel_error =
        std::max(report.max_rel_error, std::abs(fd - g) / denom);
    ++report.coords_checked;
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace fex
