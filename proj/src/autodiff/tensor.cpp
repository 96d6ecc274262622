#include "hme/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hme/util/error.hpp"

namespace hme::ad {
namespace {

thread_local int no_grad_depth = 0;

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

std::span<Real> Node::grad_buffer() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<Real> values(numel(shape), 0.0);
  return from(std::move(shape), std::move(values), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<Real> values, bool requires_grad) {
  if (shape.empty()) shape = {1};
  for (std::size_t e : shape)
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
  if (numel(shape) != values.size())
    throw ShapeError("shape " + shape_string(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(Real value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<Real>> rows,
                      bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<Real> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return from({r, c}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const { return node_->shape.front(); }

std::size_t Tensor::cols() const {
  std::size_t c = 1;
  for (std::size_t i = 1; i < node_->shape.size(); ++i) c *= node_->shape[i];
  return c;
}

Real Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return from(shape(), node_->value, false); }

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

void Tape::record(const std::shared_ptr<Node>& node) {
  node->tape_position = nodes_.size();
  nodes_.push_back(node);
}

void Tape::clear() {
  for (auto& node : nodes_) {
    node->tape_position = static_cast<std::size_t>(-1);
    node->inputs.clear();
    node->backward = nullptr;
  }
  nodes_.clear();
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw ShapeError("backward() needs a scalar loss, got " + shape_string(loss.shape()));
  Node& root = loss.node();
  if (!root.requires_grad) return;
  const std::size_t end = root.tape_position;
  if (end == static_cast<std::size_t>(-1)) {
    // A leaf: d(loss)/d(loss) = 1.
    root.grad_buffer()[0] += 1.0;
    return;
  }
  for (std::size_t i = 0; i <= end; ++i) {
    auto& g = nodes_[i]->grad;
    g.assign(nodes_[i]->value.size(), 0.0);
  }
  root.grad[0] = 1.0;
  for (std::size_t i = end + 1; i-- > 0;) {
    Node& node = *nodes_[i];
    if (node.backward) node.backward(node);
  }
}

NoGradGuard::NoGradGuard() { ++no_grad_depth; }
NoGradGuard::~NoGradGuard() { --no_grad_depth; }

bool grad_enabled() { return no_grad_depth == 0; }

Tensor make_result(const char* op, Shape shape, std::vector<Real> value,
                   std::vector<Tensor> inputs, BackwardFn fn) {
  for (Real v : value)
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
  Tensor out = Tensor::from(std::move(shape), std::move(value), false);
  if (!grad_enabled()) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return t.requires_grad(); });
  if (!any) return out;
  Node& node = out.node();
  node.requires_grad = true;
  node.inputs.reserve(inputs.size());
  for (auto& t : inputs) node.inputs.push_back(t.node_ptr());
  node.backward = std::move(fn);
  Tape::current().record(out.node_ptr());
  return out;
}

}  // namespace hme::ad
