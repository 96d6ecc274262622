#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hme::ad {

using Real = double;
using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

struct Node;
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;  // empty until a gradient flows in
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;
  std::size_t tape_position = static_cast<std::size_t>(-1);

  // Gradient buffer, allocated and zeroed on first use.
  std::span<Real> grad_buffer();
};

// Reference-semantics handle to a node of the computation graph. Copies share
// storage, like parameters in most autodiff libraries.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<Real> values, bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<Real>> rows,
                       bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  // Leading extent, and the product of the rest (1 for vectors).
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const Real> data() const { return node_->value; }
  // Copy of the values.
  std::vector<Real> values() const { return node_->value; }
  // Direct write access, for optimizers and initializers. Not recorded.
  std::span<Real> mutable_data() { return node_->value; }
  Real item() const;
  Real at(std::size_t i) const { return node_->value[i]; }
  Real at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  bool has_grad() const { return !node_->grad.empty(); }
  // Gradient, or an empty span before any backward pass reached this tensor.
  std::span<const Real> grad() const { return node_->grad; }
  std::span<Real> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad();

  // Copy of the values with no graph history.
  Tensor detach() const;

  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Ordered record of the ops executed since the last clear(), per thread.
class Tape {
 public:
  static Tape& current();

  void record(const std::shared_ptr<Node>& node);
  std::size_t size() const { return nodes_.size(); }
  void clear();

  // Reverse sweep from `loss`, which must be a scalar. Gradients of interior
  // nodes are recomputed on every call; leaf gradients accumulate.
  void backward(const Tensor& loss);

 private:
  std::vector<std::shared_ptr<Node>> nodes_;
};

inline void backward(const Tensor& loss) { Tape::current().backward(loss); }

// Disables recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_enabled();

// Builds the output of a custom op. The result requires grad (and is put on
// the tape) iff recording is enabled and any input requires grad; only then
// is `fn` kept. Throws NumericError naming `op` if any value is non-finite.
Tensor make_result(const char* op, Shape shape, std::vector<Real> value,
                   std::vector<Tensor> inputs, BackwardFn fn);

}  // namespace hme::ad
