#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::nd {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive and has not been cleared.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool needs_grad() const;

  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Adjoints produced by Tape::backward. Leaves that did not participate in the
// loss report a zero gradient of their own shape.
class Gradients {
 public:
  Tensor wrt(const Var& v) const;
  const Tensor* find(const Var& v) const;

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<Tensor> adjoints_;
};

// Records primitive operations (matmul, add, silu, mse, ...) together with
// their local backward rules. Values are computed eagerly; a node carries a
// backward rule only if one of its parents needs a gradient, so constant
// sub-graphs (frozen weights, inference) cost nothing extra.
class Tape {
 public:
  // Accumulates into adjoints[parent] for every parent needing a gradient.
  using BackwardFn = std::function<void(const Tape&, const Tensor& grad_out, std::vector<Tensor>& adjoints)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Trainable leaf: gradients are reported for it.
  Var leaf(Tensor value);
  // Constant: participates in the forward pass only.
  Var constant(Tensor value);

  // Internal: used by op implementations.
  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

  // Replays the tape backward from a 1x1 loss. Does not mutate the tape, so
  // repeated calls return identical gradients.
  Gradients backward(const Var& loss) const;

  void clear();
  std::size_t size() const noexcept { return nodes_.size(); }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace ctrtab::nd
