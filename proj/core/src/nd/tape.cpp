#include "ctrtab/nd/tape.hpp"

#include "ctrtab/error.hpp"

namespace ctrtab::nd {

const Tensor& Var::value() const {
  if (!tape_) throw Error("Var is not attached to a tape");
  return tape_->value(id_);
}

bool Var::needs_grad() const { return tape_ && tape_->needs_grad(id_); }

Tensor Gradients::wrt(const Var& v) const {
  if (const Tensor* g = find(v)) return *g;
  return Tensor(v.value().shape());
}

const Tensor* Gradients::find(const Var& v) const {
  if (v.tape() != tape_ || v.id() >= adjoints_.size()) return nullptr;
  const Tensor& g = adjoints_[v.id()];
  return g.empty() ? nullptr : &g;
}

Var Tape::leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
  bool needs = false;
  for (std::size_t p : parents) needs = needs || nodes_[p].needs_grad;
  Node node{std::move(value), std::move(parents), {}, needs};
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(const Var& loss) const {
  if (loss.tape() != this) throw Error("backward: loss does not belong to this tape");
  const Tensor& lv = nodes_[loss.id()].value;
  if (lv.size() != 1) throw DimensionError("backward: loss must be scalar, got " + to_string(lv.shape()));

  Gradients out;
  out.tape_ = this;
  out.adjoints_.resize(loss.id() + 1);
  if (!nodes_[loss.id()].needs_grad) return out;
  out.adjoints_[loss.id()] = Tensor(lv.shape(), 1.0);

  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (!node.backward || out.adjoints_[i].empty()) continue;
    node.backward(*this, out.adjoints_[i], out.adjoints_);
  }
  return out;
}

void Tape::clear() { nodes_.clear(); }

}  // namespace ctrtab::nd
