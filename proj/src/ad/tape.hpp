#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "core/tensor.hpp"

namespace svr::ad {

using core::Tensor;

class Tape;

// Handle to a tape node. Cheap to copy; only meaningful with its tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

using BackwardFn = std::function<void(Tape&, int node_id)>;

// Reverse-mode tape. Nodes are appended in forward order; backward() walks
// ids in reverse, visiting only nodes reachable from the loss through
// gradient-carrying edges. Constants never receive or propagate gradients,
// so a subgraph built purely from constants is dead weight for backward —
// that is exactly how detached (stop-gradient) inputs behave here.
class Tape {
public:
  // A constant: carries a value, never a gradient.
  Var constant(Tensor v) { return push(std::move(v), {}, nullptr, false); }

  // A leaf that collects gradient (parameters, probed inputs).
  Var leaf(Tensor v) { return push(std::move(v), {}, nullptr, true); }

  // An interior node. requires_grad is inherited from parents.
  Var node(Tensor v, std::vector<int> parents, BackwardFn fn) {
    bool rg = false;
    for (int p : parents) rg = rg || nodes_[static_cast<size_t>(p)].requires_grad;
    return push(std::move(v), std::move(parents), rg ? std::move(fn) : nullptr, rg);
  }

  const Tensor& val(Var v) const { return nodes_[check(v)].value; }
  Tensor& val_mut(Var v) { return nodes_[check(v)].value; }

  bool requires_grad(Var v) const { return nodes_[check(v)].requires_grad; }

  // Gradient buffer of a node, allocated (zeroed) on first access.
  Tensor& grad(Var v) { return grad_by_id(check_int(v)); }
  Tensor& grad_by_id(int id) {
    auto& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty()) n.grad = Tensor(n.value.shape());
    return n.grad;
  }
  bool has_grad(Var v) const { return !nodes_[check(v)].grad.empty(); }

  const std::vector<int>& parents(int id) const {
    return nodes_[static_cast<size_t>(id)].parents;
  }

  // Backpropagate from a scalar root. May be called once per tape.
  void backward(Var root);

  size_t num_nodes() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<int> parents;
    BackwardFn backward;
    bool requires_grad = false;
  };

  Var push(Tensor v, std::vector<int> parents, BackwardFn fn, bool rg) {
    nodes_.push_back(Node{std::move(v), Tensor(), std::move(parents), std::move(fn), rg});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  size_t check(Var v) const {
    if (!v.valid() || static_cast<size_t>(v.id) >= nodes_.size())
      throw std::out_of_range("Tape: invalid var");
    return static_cast<size_t>(v.id);
  }
  int check_int(Var v) const { return static_cast<int>(check(v)); }

  std::vector<Node> nodes_;
};

}  // namespace svr::ad
