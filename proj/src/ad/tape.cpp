#include "ad/tape.hpp"

namespace svr::ad {

void Tape::backward(Var root) {
  const int root_id = check_int(root);
  auto& r = nodes_[static_cast<size_t>(root_id)];
  if (r.value.numel() != 1)
    throw std::invalid_argument("Tape::backward: root must be scalar");
  if (!r.requires_grad) return;

  // Mark nodes that can influence the root via gradient-carrying edges.
  std::vector<char> reach(nodes_.size(), 0);
  std::vector<int> stack{root_id};
  reach[static_cast<size_t>(root_id)] = 1;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    for (int p : nodes_[static_cast<size_t>(id)].parents) {
      auto& pn = nodes_[static_cast<size_t>(p)];
      if (pn.requires_grad && !reach[static_cast<size_t>(p)]) {
        reach[static_cast<size_t>(p)] = 1;
        stack.push_back(p);
      }
    }
  }

  grad_by_id(root_id)[0] = 1.0;
  for (int id = root_id; id >= 0; --id) {
    if (!reach[static_cast<size_t>(id)]) continue;
    auto& n = nodes_[static_cast<size_t>(id)];
    if (n.backward && !n.grad.empty()) n.backward(*this, id);
  }
}

}  // namespace svr::ad
