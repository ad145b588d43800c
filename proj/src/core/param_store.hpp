#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace svr::core {

// Ordered, named collection of parameter tensors. Order is insertion order and
// is part of the contract: the optimizer, the tape binding and the checkpoint
// format all walk parameters in this order.
class ParamStore {
public:
  int add(const std::string& name, Tensor t) {
    if (find(name) >= 0) throw std::invalid_argument("ParamStore: duplicate name " + name);
    names_.push_back(name);
    tensors_.push_back(std::move(t));
    return static_cast<int>(tensors_.size()) - 1;
  }

  int find(const std::string& name) const {
    for (size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    return -1;
  }

  int index(const std::string& name) const {
    int i = find(name);
    if (i < 0) throw std::out_of_range("ParamStore: no parameter named " + name);
    return i;
  }

  Tensor& get(const std::string& name) { return tensors_[static_cast<size_t>(index(name))]; }
  const Tensor& get(const std::string& name) const {
    return tensors_[static_cast<size_t>(index(name))];
  }

  Tensor& at(int i) { return tensors_[static_cast<size_t>(i)]; }
  const Tensor& at(int i) const { return tensors_[static_cast<size_t>(i)]; }
  const std::string& name(int i) const { return names_[static_cast<size_t>(i)]; }

  int size() const { return static_cast<int>(tensors_.size()); }

  size_t total_params() const {
    size_t n = 0;
    for (const auto& t : tensors_) n += t.numel();
    return n;
  }

private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

}  // namespace svr::core
