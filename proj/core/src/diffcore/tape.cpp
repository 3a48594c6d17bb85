#include "csmc/diffcore/tape.hpp"

#include <string>
#include <utility>

#include "csmc/error.hpp"

namespace csmc::diff {

Var Tape::constant(Tensor value) {
  Node node;
  node.owned = std::move(value);
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

Var Tape::constant_ref(const Tensor& value) {
  Node node;
  node.borrowed = &value;
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  Node node;
  node.owned = std::move(value);
  node.needs_grad = record_;
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

Var Tape::parameter(const Tensor& value, std::span<double> sink) {
  if (!sink.empty() && sink.size() != value.size()) {
    throw DimensionError("gradient sink of length " + std::to_string(sink.size()) +
                         " for parameter " + to_string(value.shape()));
  }
  Node node;
  node.borrowed = &value;
  node.sink = sink;
  node.needs_grad = record_ && !sink.empty();
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& node = nodes_[id];
  return node.borrowed ? *node.borrowed : node.owned;
}

const Tensor& Tape::value(Var v) const {
  if (v.id >= nodes_.size()) throw Error("invalid tape variable");
  return value(v.id);
}

std::span<const double> Tape::grad(Var v) const {
  const Node& node = nodes_.at(v.id);
  if (!node.sink.empty()) return node.sink;
  return node.grad;
}

Var Tape::push(Tensor value, std::span<const Var> parents, BackwardFn fn) {
  Node node;
  node.owned = std::move(value);
  if (record_) {
    for (Var p : parents) {
      if (p.valid() && nodes_[p.id].needs_grad) {
        node.needs_grad = true;
        break;
      }
    }
    if (node.needs_grad) node.backward = std::move(fn);
  }
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1};
}

std::span<double> Tape::grad_target(Var v) {
  Node& node = nodes_[v.id];
  if (!node.sink.empty()) return node.sink;
  if (node.grad.empty()) node.grad.assign(value(v.id).size(), 0.0);
  return node.grad;
}

void Tape::backward(Var out) {
  if (value(out).size() != 1) {
    throw DimensionError("backward() without a seed needs a scalar output, got " +
                         to_string(value(out).shape()));
  }
  const double one = 1.0;
  backward(out, std::span<const double>(&one, 1));
}

void Tape::backward(Var out, std::span<const double> seed) {
  if (!record_) throw Error("backward() on a tape that does not record");
  if (seed.size() != value(out).size()) {
    throw DimensionError("seed length " + std::to_string(seed.size()) + " for output " +
                         to_string(value(out).shape()));
  }
  if (!nodes_[out.id].needs_grad) return;
  auto target = grad_target(out);
  for (std::size_t i = 0; i < seed.size(); ++i) target[i] += seed[i];

  for (std::size_t id = out.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.needs_grad || !node.backward || node.grad.empty()) continue;
    node.backward(*this, id);
  }
}

void Binder::track(Tensor& t) {
  if (!t.requires_grad()) t.set_requires_grad(true);
  sinks_[&t] = t.grad();
}

Var Binder::operator()(Tape& tape, const Tensor& t) const {
  if (auto it = sinks_.find(&t); it != sinks_.end()) return tape.parameter(t, it->second);
  return tape.constant_ref(t);
}

}  // namespace csmc::diff
