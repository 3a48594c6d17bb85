#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csmc/diffcore/tensor.hpp"

namespace csmc::diff {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;
  bool valid() const noexcept { return id != npos; }
};

/// Reverse-mode recorder. Every op appends a node holding its value and a
/// closure that pushes the node's gradient into its parents. backward() walks
/// the node list in reverse.
///
/// Borrowed tensors (constant_ref, parameter) must outlive the tape.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool record = true) : record_(record) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Tensor value);
  Var constant_ref(const Tensor& value);
  /// Leaf whose gradient is kept on the tape; read it with grad().
  Var variable(Tensor value);
  /// Borrowed trainable tensor; its gradient is accumulated into `sink`
  /// (same length as the tensor). An empty sink makes it a constant.
  Var parameter(const Tensor& value, std::span<double> sink);

  const Tensor& value(Var v) const;
  /// Gradient accumulated on the tape for `v`; empty when none was produced.
  std::span<const double> grad(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(out)/d(out) = 1 for a scalar output and back-propagates.
  void backward(Var out);
  /// Back-propagates an arbitrary cotangent (vector-Jacobian product).
  void backward(Var out, std::span<const double> seed);

  // Op-implementation interface.
  Var push(Tensor value, std::span<const Var> parents, BackwardFn fn);
  Var push(Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
    return push(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(fn));
  }
  const Tensor& value(std::size_t id) const;
  std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
  /// Accumulation target for gradients flowing into `v`, allocated lazily.
  std::span<double> grad_target(Var v);

 private:
  struct Node {
    Tensor owned;
    const Tensor* borrowed = nullptr;
    std::vector<double> grad;
    std::span<double> sink;
    BackwardFn backward;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  bool record_ = true;
};

/// Decides how model tensors enter a tape: as constants for inference, or as
/// parameters whose gradients land in each tensor's own grad buffer.
class Binder {
 public:
  Binder() = default;

  /// Registers a tensor for training. Calls set_requires_grad(true) if needed.
  void track(Tensor& t);

  Var operator()(Tape& tape, const Tensor& t) const;
  bool training() const noexcept { return !sinks_.empty(); }

 private:
  std::unordered_map<const Tensor*, std::span<double>> sinks_;
};

}  // namespace csmc::diff
