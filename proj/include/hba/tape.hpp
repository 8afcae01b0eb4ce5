#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "hba/array.hpp"

namespace hba {

class Tape;

// Handle to a node on a tape. Cheap to copy; does not own anything.
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  const Array& val() const;
  bool requires_grad() const;
  const std::vector<std::size_t>& shape() const { return val().shape(); }
  double item() const { return val().item(); }
};

// Records forward operations and replays them in reverse for gradients.
// One tape per logical evaluation; not thread-safe for concurrent writes.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Value leaf(Array v, bool requires_grad = false) {
    nodes_.push_back(Node{std::move(v), requires_grad, {}, nullptr});
    return Value{this, static_cast<int>(nodes_.size()) - 1};
  }

  // Records an op. The backward fn is kept only when a parent needs grads.
  Value record(Array out, std::vector<int> parents, BackwardFn fn) {
    bool needs = false;
    for (int p : parents) needs = needs || nodes_[p].requires_grad;
    nodes_.push_back(Node{std::move(out), needs, std::move(parents),
                          needs ? std::move(fn) : nullptr});
    return Value{this, static_cast<int>(nodes_.size()) - 1};
  }

  const Array& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient accumulator for a node; allocated on first touch.
  Array& grad(int id) {
    if (grads_.size() != nodes_.size()) grads_.resize(nodes_.size());
    if (grads_[id].numel() == 0 && nodes_[id].value.numel() != 0)
      grads_[id] = Array::zeros(nodes_[id].value.shape());
    return grads_[id];
  }

  // Reverse pass from a scalar loss. Node order is already topological
  // (ops are recorded after their inputs), so a backward sweep suffices.
  void backward(const Value& loss) {
    if (loss.tape != this) throw std::logic_error("backward: foreign value");
    if (!nodes_[loss.id].value.is_scalar())
      throw std::logic_error("backward: loss must be scalar, got shape " +
                             Array::shape_str(nodes_[loss.id].value.shape()));
    grads_.assign(nodes_.size(), Array{});
    grad(loss.id)[0] = 1.0;
    for (int i = loss.id; i >= 0; --i) {
      if (!nodes_[i].backward || !nodes_[i].requires_grad) continue;
      if (i < static_cast<int>(grads_.size()) && grads_[i].numel() == 0)
        continue;  // never reached from the loss
      nodes_[i].backward(*this, i);
    }
  }

 private:
  struct Node {
    Array value;
    bool requires_grad;
    std::vector<int> parents;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  std::vector<Array> grads_;
};

inline const Array& Value::val() const { return tape->value(id); }
inline bool Value::requires_grad() const { return tape->requires_grad(id); }

}  // namespace hba
