#pragma once

#include <functional>
#include <string>
#include <vector>

#include "riskner/tensor.hpp"

namespace riskner::nn {

/// Named trainable tensor plus its gradient accumulator.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter(std::string name_, Tensor value_)
        : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

    void zero_grad() { grad.fill(0.0); }
};

/// Handle to a node on a Tape.
struct Var {
    int id = -1;
    bool valid() const noexcept { return id >= 0; }
};

/// Records the forward computation as a topologically ordered list of nodes;
/// backward() walks it once in reverse, accumulates into Parameter.grad for
/// every parameter leaf, then clears the tape. A tape belongs to one training
/// task at a time.
class Tape {
  public:
    using BackwardFn = std::function<void(Tape&, int)>;

    /// Leaf tracking a parameter; backward() flushes the leaf gradient into
    /// param.grad (accumulating across calls until zero_grad).
    Var leaf(Parameter& param);

    /// Leaf holding a constant input; no gradient is propagated out of it.
    Var input(Tensor value);

    /// Records one operation. `backward` reads grad(node) and accumulates
    /// into the grads of `inputs`; pass nullptr for non-differentiable ops.
    Var record(const char* op, Tensor value, std::vector<int> inputs, BackwardFn backward);

    const Tensor& value(Var v) const { return nodes_[check(v)].value; }
    Tensor& grad_of(int id) { return nodes_[id].grad; }
    const Tensor& value_of(int id) const { return nodes_[id].value; }

    /// Reverse pass from a scalar loss. Populates Parameter.grad and clears
    /// the tape.
    void backward(Var loss);

    void clear();
    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }

  private:
    struct Node {
        const char* op;
        Tensor value;
        Tensor grad;
        std::vector<int> inputs;
        BackwardFn backward;
        Parameter* param = nullptr;
    };

    int check(Var v) const;

    std::vector<Node> nodes_;
};

}  // namespace riskner::nn
