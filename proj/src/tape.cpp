#include "riskner/tape.hpp"

#include "riskner/errors.hpp"

namespace riskner::nn {

int Tape::check(Var v) const {
    if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size()) {
        raise(ErrorKind::NoTape, "variable does not reference a live tape node");
    }
    return v.id;
}

Var Tape::leaf(Parameter& param) {
    Node node{"leaf", param.value, Tensor{}, {}, nullptr, &param};
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Tensor value) {
    Node node{"input", std::move(value), Tensor{}, {}, nullptr, nullptr};
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(const char* op, Tensor value, std::vector<int> inputs, BackwardFn backward) {
    if (!value.all_finite()) {
        raise(ErrorKind::NonFiniteValue, std::string("op '") + op + "' produced NaN/Inf");
    }
    Node node{op, std::move(value), Tensor{}, std::move(inputs), std::move(backward), nullptr};
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var loss) {
    if (nodes_.empty()) {
        raise(ErrorKind::NoTape, "backward called with no recorded operations");
    }
    const int loss_id = check(loss);
    if (nodes_[loss_id].value.size() != 1) {
        raise(ErrorKind::ShapeMismatch,
              "backward requires a scalar loss, got shape " + nodes_[loss_id].value.shape_str());
    }

    for (Node& node : nodes_) node.grad = Tensor(node.value.shape());
    nodes_[loss_id].grad[0] = 1.0;

    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
        if (nodes_[id].backward) nodes_[id].backward(*this, id);
    }

    for (Node& node : nodes_) {
        if (node.param == nullptr) continue;
        if (!node.grad.all_finite()) {
            raise(ErrorKind::NonFiniteGradient,
                  "gradient of parameter '" + node.param->name + "' is not finite");
        }
        double* dst = node.param->grad.data();
        const double* src = node.grad.data();
        for (std::size_t i = 0; i < node.grad.size(); ++i) dst[i] += src[i];
    }

    clear();
}

void Tape::clear() { nodes_.clear(); }

}  // namespace riskner::nn
