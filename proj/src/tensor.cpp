#include "riskner/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "riskner/errors.hpp"

namespace riskner::nn {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_product(shape_)) {
        raise(ErrorKind::ShapeMismatch,
              "data length " + std::to_string(data_.size()) + " does not match shape " + shape_str());
    }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

void Tensor::fill(double value) {
    for (double& v : data_) v = value;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Tensor::item() const {
    if (data_.size() != 1) {
        raise(ErrorKind::ShapeMismatch, "item() on tensor of shape " + shape_str());
    }
    return data_[0];
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ", ";
        os << shape_[i];
    }
    os << "]";
    return os.str();
}

}  // namespace riskner::nn
