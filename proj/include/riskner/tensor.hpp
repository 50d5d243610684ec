#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace riskner::nn {

/// Dense row-major array of 64-bit floats. Plain value type; shape is a list
/// of dimensions whose product equals the data length.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);
    Tensor(std::initializer_list<std::size_t> shape) : Tensor(std::vector<std::size_t>(shape)) {}

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor scalar(double value) { return Tensor({1}, {value}); }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    void fill(double value);
    bool all_finite() const;

    /// Scalar convenience: value of a single-element tensor.
    double item() const;

    std::string shape_str() const;

  private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

}  // namespace riskner::nn
