#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibp {

/// Dense n-dimensional array of doubles in row-major order.
///
/// A rank-0 tensor (empty shape, one element) is the scalar carrier used by
/// reductions and losses. All numeric state in the project -- parameters,
/// activations, gradients, Q tables -- lives in this type.
class Tensor {
public:
    Tensor() = default;

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (numel_of(shape_) != data_.size())
            throw std::invalid_argument("Tensor: shape " + shape_string(shape_) +
                                        " does not match data length " + std::to_string(data_.size()));
    }

    static Tensor zeros(std::vector<std::size_t> shape) {
        std::size_t n = numel_of(shape);
        return Tensor(std::move(shape), std::vector<double>(n, 0.0));
    }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        std::size_t n = numel_of(shape);
        return Tensor(std::move(shape), std::vector<double>(n, v));
    }

    static Tensor scalar(double v) { return Tensor({}, {v}); }

    static Tensor vector(std::vector<double> v) {
        std::size_t n = v.size();
        return Tensor({n}, std::move(v));
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
        return Tensor({rows, cols}, std::move(v));
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_.size(); }
    bool is_scalar() const { return data_.size() == 1; }

    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t rows() const { return extent(0); }
    std::size_t cols() const { return extent(1); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    double item() const {
        if (data_.size() != 1)
            throw std::invalid_argument("Tensor::item: tensor has " + std::to_string(data_.size()) +
                                        " elements, expected 1");
        return data_[0];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

    static std::size_t numel_of(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t e : shape) n *= e;
        return n;
    }

    static std::string shape_string(const std::vector<std::size_t>& shape) {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }

    std::string shape_string() const { return shape_string(shape_); }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

}  // namespace ibp
