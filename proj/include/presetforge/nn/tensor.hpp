#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "presetforge/error.hpp"

namespace presetforge::nn {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& s);

inline std::size_t shape_numel(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

/// Dense row-major tensor. Scalar is float for training and double for
/// gradient checking.
template <class Scalar>
class BasicTensor {
public:
    using value_type = Scalar;

    BasicTensor() = default;
    explicit BasicTensor(Shape shape, Scalar fill = Scalar(0)) : shape_(std::move(shape)) {
        for (auto d : shape_) {
            if (d == 0) throw Error(Errc::ShapeMismatch, "zero-sized dimension in " + shape_string(shape_));
        }
        data_.assign(shape_numel(shape_), fill);
    }
    BasicTensor(Shape shape, std::vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != shape_numel(shape_)) {
            throw Error(Errc::ShapeMismatch, "data length does not match " + shape_string(shape_));
        }
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    Scalar* data() noexcept { return data_.data(); }
    const Scalar* data() const noexcept { return data_.data(); }
    std::span<Scalar> span() noexcept { return data_; }
    std::span<const Scalar> span() const noexcept { return data_; }
    std::vector<Scalar>& vec() noexcept { return data_; }
    const std::vector<Scalar>& vec() const noexcept { return data_; }

    Scalar& operator[](std::size_t i) noexcept { return data_[i]; }
    Scalar operator[](std::size_t i) const noexcept { return data_[i]; }

    /// 4-D accessor (N, C, H, W).
    Scalar& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) noexcept {
        return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    Scalar at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const noexcept {
        return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }

    void fill(Scalar v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(Scalar(0)); }

    BasicTensor& operator+=(const BasicTensor& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    void require_same_shape(const BasicTensor& o) const {
        if (shape_ != o.shape_) {
            throw Error(Errc::ShapeMismatch, shape_string(shape_) + " vs " + shape_string(o.shape_));
        }
    }

    static BasicTensor zeros_like(const BasicTensor& t) { return BasicTensor(t.shape()); }

    template <class Other>
    BasicTensor<Other> cast() const {
        return BasicTensor<Other>(shape_, std::vector<Other>(data_.begin(), data_.end()));
    }

    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

private:
    Shape shape_;
    std::vector<Scalar> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// Named parameter (or gradient) set; std::map keeps iteration sorted.
template <class Scalar>
struct BasicParams {
    std::map<std::string, BasicTensor<Scalar>> tensors;
    std::string version = "deep-preset/1";

    BasicTensor<Scalar>& operator[](const std::string& name) {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw Error(Errc::CheckpointMismatch, "missing parameter " + name);
        return it->second;
    }
    const BasicTensor<Scalar>& operator[](const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw Error(Errc::CheckpointMismatch, "missing parameter " + name);
        return it->second;
    }
    bool contains(const std::string& name) const { return tensors.count(name) != 0; }
    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& [_, t] : tensors) n += t.size();
        return n;
    }

    /// Same names and shapes, all zeros.
    BasicParams zeros_like() const {
        BasicParams g;
        g.version = version;
        for (const auto& [name, t] : tensors) g.tensors.emplace(name, BasicTensor<Scalar>(t.shape()));
        return g;
    }
    void zero() {
        for (auto& [_, t] : tensors) t.zero();
    }

    template <class Other>
    BasicParams<Other> cast() const {
        BasicParams<Other> out;
        out.version = version;
        for (const auto& [name, t] : tensors) out.tensors.emplace(name, t.template cast<Other>());
        return out;
    }

    friend bool operator==(const BasicParams&, const BasicParams&) = default;
};

using ModelParams = BasicParams<float>;
using ModelParamsD = BasicParams<double>;

}  // namespace presetforge::nn
