#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sylvinit {

/// Row-major 4-D block. Activations use (n, h, w, c); conv weights use
/// (c_o, c_i, f_h, f_w).
class Tensor4 {
public:
    using Dims = std::array<std::size_t, 4>;

    Tensor4() = default;
    explicit Tensor4(Dims dims, double fill = 0.0);
    /// Throws ShapeError unless data.size() equals the product of dims.
    Tensor4(Dims dims, std::vector<double> data);

    const Dims& dims() const noexcept { return dims_; }
    std::size_t dim(std::size_t axis) const noexcept { return dims_[axis]; }
    std::size_t size() const noexcept { return data_.size(); }
    /// Elements per leading index (h*w*c for activations).
    std::size_t stride0() const noexcept { return dims_[1] * dims_[2] * dims_[3]; }

    double& operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) noexcept {
        return data_[((a * dims_[1] + b) * dims_[2] + c) * dims_[3] + d];
    }
    double operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const noexcept {
        return data_[((a * dims_[1] + b) * dims_[2] + c) * dims_[3] + d];
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    /// Elements of the leading index `i` (one image for activations).
    std::span<const double> slice(std::size_t i) const noexcept {
        return {data_.data() + i * stride0(), stride0()};
    }
    std::span<double> slice(std::size_t i) noexcept { return {data_.data() + i * stride0(), stride0()}; }

    std::string shape_string() const;

    friend bool operator==(const Tensor4&, const Tensor4&) = default;

private:
    Dims dims_{0, 0, 0, 0};
    std::vector<double> data_;
};

}  // namespace sylvinit
