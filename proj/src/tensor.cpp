#include "sylvinit/tensor.hpp"

#include <utility>

#include "sylvinit/errors.hpp"

namespace sylvinit {

namespace {
std::size_t product(const Tensor4::Dims& d) { return d[0] * d[1] * d[2] * d[3]; }
}  // namespace

Tensor4::Tensor4(Dims dims, double fill) : dims_(dims), data_(product(dims), fill) {}

Tensor4::Tensor4(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != product(dims_)) {
        throw ShapeError("Tensor4: data length " + std::to_string(data_.size()) +
                         " does not match dims " + shape_string());
    }
}

std::string Tensor4::shape_string() const {
    return "(" + std::to_string(dims_[0]) + "," + std::to_string(dims_[1]) + "," +
           std::to_string(dims_[2]) + "," + std::to_string(dims_[3]) + ")";
}

}  // namespace sylvinit
