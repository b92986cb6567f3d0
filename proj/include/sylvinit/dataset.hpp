#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "sylvinit/labels.hpp"
#include "sylvinit/tensor.hpp"

namespace sylvinit {

/// Images (n, h, w, c) scaled to [0, 1] with one class id per image.
struct LabeledDataset {
    Tensor4 images;
    Labels labels;
    std::size_t num_classes = 0;
    std::string name;

    std::size_t size() const noexcept { return labels.size(); }
    bool empty() const noexcept { return labels.empty(); }

    /// Throws ShapeError/LabelError if the invariants do not hold.
    void validate() const;

    /// Copies the given samples, in the given order.
    LabeledDataset subset(std::span<const std::size_t> indices) const;
};

/// Gathers `indices` of an (n, h, w, c) tensor along the leading axis.
Tensor4 gather_images(const Tensor4& images, std::span<const std::size_t> indices);

}  // namespace sylvinit
