#pragma once

#include <cstdint>
#include <vector>

namespace sylvinit {

using ClassId = std::uint32_t;
using Labels = std::vector<ClassId>;

}  // namespace sylvinit
