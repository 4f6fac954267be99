#include "fastcos.hpp"

#include <cmath>

namespace knewton::detail {

void cos_inplace(double* data, std::ptrdiff_t n) {
  for (std::ptrdiff_t i = 0; i < n; ++i) data[i] = std::cos(data[i]);
}

}  // namespace knewton::detail
