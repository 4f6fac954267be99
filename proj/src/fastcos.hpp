#pragma once

#include <cstddef>

namespace knewton::detail {

// Elementwise cos over a contiguous buffer. Lives in its own translation
// unit built with relaxed FP flags so the compiler can use the vector math
// library; callers do their own finiteness checks.
void cos_inplace(double* data, std::ptrdiff_t n);

}  // namespace knewton::detail
