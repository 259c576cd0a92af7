#pragma once

#include <vector>

#include "abel/rational.hpp"

namespace abel {

using IntMatrix = std::vector<std::vector<Int>>;

// Invariant factors t_1 | t_2 | ... of an integer matrix (Smith normal
// form diagonal, including any trailing zeros for free directions).
// All factors are non-negative and the product of the first k equals the
// gcd of the k x k minors.  Empty matrix gives an empty list.
std::vector<Int> smith_normal_form(IntMatrix matrix);

} // namespace abel
