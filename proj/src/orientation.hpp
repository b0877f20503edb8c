#pragma once

#include "flowdist/types.hpp"

#include <cmath>

namespace flowdist::detail {

// Flips v so that its largest-magnitude entry (lowest index on ties) is positive.
inline void orient(Eigen::Ref<Vector> v) {
    const double largest = v.cwiseAbs().maxCoeff();
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= largest * (1.0 - 1e-10)) {
            if (v(i) < 0.0) {
                v = -v;
            }
            return;
        }
    }
}

} // namespace flowdist::detail
