#pragma once

#include <cmath>

namespace sigood {

// softplus(x) = log(1 + e^x), overflow-safe form. Exact log(2) at x = 0.
inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

// Branch keeps the exponential argument non-positive.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

// -log(sigmoid(x)) without forming the sigmoid.
inline double neg_log_sigmoid(double x) { return softplus(-x); }

}  // namespace sigood
