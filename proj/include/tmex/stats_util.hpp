#pragma once

#include <cmath>

namespace tmex {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(sup |empirical - uniform| > d) for the Kolmogorov limit distribution,
// evaluated at lambda = sqrt(n) * d.
inline double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Jacobi theta form; converges fast for small lambda.
        const double t = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
        double sum = 0.0;
        for (int j = 1; j <= 20; j += 2) {
            const double term = std::pow(t, static_cast<double>(j) * j);
            sum += term;
            if (term < 1e-18) break;
        }
        const double cdf = std::sqrt(2.0 * M_PI) / lambda * sum;
        return std::min(1.0, std::max(0.0, 1.0 - cdf));
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-18) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

}  // namespace tmex
