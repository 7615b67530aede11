#pragma once

#include <cmath>

namespace rashomon {

// Compensated (Neumaier) summation; keeps loss totals order-stable enough
// that dual computation routes land within the pinned tolerances.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

inline constexpr double kThresholdTolerance = 1e-12;

// Closed threshold comparison: membership uses Q <= theta with a fixed
// absolute slack so boundary cases do not flap between computation routes.
inline bool threshold_leq(double a, double b) { return a <= b + kThresholdTolerance; }

}  // namespace rashomon
