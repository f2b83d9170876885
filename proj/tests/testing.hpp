#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include <Eigen/Dense>

namespace testing {

/// |a - b| <= rel * max(|b|, 1) elementwise.
inline bool close(double a, double b, double rel = 1e-12) {
    return std::abs(a - b) <= rel * std::max(std::abs(b), 1.0);
}

inline bool close(const Eigen::VectorXd& a, std::initializer_list<double> b, double rel = 1e-12) {
    if (a.size() != static_cast<Eigen::Index>(b.size())) return false;
    Eigen::Index i = 0;
    for (double v : b)
        if (!close(a(i++), v, rel)) return false;
    return true;
}

inline bool close(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double rel = 1e-12) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (!close(a(i), b(i), rel)) return false;
    return true;
}

}  // namespace testing
