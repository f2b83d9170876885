#pragma once

#include <vector>

#include "adrc/design.hpp"

namespace adrc {

// Polynomials are stored as coefficient vectors in descending powers of z,
// which for a monic polynomial is the same as ascending powers of z^-1:
// [1, c1, ..., cm] <-> z^m + c1 z^(m-1) + ... + cm <-> 1 + c1 z^-1 + ... + cm z^-m.

/// Coefficients of (z - a)^m.
Vector binomial_power(double a, int m);

/// Value of sum_i p[i] * w^i.
double evaluate_ascending(const Vector& p, double w);

/**
 * Characteristic polynomial det(zI - M) from the eigenvalues of M after an
 * exact (power-of-two) diagonal balancing. The coefficients are well
 * conditioned even when individual repeated eigenvalues are not.
 */
Vector characteristic_polynomial(const Matrix& M);

/// Largest coefficient deviation of det(zI - M) from (z - z0)^m.
double placement_residual(const Matrix& M, double z0);

/// Parlett-Reinsch balancing with power-of-two scale factors: returns D^-1 M D.
Matrix balance(const Matrix& M);

/**
 * Leverrier-Faddeev expansion of the resolvent:
 *   (zI - M)^-1 = sum_{k=0}^{m-1} N_k z^(m-1-k) / det(zI - M),
 *   det(zI - M) = z^m + c_1 z^(m-1) + ... + c_m.
 */
struct ResolventExpansion {
    std::vector<Matrix> terms;  // N_0 .. N_{m-1}
    Vector charpoly;            // [1, c_1, ..., c_m]
};

ResolventExpansion leverrier_faddeev(const Matrix& M);

/**
 * Divide p(w) (ascending powers of w = z^-1) by (1 - w).
 * Returns the quotient (one coefficient shorter) and the remainder p(1).
 */
struct Deflation {
    Vector quotient;
    double remainder = 0.0;
};

Deflation deflate_unit_root(const Vector& p);

}  // namespace adrc
