#include "adrc/polynomial.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace adrc {

Vector binomial_power(double a, int m) {
    Vector p = Vector::Zero(m + 1);
    p(0) = 1.0;
    // repeated multiplication by (z - a)
    for (int deg = 1; deg <= m; ++deg) {
        for (int i = deg; i >= 1; --i) p(i) -= a * p(i - 1);
    }
    return p;
}

double evaluate_ascending(const Vector& p, double w) {
    double acc = 0.0;
    for (Eigen::Index i = p.size() - 1; i >= 0; --i) acc = acc * w + p(i);
    return acc;
}

Matrix balance(const Matrix& M) {
    Matrix B = M;
    const Eigen::Index m = B.rows();
    constexpr double radix = 2.0;
    constexpr double radix2 = radix * radix;
    bool converged = false;
    while (!converged) {
        converged = true;
        for (Eigen::Index i = 0; i < m; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) {
                if (j == i) continue;
                c += std::abs(B(j, i));
                r += std::abs(B(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix2;
            }
            if ((c + r) / f < 0.95 * s) {
                converged = false;
                B.row(i) /= f;
                B.col(i) *= f;
            }
        }
    }
    return B;
}

Vector characteristic_polynomial(const Matrix& M) {
    const Eigen::Index m = M.rows();
    if (m != M.cols()) throw ShapeError("characteristic_polynomial: matrix must be square");
    if (m == 0) return Vector::Ones(1);

    Eigen::EigenSolver<Matrix> solver(balance(M), false);
    const auto& roots = solver.eigenvalues();

    std::vector<std::complex<double>> p(static_cast<size_t>(m + 1), 0.0);
    p[0] = 1.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index i = k + 1; i >= 1; --i) p[i] -= roots(k) * p[i - 1];
    }
    Vector out(m + 1);
    for (Eigen::Index i = 0; i <= m; ++i) out(i) = p[i].real();
    return out;
}

double placement_residual(const Matrix& M, double z0) {
    const Vector actual = characteristic_polynomial(M);
    const Vector target = binomial_power(z0, static_cast<int>(M.rows()));
    return (actual - target).cwiseAbs().maxCoeff();
}

ResolventExpansion leverrier_faddeev(const Matrix& M) {
    const Eigen::Index m = M.rows();
    if (m != M.cols()) throw ShapeError("leverrier_faddeev: matrix must be square");

    ResolventExpansion out;
    out.charpoly = Vector::Zero(m + 1);
    out.charpoly(0) = 1.0;
    Matrix N = Matrix::Identity(m, m);
    for (Eigen::Index k = 1; k <= m; ++k) {
        out.terms.push_back(N);
        const Matrix MN = M * N;
        const double c = -MN.trace() / static_cast<double>(k);
        out.charpoly(k) = c;
        N = MN;
        N.diagonal().array() += c;
    }
    return out;
}

Deflation deflate_unit_root(const Vector& p) {
    Deflation out;
    const Eigen::Index len = p.size();
    if (len < 2) throw ShapeError("deflate_unit_root: polynomial of degree >= 1 required");
    out.quotient.resize(len - 1);
    double q = 0.0;
    for (Eigen::Index i = 0; i < len - 1; ++i) {
        q = p(i) + q;
        out.quotient(i) = q;
    }
    out.remainder = p(len - 1) + q;
    return out;
}

}  // namespace adrc
