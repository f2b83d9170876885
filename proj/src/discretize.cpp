#include "adrc/discretize.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "adrc/polynomial.hpp"
#include "adrc/tuning.hpp"

namespace adrc {

namespace {

void require_sample_time(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError(fmt::format("sampling interval T must be > 0 (got {})", T));
}

void require_order(int n) {
    if (n < 1) throw DomainError(fmt::format("plant order must be >= 1 (got {})", n));
}

// [v, Av, A^2 v, ...] as columns
Matrix krylov(const Matrix& A, const Vector& v) {
    const Eigen::Index m = A.rows();
    Matrix K(m, m);
    K.col(0) = v;
    for (Eigen::Index i = 1; i < m; ++i) K.col(i) = A * K.col(i - 1);
    return K;
}

Matrix matrix_polynomial_power(const Matrix& A, double z0, Eigen::Index m) {
    const Matrix shifted = A - z0 * Matrix::Identity(A.rows(), A.cols());
    Matrix P = Matrix::Identity(A.rows(), A.cols());
    for (Eigen::Index i = 0; i < m; ++i) P = P * shifted;
    return P;
}

}  // namespace

PlantTriple continuous_extended(int n, double b0) {
    require_order(n);
    const int m = n + 1;
    PlantTriple p;
    p.kind = PlantKind::ContinuousExtended;
    p.A = Matrix::Zero(m, m);
    p.A.topRightCorner(n, n).setIdentity();
    p.b = Vector::Zero(m);
    p.b(n - 1) = b0;
    p.c = RowVector::Zero(m);
    p.c(0) = 1.0;
    return p;
}

PlantTriple continuous_virtual(int n) {
    require_order(n);
    PlantTriple p;
    p.kind = PlantKind::ContinuousVirtual;
    p.A = Matrix::Zero(n, n);
    if (n > 1) p.A.topRightCorner(n - 1, n - 1).setIdentity();
    p.b = Vector::Zero(n);
    p.b(n - 1) = 1.0;
    p.c = RowVector::Zero(n);
    p.c(0) = 1.0;
    return p;
}

PlantTriple zoh_series(const PlantTriple& continuous, double T, int terms) {
    require_sample_time(T);
    const Eigen::Index m = continuous.A.rows();
    Matrix A_d = Matrix::Identity(m, m);
    Matrix S = Matrix::Zero(m, m);  // sum A^(i-1) T^i / i!
    Matrix power = Matrix::Identity(m, m);  // A^(i-1) T^(i-1) / (i-1)!
    for (int i = 1; i <= terms; ++i) {
        const Matrix term = power * (T / i);  // A^(i-1) T^i / i!
        S += term;
        power = continuous.A * term;  // A^i T^i / i!
        A_d += power;
    }
    PlantTriple d;
    d.kind = PlantKind::DiscreteZOH;
    d.A = std::move(A_d);
    d.b = S * continuous.b;
    d.c = continuous.c;
    return d;
}

PlantTriple zoh_integrator_chain(int n, double b0, double T) {
    require_order(n);
    require_sample_time(T);
    return zoh_series(continuous_extended(n, b0), T, n + 1);
}

PlantTriple zoh_virtual_plant(int n, double T) {
    require_order(n);
    require_sample_time(T);
    return zoh_series(continuous_virtual(n), T, n);
}

EsoMatrices build_eso(const AdrcDesign& design, const Vector& l, PlacementCheck check) {
    design.validate();
    const int m = design.order + 1;
    if (l.size() != m)
        throw ShapeError(fmt::format("observer gain vector must have {} entries (got {})", m, l.size()));

    const PlantTriple d = zoh_integrator_chain(design.order, design.b0, design.T);
    EsoMatrices eso;
    eso.A_d = d.A;
    eso.b_d = d.b;
    eso.c_d = d.c;
    eso.A_eso = d.A - l * (d.c * d.A);
    eso.b_eso = d.b - l * (d.c * d.b);
    eso.placement_residual = placement_residual(eso.A_eso, dt_pole_locations(design).z_eso);
    if (check == PlacementCheck::Enforce && eso.placement_residual > kPlacementTolerance)
        throw ConditioningError(
            fmt::format("observer eigenvalues deviate from z_eso (residual {:.3g})", eso.placement_residual),
            eso.placement_residual);
    return eso;
}

Vector place_poles(const Matrix& A, const Vector& b, double z0) {
    const Eigen::Index m = A.rows();
    if (A.cols() != m || b.size() != m) throw ShapeError("place_poles: inconsistent dimensions");
    const Matrix C = krylov(A, b);
    Eigen::FullPivLU<Matrix> lu(C.transpose());
    if (!lu.isInvertible()) throw ConditioningError("place_poles: pair (A, b) is not controllable", INFINITY);
    const Vector q = lu.solve(Vector::Unit(m, m - 1));  // q^T = e_m^T C^-1
    const Vector k = (q.transpose() * matrix_polynomial_power(A, z0, m)).transpose();

    const double residual = placement_residual(A - b * k.transpose(), z0);
    if (residual > kPlacementTolerance)
        throw ConditioningError(fmt::format("place_poles: residual {:.3g} exceeds tolerance", residual), residual);
    return k;
}

Vector place_current_observer_poles(const Matrix& A, const RowVector& c, double z0) {
    // eig(A - l c A) = eig(A^T - (A^T c^T) l^T): state feedback on the dual pair.
    const Vector ctA = (c * A).transpose();
    return place_poles(A.transpose(), ctA, z0);
}

const char* to_string(TfVariant v) { return v == TfVariant::SingleTf ? "single" : "dual"; }

TfVariant tf_variant_from_string(const std::string& s) {
    if (s == "single") return TfVariant::SingleTf;
    if (s == "dual") return TfVariant::DualFeedback;
    throw DomainError(fmt::format("unknown transfer-function variant '{}' (expected single or dual)", s));
}

TfCoefficients tf_coefficients_closed_form(const AdrcDesign& design, TfVariant variant) {
    design.validate();
    const int n = design.order;
    if (n != 1 && n != 2)
        throw UnsupportedOrderError(
            fmt::format("closed-form coefficients exist for n = 1 and n = 2 only (got n = {}); use the oracle", n));

    const auto [zc, ze] = dt_pole_locations(design);
    const double b0 = design.b0;
    const double T = design.T;

    TfCoefficients c;
    c.variant = variant;

    if (n == 1) {
        const double bT = b0 * T;
        c.beta.resize(2);
        c.beta << 1.0 / bT * (zc * ze * ze - 2.0 * ze - zc + 2.0),
            1.0 / bT * (2.0 * zc * ze - 2.0 * zc * ze * ze + ze * ze - 1.0);
        if (variant == TfVariant::SingleTf) {
            c.alpha.resize(1);
            c.alpha << -zc * ze * ze;
            c.gamma.resize(3);
            c.gamma << (1.0 - zc) / bT, -2.0 * ze * (1.0 - zc) / bT, ze * ze * (1.0 - zc) / bT;
        } else {
            c.alpha.resize(2);
            c.alpha << -2.0 * ze, ze * ze;
            c.gamma.resize(2);
            c.gamma << zc * ze * ze - 2.0 * ze + 1.0, ze * ze - zc * ze * ze;
            c.k1_over_b0 = (1.0 - zc) / bT;
        }
        return c;
    }

    const double bT2 = b0 * T * T;
    const double zc2 = zc * zc;
    const double ze2 = ze * ze;
    const double ze3 = ze2 * ze;
    const double P = (1.0 + zc) * (1.0 + zc) * ((1.0 + ze) * (1.0 + ze) * (1.0 + ze));

    c.beta.resize(3);
    c.beta << 1.0 / bT2 * (0.25 * P - 2.0 * (zc2 * ze3 + 2.0 * zc + 3.0 * ze - 2.0)),
        1.0 / bT2 * (-P + 2.0 * (1.0 + zc) * (1.0 + zc) + 6.0 * (zc2 * ze3 + 2.0 * zc * ze + ze2 + ze - 1.0)),
        1.0 / bT2 * (-0.25 * P + 2.0 * (-2.0 * zc2 * ze3 + 3.0 * zc2 * ze2 + 2.0 * zc * ze3 + 1.0));

    const double one_minus_zc_sq = (1.0 - zc) * (1.0 - zc);
    if (variant == TfVariant::SingleTf) {
        c.alpha.resize(2);
        c.alpha << -0.125 * P + zc2 * ze3 + 1.0, zc2 * ze3;
        c.gamma.resize(4);
        c.gamma << one_minus_zc_sq / bT2, -3.0 * ze * one_minus_zc_sq / bT2, 3.0 * ze2 * one_minus_zc_sq / bT2,
            -ze3 * one_minus_zc_sq / bT2;
    } else {
        c.alpha.resize(3);
        c.alpha << -3.0 * ze, 3.0 * ze2, -ze3;
        c.gamma.resize(3);
        c.gamma << 0.125 * P - ze * (zc2 * ze2 + 3.0), -0.125 * P + 3.0 * ze2 + 1.0, ze3 * (zc2 - 1.0);
        c.k1_over_b0 = one_minus_zc_sq / bT2;
    }
    return c;
}

namespace {

struct OracleInputs {
    EsoMatrices eso;
    RowVector h;  // [k^T 1] / b0
};

OracleInputs oracle_inputs(const AdrcDesign& design, const Vector& k, const Vector& l) {
    design.validate();
    const int n = design.order;
    if (k.size() != n) throw ShapeError(fmt::format("controller gain vector must have {} entries", n));
    OracleInputs in{build_eso(design, l), RowVector(n + 1)};
    in.h.head(n) = k.transpose();
    in.h(n) = 1.0;
    in.h /= design.b0;
    return in;
}

}  // namespace

Vector feedback_denominator_unfactored(const AdrcDesign& design, const Vector& k, const Vector& l) {
    const OracleInputs in = oracle_inputs(design, k, l);
    const Matrix A_cl = in.eso.A_eso - in.eso.b_eso * in.h;
    return leverrier_faddeev(A_cl).charpoly;
}

TfCoefficients tf_coefficients_oracle(const AdrcDesign& design, const Vector& k, const Vector& l,
                                      TfVariant variant) {
    const OracleInputs in = oracle_inputs(design, k, l);
    const int n = design.order;
    const int m = n + 1;

    // h^T (I - z^-1 M)^-1 g = sum_k (h^T N_k g) z^-k / (1 + sum c_k z^-k)
    auto numerator = [&](const ResolventExpansion& r, const Vector& g) {
        Vector num(m);
        for (int i = 0; i < m; ++i) num(i) = in.h * r.terms[static_cast<size_t>(i)] * g;
        return num;
    };

    TfCoefficients c;
    c.variant = variant;

    if (variant == TfVariant::DualFeedback) {
        const ResolventExpansion r = leverrier_faddeev(in.eso.A_eso);
        c.alpha = r.charpoly.tail(m);
        c.beta = numerator(r, l);
        c.gamma = -numerator(r, in.eso.b_eso);
        c.k1_over_b0 = k(0) / design.b0;
        return c;
    }

    // Closing the u = u_lim loop inside the observer gives Phi_ESO.
    const Matrix A_cl = in.eso.A_eso - in.eso.b_eso * in.h;
    const ResolventExpansion r = leverrier_faddeev(A_cl);
    const Deflation defl = deflate_unit_root(r.charpoly);
    if (std::abs(defl.remainder) > 1e-8)
        throw DomainError(fmt::format(
            "feedback controller has no integrator: denominator(z=1) = {:.3g}; gains are inconsistent",
            defl.remainder));

    c.alpha = defl.quotient.tail(n);
    c.beta = numerator(r, l);

    // C_PF = (k1/b0) (P(w) - w G(w)) / B(w) with G from h^T Phi b_ESO.
    const Vector G = numerator(r, in.eso.b_eso);
    Vector pf = r.charpoly;  // length m + 1
    for (int i = 0; i < m; ++i) pf(i + 1) -= G(i);
    c.gamma = (k(0) / design.b0) * pf;
    return c;
}

TfCoefficients tf_coefficients(const AdrcDesign& design, TfVariant variant) {
    if (design.order <= 2) return tf_coefficients_closed_form(design, variant);
    return tf_coefficients_oracle(design, dt_controller_gains(design), dt_observer_gains(design), variant);
}

double max_relative_deviation(const TfCoefficients& a, const TfCoefficients& b, double rel_tol, double abs_tol) {
    if (a.variant != b.variant) throw ShapeError("coefficient sets belong to different variants");
    const double floor = abs_tol / rel_tol;
    double worst = 0.0;
    auto cmp = [&](const Vector& x, const Vector& y) {
        if (x.size() != y.size()) throw ShapeError("coefficient vectors differ in length");
        for (Eigen::Index i = 0; i < x.size(); ++i)
            worst = std::max(worst, std::abs(x(i) - y(i)) / std::max(std::abs(y(i)), floor));
    };
    cmp(a.alpha, b.alpha);
    cmp(a.beta, b.beta);
    cmp(a.gamma, b.gamma);
    if (a.variant == TfVariant::DualFeedback)
        worst = std::max(worst, std::abs(a.k1_over_b0 - b.k1_over_b0) / std::max(std::abs(b.k1_over_b0), floor));
    return worst;
}

}  // namespace adrc
