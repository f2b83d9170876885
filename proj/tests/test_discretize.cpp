#include <doctest.h>

#include <cmath>

#include "adrc/discretize.hpp"
#include "adrc/polynomial.hpp"
#include "adrc/tuning.hpp"
#include "oracles.hpp"
#include "testing.hpp"

using namespace adrc;
using testing::close;

namespace {

Matrix augmented_exp(const PlantTriple& p, double T) {
    const Eigen::Index m = p.A.rows();
    Matrix M = Matrix::Zero(m + 1, m + 1);
    M.topLeftCorner(m, m) = p.A * T;
    M.topRightCorner(m, 1) = p.b * T;
    return oracle::expm(M);
}

}  // namespace

TEST_CASE("zero-order hold of the extended integrator chain") {
    const PlantTriple d = zoh_integrator_chain(2, 2.0, 0.5);
    Matrix A(3, 3);
    A << 1.0, 0.5, 0.125, 0.0, 1.0, 0.5, 0.0, 0.0, 1.0;
    CHECK((d.A - A).cwiseAbs().maxCoeff() == 0.0);
    CHECK(close(d.b, {0.25, 1.0, 0.0}, 1e-15));
    CHECK(close(d.c.transpose(), {1.0, 0.0, 0.0}));
    CHECK(d.kind == PlantKind::DiscreteZOH);
}

TEST_CASE("truncated series is exact for nilpotent plants") {
    for (int n = 1; n <= 4; ++n)
        for (double T : {1e-3, 0.05, 0.7}) {
            const PlantTriple ct = continuous_extended(n, 3.0);
            const PlantTriple d = zoh_integrator_chain(n, 3.0, T);
            const Matrix E = augmented_exp(ct, T);
            const Eigen::Index m = n + 1;
            CHECK((d.A - E.topLeftCorner(m, m)).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((d.b - E.topRightCorner(m, 1)).cwiseAbs().maxCoeff() < 1e-13);

            const PlantTriple v = zoh_virtual_plant(n, T);
            const Matrix Ev = augmented_exp(continuous_virtual(n), T);
            CHECK((v.A - Ev.topLeftCorner(n, n)).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((v.b - Ev.topRightCorner(n, 1)).cwiseAbs().maxCoeff() < 1e-13);
        }
    CHECK_THROWS_AS(zoh_integrator_chain(0, 1.0, 0.1), DomainError);
    CHECK_THROWS_AS(zoh_integrator_chain(1, 1.0, -0.1), DomainError);
}

TEST_CASE("current observer matrices") {
    const AdrcDesign d{2, 1.0, 10.0, 5.0, std::log(2.0) / 50.0};  // z_eso = 0.5
    const EsoMatrices eso = build_eso(d, dt_observer_gains(d));
    CHECK(eso.A_eso.determinant() == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(eso.placement_residual <= kPlacementTolerance);
    CHECK(close(eso.b_eso, eso.b_d - dt_observer_gains(d) * (eso.c_d * eso.b_d)));

    CHECK_THROWS_AS(build_eso(d, Vector::Ones(2)), ShapeError);
    CHECK_NOTHROW(build_eso(d, Vector::Ones(3)));
    CHECK_THROWS_AS(build_eso(d, Vector::Ones(3), PlacementCheck::Enforce), ConditioningError);
}

TEST_CASE("numeric pole placement") {
    for (int n = 2; n <= 5; ++n) {
        const PlantTriple d = zoh_integrator_chain(n, 1.0, 1.0);
        const Vector l = place_current_observer_poles(d.A, d.c, 0.4);
        CHECK(placement_residual(d.A - l * (d.c * d.A), 0.4) <= kPlacementTolerance);
    }
    const AdrcDesign d{2, 1.0, 10.0, 5.0, 0.02};
    const PlantTriple p = zoh_integrator_chain(2, 1.0, d.T);
    CHECK(close(place_current_observer_poles(p.A, p.c, dt_pole_locations(d).z_eso), dt_observer_gains(d), 1e-8));

    Matrix A = Matrix::Identity(2, 2);
    Vector b(2);
    b << 1.0, 0.0;
    CHECK_THROWS_AS(place_poles(A, b, 0.5), ConditioningError);
    CHECK_THROWS_AS(place_poles(A, Vector::Ones(3), 0.5), ShapeError);
}

TEST_CASE("closed-form coefficient tables agree with the resolvent oracle") {
    for (int n : {1, 2})
        for (double x : {0.01, 0.05, 0.1, 0.5})
            for (double keso : {3.0, 5.0, 10.0})
                for (double b0 : {1.0, 1e4})
                    for (TfVariant v : {TfVariant::SingleTf, TfVariant::DualFeedback}) {
                        const AdrcDesign d{n, b0, 10.0, keso, x / 10.0};
                        const TfCoefficients closed = tf_coefficients_closed_form(d, v);
                        const TfCoefficients ref =
                            tf_coefficients_oracle(d, dt_controller_gains(d), dt_observer_gains(d), v);
                        CHECK(max_relative_deviation(closed, ref) <= 1e-9);
                        CHECK(closed.order() == n);
                    }
}

TEST_CASE("coefficient structure") {
    const AdrcDesign d{2, 3.0, 10.0, 5.0, 0.01};
    const TfCoefficients single = tf_coefficients(d, TfVariant::SingleTf);
    CHECK(single.alpha.size() == 2);
    CHECK(single.beta.size() == 3);
    CHECK(single.gamma.size() == 4);
    CHECK(single.gamma.sum() / single.beta.sum() == doctest::Approx(1.0).epsilon(1e-9));

    const TfCoefficients dual = tf_coefficients(d, TfVariant::DualFeedback);
    CHECK(dual.alpha.size() == 3);
    CHECK(dual.gamma.size() == 3);
    CHECK(close(dual.alpha, oracle::binomial_expansion(dt_pole_locations(d).z_eso, 3).tail(3), 1e-12));
    CHECK(dual.k1_over_b0 == doctest::Approx(dt_controller_gains(d)(0) / 3.0).epsilon(1e-12));

    const Vector den = feedback_denominator_unfactored(d, dt_controller_gains(d), dt_observer_gains(d));
    CHECK(std::abs(evaluate_ascending(den, 1.0)) < 1e-10);
}

TEST_CASE("orders beyond two go through the oracle") {
    const AdrcDesign d{3, 1.0, 10.0, 5.0, 0.01};
    CHECK_THROWS_AS(tf_coefficients_closed_form(d, TfVariant::DualFeedback), UnsupportedOrderError);
    const TfCoefficients c = tf_coefficients(d, TfVariant::SingleTf);
    CHECK(c.order() == 3);
    CHECK(c.gamma.sum() / c.beta.sum() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("the feedback loop keeps its integrator for arbitrary gains") {
    const AdrcDesign d{2, 2.0, 10.0, 5.0, 0.01};
    Vector k(2), l(3);
    k << 3.0, 0.7;
    l << 0.4, 20.0, 0.0;
    const Vector den = feedback_denominator_unfactored(d, k, l);
    CHECK(std::abs(evaluate_ascending(den, 1.0)) < 1e-10);
    CHECK_NOTHROW(tf_coefficients_oracle(d, k, l, TfVariant::SingleTf));
    CHECK_THROWS_AS(tf_coefficients_oracle(d, Vector::Ones(1), l, TfVariant::DualFeedback), ShapeError);
}

TEST_CASE("coefficient comparison") {
    const AdrcDesign d{1, 1.0, 10.0, 5.0, 0.01};
    const TfCoefficients a = tf_coefficients(d, TfVariant::DualFeedback);
    TfCoefficients b = a;
    CHECK(max_relative_deviation(a, b) == 0.0);
    b.beta(0) *= 1.0 + 1e-6;
    CHECK(max_relative_deviation(b, a) == doctest::Approx(1e-6).epsilon(1e-6));
    CHECK_THROWS_AS(max_relative_deviation(a, tf_coefficients(d, TfVariant::SingleTf)), ShapeError);
    CHECK_THROWS_AS(max_relative_deviation(a, tf_coefficients(AdrcDesign{2, 1.0, 10.0, 5.0, 0.01},
                                                              TfVariant::DualFeedback)),
                    ShapeError);
    CHECK(tf_variant_from_string("single") == TfVariant::SingleTf);
    CHECK(std::string(to_string(TfVariant::DualFeedback)) == "dual");
    CHECK_THROWS_AS(tf_variant_from_string("triple"), DomainError);
}
