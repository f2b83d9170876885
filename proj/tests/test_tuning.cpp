#include <doctest.h>

#include <cmath>

#include "adrc/discretize.hpp"
#include "adrc/polynomial.hpp"
#include "adrc/tuning.hpp"
#include "testing.hpp"

using namespace adrc;
using testing::close;

namespace {
const AdrcDesign kFirst{1, 1.0, 10.0, 10.0, 0.05};
const AdrcDesign kSecond{2, 1.0, 10.0, 10.0, 0.05};
}  // namespace

TEST_CASE("discrete pole locations") {
    const PoleLocations z = dt_pole_locations(AdrcDesign{1, 1.0, 10.0, 2.0, 0.05});
    CHECK(close(z.z_cl, 0.6065306597126334236, 1e-15));
    CHECK(close(z.z_eso, 0.36787944117144233, 1e-15));
    CHECK(close(dt_pole_locations(kFirst).z_eso, std::exp(-5.0), 1e-15));
    CHECK(close(dt_pole_locations(AdrcDesign{1, 1.0, 1.0, 1.0, 0.1}).z_cl, 0.90483741803595957316, 1e-15));
}

TEST_CASE("discrete controller gains, closed form") {
    CHECK(close(dt_controller_gains(AdrcDesign{1, 1.0, 10.0, 10.0, 0.001}), {9.9501662508319464261}, 1e-12));
    CHECK(close(dt_controller_gains(kSecond), {61.927248698470189755, 14.190592394032908312}, 1e-12));
}

TEST_CASE("discrete observer gains, closed form") {
    const AdrcDesign d{1, 1.0, 10.0, 2.0, 0.05};
    CHECK(close(dt_observer_gains_from_pole(1, 0.5, 0.01), {0.75, 25.0}, 1e-14));
    CHECK(close(dt_observer_gains_from_pole(2, 0.5, 0.1), {0.875, 5.625, 12.5}, 1e-14));
    CHECK(close(dt_observer_gains(AdrcDesign{1, 1.0, 10.0, 10.0, 0.001}),
                {0.18126924692201814133, 9.0559170060627123414}, 1e-12));
    CHECK(dt_observer_gains(d).size() == 2);
}

TEST_CASE("continuous gains") {
    CHECK(close(ct_observer_gains(AdrcDesign{1, 1.0, 10.0, 10.0, 0.01}), {200.0, 10000.0}));
    CHECK(close(ct_observer_gains(AdrcDesign{2, 1.0, 1.0, 10.0, 0.01}), {30.0, 300.0, 1000.0}));
    CHECK(close(ct_controller_gains(AdrcDesign{3, 1.0, 2.0, 10.0, 0.01}), {8.0, 12.0, 6.0}));
    CHECK(close(ct_controller_gains(kFirst), {10.0}));
}

TEST_CASE("a pole at z = 1 gives zero gains") {
    CHECK(close(dt_controller_gains_from_pole(2, 1.0, 0.1), {0.0, 0.0}));
    CHECK(close(dt_observer_gains_from_pole(1, 1.0, 0.1), {0.0, 0.0}));
}

TEST_CASE("numeric placement for n = 3..5 places every pole") {
    for (int n = 3; n <= 5; ++n) {
        for (double x : {0.01, 0.1, 0.5}) {
            const AdrcDesign d{n, 2.0, 10.0, 4.0, x / 10.0};
            const Vector k = dt_controller_gains(d);
            const Vector l = dt_observer_gains(d);
            CHECK(k.size() == n);
            CHECK(l.size() == n + 1);
            CHECK(k.allFinite());
            CHECK(l.allFinite());
        }
    }
}

TEST_CASE("closed-form gains match numeric placement") {
    for (int n : {1, 2})
        for (double x : {0.01, 0.1, 0.5, 1.0}) {
            const double T = x / 10.0;
            const double z = std::exp(-x);
            const PlantTriple vp = zoh_virtual_plant(n, T);
            const Vector k = dt_controller_gains_from_pole(n, z, T);
            CHECK(close(k, place_poles(vp.A, vp.b, z), 1e-8));
            CHECK(placement_residual(vp.A - vp.b * k.transpose(), z) <= kPlacementTolerance);
        }
}

TEST_CASE("CT/DT gain ratios") {
    CHECK(close(ct_dt_gain_ratio(1, 0.05)(0), 1.0252083246532944452, 1e-14));
    CHECK(close(ct_dt_gain_ratio(2, 0.5), {1.6147980428923905122, 1.4093844319289958698}, 1e-14));

    SUBCASE("monotone increasing and tending to 1") {
        for (int n : {1, 2}) {
            Vector prev = ct_dt_gain_ratio(n, 1e-6);
            for (Eigen::Index i = 0; i < prev.size(); ++i) CHECK(std::abs(prev(i) - 1.0) < 1e-5);
            for (double x = 1e-3; x <= 2.0; x *= 1.1) {
                const Vector r = ct_dt_gain_ratio(n, x);
                for (Eigen::Index i = 0; i < r.size(); ++i) {
                    CHECK(r(i) > prev(i));
                    CHECK(r(i) > 1.0);
                }
                prev = r;
            }
        }
    }
    SUBCASE("ratio equals the quotient of the gain vectors") {
        const AdrcDesign d{2, 1.0, 10.0, 10.0, 0.03};
        const Vector r = ct_dt_gain_ratio(2, 0.3);
        const Vector q = ct_controller_gains(d).cwiseQuotient(dt_controller_gains(d));
        CHECK(close(r, q, 1e-12));
    }
    CHECK_THROWS_AS(ct_dt_gain_ratio(3, 0.1), DomainError);
    CHECK_THROWS_AS(ct_dt_gain_ratio(1, 0.0), DomainError);
}

TEST_CASE("design validation and warnings") {
    CHECK_NOTHROW(kFirst.validate());
    CHECK_THROWS_AS((AdrcDesign{0, 1.0, 10.0, 10.0, 0.05}).validate(), DomainError);
    CHECK_THROWS_AS((AdrcDesign{1, 0.0, 10.0, 10.0, 0.05}).validate(), DomainError);
    CHECK_THROWS_AS((AdrcDesign{1, 1.0, -1.0, 10.0, 0.05}).validate(), DomainError);
    CHECK_THROWS_AS((AdrcDesign{1, 1.0, 10.0, 0.0, 0.05}).validate(), DomainError);
    CHECK_THROWS_AS((AdrcDesign{1, 1.0, 10.0, 10.0, 0.0}).validate(), DomainError);
    CHECK_THROWS_AS((AdrcDesign{1, 1.0, 10.0, 10.0, NAN}).validate(), DomainError);
    CHECK_NOTHROW((AdrcDesign{1, -2.0, 10.0, 10.0, 0.05}).validate());

    CHECK((AdrcDesign{1, 1.0, 10.0, 3.0, 0.005}).warnings().empty());
    const AdrcDesign coarse{1, 1.0, 10.0, 3.0, 0.05};
    CHECK(coarse.coarse_sampling());
    CHECK_FALSE(coarse.observer_aliasing());
    CHECK(coarse.warnings().size() == 1);
    const AdrcDesign aliased{1, 1.0, 10.0, 10.0, 0.05};
    CHECK(aliased.observer_aliasing());
    CHECK(aliased.warnings().size() == 2);
}

TEST_CASE("gain sets") {
    const GainSet ct = design_gains(kFirst, GainMethod::ContinuousTime);
    CHECK(close(ct.k, ct_controller_gains(kFirst)));
    CHECK(close(ct.l, ct_observer_gains(kFirst)));
    const GainSet dt = design_gains(kFirst, GainMethod::DiscreteTime);
    CHECK(close(dt.k, dt_controller_gains(kFirst)));
    CHECK(close(dt.l, dt_observer_gains(kFirst)));

    // A sampled controller always uses the discrete observer.
    const GainSet quasi = sampled_gains(kFirst, GainMethod::ContinuousTime);
    CHECK(close(quasi.k, ct_controller_gains(kFirst)));
    CHECK(close(quasi.l, dt_observer_gains(kFirst)));

    CHECK(gain_method_from_string("ct") == GainMethod::ContinuousTime);
    CHECK(std::string(to_string(GainMethod::DiscreteTime)) == "dt");
    CHECK_THROWS_AS(gain_method_from_string("zoh"), DomainError);
}
