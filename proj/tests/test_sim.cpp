#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "adrc/sim.hpp"
#include "oracles.hpp"

using namespace adrc;

namespace {

Trace run_buck(ControllerVariant v) {
    Scenario s = make_buck_scenario();
    s.controller.variant = v;
    return run_scenario(s);
}

std::size_t sample_at(double t, double T) { return static_cast<std::size_t>(std::lround(t / T)); }

}  // namespace

TEST_CASE("first-order plant is sampled exactly") {
    DiscretePlant p = DiscretePlant::first_order(1.0, 1.0, 0.05);
    for (int k = 0; k <= 200; ++k) {
        CHECK(std::abs(p.output() - oracle::first_order_step(1.0, 1.0, 0.05 * k)) <= 1e-12);
        p.step(1.0, 0.0);
    }
    CHECK_THROWS_AS(DiscretePlant::first_order(1.0, 0.0, 0.05), DomainError);
}

TEST_CASE("general zero-order hold") {
    Matrix A(2, 2);
    A << 0.0, 1.0, -4.0, -0.8;
    Vector b(2);
    b << 0.0, 2.0;
    RowVector c(2);
    c << 1.0, 0.0;
    const double T = 0.1;
    const DiscretePlant p = DiscretePlant::zoh(A, b, c, T);
    Matrix M = Matrix::Zero(3, 3);
    M.topLeftCorner(2, 2) = A * T;
    M.topRightCorner(2, 1) = b * T;
    const Matrix E = oracle::expm(M);
    CHECK((p.A() - E.topLeftCorner(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((p.b() - E.topRightCorner(2, 1)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(DiscretePlant::zoh(A, Vector::Ones(3), c, T), ShapeError);
    CHECK_THROWS_AS(DiscretePlant::zoh(A, b, c, 0.0), DomainError);
    CHECK_THROWS_AS(DiscretePlant(A, b, c, Vector::Ones(3)), ShapeError);
}

TEST_CASE("buck output decays with the load resistor") {
    BuckParams params;
    params.v0 = 10.0;
    BuckPlant p(params, 2e-5);
    const double factor = 1.0 - 2e-5 / (params.C_out * params.R_base);
    double prev = p.output();
    for (int k = 0; k < 100; ++k) {
        p.step(0.0, 0.0);
        CHECK(p.output() < prev);
        CHECK(p.output() == doctest::Approx(prev * factor).epsilon(1e-14));
        prev = p.output();
    }
    p.set_output_disturbance(0.5);
    CHECK(p.output() == doctest::Approx(p.voltage() + 0.5));
    params.C_out = 0.0;
    CHECK_THROWS_AS(BuckPlant(params, 2e-5), DomainError);
}

TEST_CASE("buck scenario setup") {
    const Scenario s = make_buck_scenario();
    CHECK(s.T() == 2e-5);
    CHECK(s.controller.design.b0 == doctest::Approx(1.0 / std::get<BuckParams>(s.plant).C_out));
    CHECK(s.samples() == 2001);
    const auto overload = std::max_element(s.events.begin(), s.events.end(), [](const Event& a, const Event& b) {
        return a.kind == EventKind::Load && b.kind == EventKind::Load ? a.value < b.value : a.kind != EventKind::Load;
    });
    CHECK(overload->value > s.limiter->u_max);
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("a quiet scenario stays at zero") {
    Scenario s = make_first_order_step(AdrcDesign{1, 1.0, 10.0, 5.0, 0.01}, 0.0, 1.0);
    for (const auto& v : all_variants()) {
        s.controller.variant = v;
        const Trace t = run_scenario(s);
        CHECK(t.size() == 101);
        for (std::size_t k = 0; k < t.size(); ++k) {
            CHECK(t.y_clean[k] == 0.0);
            CHECK(t.u_lim[k] == 0.0);
        }
    }
}

TEST_CASE("noise statistics and determinism") {
    const NoiseStream a(42), b(42), c(43);
    const int N = 100000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < N; ++k) {
        const double g = a.gaussian(static_cast<std::uint64_t>(k));
        CHECK(g == b.gaussian(static_cast<std::uint64_t>(k)));
        sum += g;
        sq += g * g;
    }
    const double mean = sum / N;
    const double sd = std::sqrt(sq / N - mean * mean);
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(N)));
    CHECK(std::abs(sd - 1.0) <= 0.02);
    CHECK(a.gaussian(7) != c.gaussian(7));
    CHECK(add_noise(1.5, 0.0, a, 3) == 1.5);
    CHECK(add_noise(1.5, 2.0, a, 3) == 1.5 + 2.0 * a.gaussian(3));
}

TEST_CASE("actuator delay") {
    for (int d : {0, 1, 3}) {
        const Trace t = run_scenario(make_first_order_step(AdrcDesign{1, 1.0, 10.0, 5.0, 0.01}, 1.0, 0.2, d));
        for (int k = 0; k <= d; ++k) CHECK(t.y_clean[static_cast<std::size_t>(k)] == 0.0);
        CHECK(t.y_clean[static_cast<std::size_t>(d + 1)] > 0.0);
    }
}

TEST_CASE("divergence reports the sample") {
    Scenario s = make_first_order_step(AdrcDesign{1, 1.0, 10.0, 5.0, 0.01}, 1.0, 1.0);
    s.divergence_guard = 0.5;
    const Trace ok = [] {
        return run_scenario(make_first_order_step(AdrcDesign{1, 1.0, 10.0, 5.0, 0.01}, 1.0, 1.0));
    }();
    const auto first = std::find_if(ok.y_clean.begin(), ok.y_clean.end(), [](double y) { return y > 0.5; });
    REQUIRE(first != ok.y_clean.end());
    try {
        run_scenario(s);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.sample() == first - ok.y_clean.begin());
    }
}

TEST_CASE("scenario validation") {
    Scenario s = make_buck_scenario();
    s.delay_samples = -1;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = make_buck_scenario();
    std::swap(s.events[0], s.events[1]);
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = make_buck_scenario();
    s.noise.sigma = -1.0;
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = make_buck_scenario();
    s.setpoint_filter->time_constant = 0.0;
    CHECK_THROWS_AS(s.validate(), DomainError);
    CHECK(event_kind_from_string("load") == EventKind::Load);
    CHECK(filter_target_from_string("all") == FilterTarget::All);
    CHECK_THROWS_AS(filter_target_from_string("none"), DomainError);
    CHECK((SetpointFilterSpec{1e-3, FilterTarget::ErrorBased}).applies(Signal::ErrorBased));
    CHECK_FALSE((SetpointFilterSpec{1e-3, FilterTarget::ErrorBased}).applies(Signal::OutputBased));
}

TEST_CASE("trace comparison") {
    const Trace a = run_buck({Structure::StateSpace, Signal::OutputBased});
    const TraceDifference same = compare_traces(a, a, 0.0, 1.0);
    CHECK(same.max_abs_du == 0.0);
    CHECK(same.max_abs_dy == 0.0);
    Trace shorter = a;
    shorter.t.pop_back();
    CHECK_THROWS_AS(compare_traces(a, shorter, 0.0, 1.0), ShapeError);
    const Trace other = run_scenario(make_first_order_step(AdrcDesign{1, 1.0, 10.0, 5.0, 0.01}, 1.0, 0.2));
    CHECK_THROWS_AS(compare_traces(a, other, 0.0, 1.0), ShapeError);
}

TEST_CASE("buck scenario: flavors coincide until the setpoint step") {
    const Trace out = run_buck({Structure::StateSpace, Signal::OutputBased});
    const Trace err = run_buck({Structure::StateSpace, Signal::ErrorBased});
    CHECK(compare_traces(out, err, 0.0, 0.006).max_abs_du <= 1e-9);
    CHECK(compare_traces(out, err, 0.004, 0.006).max_abs_du <= 1e-9);
    CHECK(compare_traces(out, err, 0.006, 0.009).max_abs_dy > 0.0);
}

TEST_CASE("buck scenario: windows and reference history") {
    const Scenario s = make_buck_scenario();
    const auto w = event_windows(s);
    REQUIRE(w.size() == 5);
    CHECK(w[0].t0 == 0.0);
    CHECK(w[1].t0 == doctest::Approx(0.004));
    CHECK(w[2].t0 == doctest::Approx(0.006));
    CHECK(w[4].t1 == doctest::Approx(2001 * 2e-5));

    const Trace t = run_buck({Structure::DualFeedback, Signal::ErrorBased});
    CHECK(reference_constant(t, w[0]));
    CHECK(reference_constant(t, w[1]));
    for (std::size_t i = 2; i < w.size(); ++i) CHECK_FALSE(reference_constant(t, w[i]));
    CHECK_FALSE(reference_constant(Trace{}, w[0]));
}

TEST_CASE("buck scenario: regulation, limits and recovery") {
    const Scenario s = make_buck_scenario();
    for (const auto& v : all_variants()) {
        const Trace t = run_buck(v);
        CHECK(t.size() == 2001);
        for (std::size_t k = 0; k < t.size(); ++k) {
            CHECK(t.u_lim[k] >= 0.0);
            CHECK(t.u_lim[k] <= 6.0);
            if (k > 0) CHECK(std::abs(t.u_lim[k] - t.u_lim[k - 1]) <= 20000.0 * 2e-5 + 1e-12);
        }
        CHECK(first_limited_sample(t) < t.size());
        // the 8 A overload cannot be held with 6 A
        CHECK(t.y_clean[sample_at(0.012, s.T())] < 9.5);
        // back within 1% after the overload clears
        for (std::size_t k = sample_at(0.02, s.T()); k < t.size(); ++k) CHECK(std::abs(t.y_clean[k] - 10.0) < 0.1);
        // steady state at full load is inside the measurement noise
        double mean = 0.0;
        const std::size_t k0 = sample_at(0.03, s.T());
        for (std::size_t k = k0; k < t.size(); ++k) mean += t.y_clean[k];
        mean /= static_cast<double>(t.size() - k0);
        CHECK(std::abs(mean - 10.0) < s.noise.sigma);
    }
}

TEST_CASE("runs are deterministic") {
    const Trace a = run_buck({Structure::SingleTf, Signal::OutputBased});
    const Trace b = run_buck({Structure::SingleTf, Signal::OutputBased});
    CHECK(a.u_lim == b.u_lim);
    CHECK(a.y_measured == b.y_measured);
}

TEST_CASE("lockstep runs share the scenario") {
    const Scenario s = make_buck_scenario();
    ControllerSpec a = s.controller, b = s.controller;
    b.variant = {Structure::StateSpace, Signal::ErrorBased};
    const auto traces = run_lockstep(s, {a, b});
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].y_measured[0] == traces[1].y_measured[0]);
    CHECK(compare_traces(traces[0], traces[1], 0.0, 1.0).max_abs_du <= 1e-9);
}

TEST_CASE("step metrics") {
    const double T = 0.01;
    std::vector<double> y(100, 1.0);
    y[40] = 1.05;
    CHECK(settling_time(y, 1.0, T) == doctest::Approx(0.41));
    CHECK(settling_time(std::vector<double>(10, 1.0), 1.0, T) == 0.0);

    const Trace t = run_scenario(make_first_order_step(AdrcDesign{1, 1.0, 10.0, 5.0, 0.01}, 1.0, 2.0));
    const StepMetrics m = step_metrics(t);
    CHECK(m.settling_time > 0.0);
    CHECK(m.settling_time < 1.0);
    CHECK(m.overshoot_percent < 1.0);
    CHECK(m.saturation_duty == 0.0);
}

TEST_CASE("recorded controller state") {
    Scenario s = make_first_order_step(AdrcDesign{1, 1.0, 10.0, 5.0, 0.01}, 1.0, 0.1);
    s.record_state = true;
    const Trace t = run_scenario(s);
    REQUIRE(t.state.size() == t.size());
    CHECK(t.state.back().size() == 2);
}
