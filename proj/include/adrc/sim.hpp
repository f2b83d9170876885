#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adrc/controllers.hpp"
#include "adrc/discretize.hpp"
#include "adrc/limiter.hpp"

namespace adrc {

/// |y| left the divergence guard.
class DivergenceError : public Error {
   public:
    DivergenceError(const std::string& what, long sample) : Error(what), sample_(sample) {}
    long sample() const { return sample_; }

   private:
    long sample_;
};

class Plant {
   public:
    virtual ~Plant() = default;
    virtual double output() const = 0;
    /// Advance one sample with actuation u and the scripted load/input disturbance.
    virtual void step(double u, double load) = 0;
    void set_output_disturbance(double d) { output_disturbance_ = d; }

   protected:
    double output_disturbance_ = 0.0;
};

/// x(k+1) = A x(k) + b (u(k) + d(k)),  y(k) = c x(k) + d_out.
class DiscretePlant final : public Plant {
   public:
    DiscretePlant(Matrix A, Vector b, RowVector c, Vector x0);

    /// Exact ZOH discretization of a continuous-time (A, b, c) model.
    static DiscretePlant zoh(const Matrix& A, const Vector& b, const RowVector& c, double T,
                             const Vector& x0 = Vector());
    /// gain / (tau s + 1)
    static DiscretePlant first_order(double gain, double tau, double T, double y0 = 0.0);

    double output() const override;
    void step(double u, double input_disturbance) override;

    const Matrix& A() const { return A_; }
    const Vector& b() const { return b_; }
    const RowVector& c() const { return c_; }
    const Vector& state() const { return x_; }

   private:
    Matrix A_;
    Vector b_;
    RowVector c_;
    Vector x_;
};

struct BuckParams {
    double C_out = 100e-6;  // F
    double R_base = 100.0;  // ohm
    double V_in = 24.0;     // V, informational for the averaged model
    double L = 33e-6;       // H, informational for the averaged model
    double v0 = 0.0;        // initial output voltage

    bool operator==(const BuckParams&) const = default;
};

/**
 * Averaged buck converter with an ideal inner current loop:
 *   v(k+1) = v(k) + T/C (i_cmd(k) - v(k)/R - i_load(k)).
 */
class BuckPlant final : public Plant {
   public:
    BuckPlant(const BuckParams& params, double T);

    double output() const override { return v_ + output_disturbance_; }
    void step(double i_cmd, double i_load) override;
    double voltage() const { return v_; }

   private:
    BuckParams p_;
    double T_;
    double v_;
};

/// Continuous-time LTI plant, ZOH-discretized at the controller sampling interval.
struct LtiPlantSpec {
    Matrix A;
    Vector b;
    RowVector c;
    Vector x0;  // empty = zero
};

LtiPlantSpec first_order_plant(double gain, double tau);

using PlantSpec = std::variant<LtiPlantSpec, BuckParams>;

std::unique_ptr<Plant> make_plant(const PlantSpec& spec, double T);

enum class EventKind { Setpoint, Load, OutputDisturbance };

const char* to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

/// At time t (seconds) the setpoint, load or output disturbance becomes `value`.
struct Event {
    double t = 0.0;
    EventKind kind = EventKind::Setpoint;
    double value = 0.0;

    bool operator==(const Event&) const = default;
};

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const NoiseSpec&) const = default;
};

enum class FilterTarget { ErrorBased, OutputBased, All };

const char* to_string(FilterTarget t);
FilterTarget filter_target_from_string(const std::string& s);

/// First-order low-pass on the reference, r_f(k) = a r_f(k-1) + (1-a) r(k), a = exp(-T/tau).
struct SetpointFilterSpec {
    double time_constant = 0.0;
    FilterTarget apply_to = FilterTarget::ErrorBased;

    bool applies(Signal s) const;
    bool operator==(const SetpointFilterSpec&) const = default;
};

struct Scenario {
    std::string name;
    double duration = 0.0;  // seconds; the sampling interval is controller.design.T
    double initial_reference = 0.0;
    double initial_load = 0.0;
    std::vector<Event> events;  // time-ordered
    NoiseSpec noise;
    int delay_samples = 1;
    ControllerSpec controller;
    std::optional<LimiterSpec> limiter;
    PlantSpec plant = LtiPlantSpec{};
    std::optional<SetpointFilterSpec> setpoint_filter;
    std::optional<double> divergence_guard;  // default 1e6 * reference scale
    bool record_state = false;

    double T() const { return controller.design.T; }
    long samples() const;  // duration / T + 1
    /// Largest |reference| the scenario ever commands, at least 1.
    double reference_scale() const;
    void validate() const;
};

/// Counter-based Gaussian stream: sample k depends only on (seed, k).
class NoiseStream {
   public:
    explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}
    double gaussian(std::uint64_t counter) const;
    std::uint64_t seed() const { return seed_; }

   private:
    std::uint64_t seed_;
};

/// y + sigma * gaussian(counter); exactly y for sigma == 0.
double add_noise(double y, double sigma, const NoiseStream& stream, std::uint64_t counter);

struct Trace {
    double T = 0.0;
    std::vector<double> t, r, r_filtered, y_clean, y_measured, u, u_lim;
    std::vector<bool> lim_mag, lim_rate;
    std::vector<Vector> state;  // controller state per sample, if recorded

    std::size_t size() const { return t.size(); }
};

/**
 * Per sample k: apply events due at kT, measure y(k) plus noise, filter the
 * reference, step the controller, limit, commit, and drive the plant with
 * u_lim(k - delay_samples). Throws DivergenceError when |y| exceeds the guard.
 */
Trace run_scenario(const Scenario& s);

/// Same scenario with each controller spec in turn; the noise stream is shared by construction.
std::vector<Trace> run_lockstep(const Scenario& s, const std::vector<ControllerSpec>& controllers);

struct TraceDifference {
    double max_abs_du = 0.0;
    double max_abs_dy = 0.0;
};

/// Differences of u_lim and y_clean over samples with t0 <= t < t1.
TraceDifference compare_traces(const Trace& a, const Trace& b, double t0, double t1);

struct Window {
    double t0 = 0.0;
    double t1 = 0.0;  // exclusive
};

/// [0, end) split at the scenario's event times.
std::vector<Window> event_windows(const Scenario& s);

/**
 * True when the reference fed to the controller (r_filtered) has kept its
 * initial value from the first sample up to the end of the window. A setpoint
 * change leaves a closed-loop transient behind, so only such windows are free
 * of reference history.
 */
bool reference_constant(const Trace& trace, const Window& w);

/// Index of the first sample with an active limiter flag, or size() if none.
std::size_t first_limited_sample(const Trace& trace);

struct StepMetrics {
    double settling_time = 0.0;  // 2% band around the final reference
    double overshoot_percent = 0.0;
    double max_abs_u_lim = 0.0;
    double saturation_duty = 0.0;  // fraction of samples with any limiter flag
};

StepMetrics step_metrics(const Trace& trace, double band = 0.02);

/// (last sample outside |y - target| <= band*|target|, plus one) * T; 0 if always inside.
double settling_time(const std::vector<double>& y, double target, double T, double band = 0.02);

/// Buck converter voltage control: startup, load step, setpoint change and an overload episode.
Scenario make_buck_scenario();

/// Unit-gain first-order plant 1/(s + 1) driven to `reference` from rest, no limiter, no noise.
Scenario make_first_order_step(const AdrcDesign& design, double reference, double duration, int delay_samples = 0);

}  // namespace adrc
