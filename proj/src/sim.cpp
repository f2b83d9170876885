#include "adrc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace adrc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// (0, 1], never zero so the log below stays finite
double unit_interval(std::uint64_t bits) { return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53; }

long event_sample(double t, double T) { return static_cast<long>(std::ceil(t / T - 1e-9)); }

}  // namespace

// ---------------------------------------------------------------------------

DiscretePlant::DiscretePlant(Matrix A, Vector b, RowVector c, Vector x0)
    : A_(std::move(A)), b_(std::move(b)), c_(std::move(c)), x_(std::move(x0)) {
    const Eigen::Index m = A_.rows();
    if (A_.cols() != m || b_.size() != m || c_.size() != m) throw ShapeError("plant (A, b, c) dimensions disagree");
    if (x_.size() == 0) x_ = Vector::Zero(m);
    if (x_.size() != m) throw ShapeError("plant initial state has the wrong dimension");
}

DiscretePlant DiscretePlant::zoh(const Matrix& A, const Vector& b, const RowVector& c, double T, const Vector& x0) {
    if (!(T > 0.0)) throw DomainError(fmt::format("sampling interval T must be > 0 (got {})", T));
    const Eigen::Index m = A.rows();
    if (A.cols() != m || b.size() != m || c.size() != m) throw ShapeError("plant (A, b, c) dimensions disagree");
    if (m == 1) {
        const double a = A(0, 0);
        Matrix Ad(1, 1);
        Vector bd(1);
        Ad(0, 0) = std::exp(a * T);
        bd(0) = a == 0.0 ? b(0) * T : std::expm1(a * T) / a * b(0);
        return DiscretePlant(Ad, bd, c, x0);
    }
    // exp([[A, b], [0, 0]] T) = [[A_d, b_d], [0, 1]]
    Matrix M = Matrix::Zero(m + 1, m + 1);
    M.topLeftCorner(m, m) = A * T;
    M.topRightCorner(m, 1) = b * T;
    const Matrix E = M.exp();
    return DiscretePlant(E.topLeftCorner(m, m), E.topRightCorner(m, 1), c, x0);
}

DiscretePlant DiscretePlant::first_order(double gain, double tau, double T, double y0) {
    if (!(tau > 0.0)) throw DomainError("first-order plant needs tau > 0");
    Matrix A(1, 1);
    Vector b(1), x0(1);
    RowVector c(1);
    A << -1.0 / tau;
    b << gain / tau;
    c << 1.0;
    x0 << y0;
    return zoh(A, b, c, T, x0);
}

double DiscretePlant::output() const { return c_.dot(x_) + output_disturbance_; }

void DiscretePlant::step(double u, double input_disturbance) { x_ = A_ * x_ + b_ * (u + input_disturbance); }

BuckPlant::BuckPlant(const BuckParams& params, double T) : p_(params), T_(T), v_(params.v0) {
    if (!(p_.C_out > 0.0) || !(p_.R_base > 0.0)) throw DomainError("buck plant needs C_out > 0 and R_base > 0");
    if (!(T > 0.0)) throw DomainError("sampling interval T must be > 0");
}

void BuckPlant::step(double i_cmd, double i_load) { v_ = v_ + (T_ / p_.C_out) * (i_cmd - v_ / p_.R_base - i_load); }

LtiPlantSpec first_order_plant(double gain, double tau) {
    LtiPlantSpec p;
    p.A = Matrix::Constant(1, 1, -1.0 / tau);
    p.b = Vector::Constant(1, gain / tau);
    p.c = RowVector::Constant(1, 1.0);
    return p;
}

std::unique_ptr<Plant> make_plant(const PlantSpec& spec, double T) {
    if (const auto* lti = std::get_if<LtiPlantSpec>(&spec))
        return std::make_unique<DiscretePlant>(DiscretePlant::zoh(lti->A, lti->b, lti->c, T, lti->x0));
    return std::make_unique<BuckPlant>(std::get<BuckParams>(spec), T);
}

// ---------------------------------------------------------------------------

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Setpoint: return "setpoint";
        case EventKind::Load: return "load";
        case EventKind::OutputDisturbance: return "output_disturbance";
    }
    return "?";
}

EventKind event_kind_from_string(const std::string& s) {
    if (s == "setpoint") return EventKind::Setpoint;
    if (s == "load") return EventKind::Load;
    if (s == "output_disturbance") return EventKind::OutputDisturbance;
    throw DomainError(fmt::format("unknown event kind '{}'", s));
}

const char* to_string(FilterTarget t) {
    switch (t) {
        case FilterTarget::ErrorBased: return "error";
        case FilterTarget::OutputBased: return "output";
        case FilterTarget::All: return "all";
    }
    return "?";
}

FilterTarget filter_target_from_string(const std::string& s) {
    if (s == "error") return FilterTarget::ErrorBased;
    if (s == "output") return FilterTarget::OutputBased;
    if (s == "all") return FilterTarget::All;
    throw DomainError(fmt::format("unknown setpoint filter target '{}' (expected error, output or all)", s));
}

bool SetpointFilterSpec::applies(Signal s) const {
    if (apply_to == FilterTarget::All) return true;
    return (apply_to == FilterTarget::ErrorBased) == (s == Signal::ErrorBased);
}

long Scenario::samples() const { return std::lround(duration / T()) + 1; }

double Scenario::reference_scale() const {
    double scale = std::max(1.0, std::abs(initial_reference));
    for (const auto& e : events)
        if (e.kind == EventKind::Setpoint) scale = std::max(scale, std::abs(e.value));
    return scale;
}

void Scenario::validate() const {
    controller.design.validate();
    if (!(duration >= 0.0) || !std::isfinite(duration)) throw DomainError("scenario duration must be >= 0");
    if (delay_samples < 0) throw DomainError("delay_samples must be >= 0");
    if (!(noise.sigma >= 0.0)) throw DomainError("noise sigma must be >= 0");
    if (limiter) limiter->validate();
    if (setpoint_filter && !(setpoint_filter->time_constant > 0.0))
        throw DomainError("setpoint filter time constant must be > 0");
    if (divergence_guard && !(*divergence_guard > 0.0)) throw DomainError("divergence guard must be > 0");
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!(events[i].t >= 0.0)) throw DomainError("event times must be >= 0");
        if (i > 0 && events[i].t < events[i - 1].t) throw DomainError("events must be time-ordered");
    }
}

// ---------------------------------------------------------------------------

double NoiseStream::gaussian(std::uint64_t counter) const {
    // Box-Muller on two hashed uniforms
    const std::uint64_t base = splitmix64(seed_);
    const double u1 = unit_interval(splitmix64(base + 2 * counter));
    const double u2 = unit_interval(splitmix64(base + 2 * counter + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double add_noise(double y, double sigma, const NoiseStream& stream, std::uint64_t counter) {
    if (sigma == 0.0) return y;
    return y + sigma * stream.gaussian(counter);
}

// ---------------------------------------------------------------------------

Trace run_scenario(const Scenario& s) {
    s.validate();
    const double T = s.T();
    const long N = s.samples();
    const Signal signal = s.controller.variant.signal;

    auto controller = make_controller(s.controller, s.limiter);
    auto plant = make_plant(s.plant, T);
    const NoiseStream noise(s.noise.seed);
    const double guard = s.divergence_guard.value_or(1e6 * s.reference_scale());

    const bool filtered = s.setpoint_filter && s.setpoint_filter->applies(signal);
    const double a = filtered ? std::exp(-T / s.setpoint_filter->time_constant) : 0.0;

    std::vector<long> due;
    for (const auto& e : s.events) due.push_back(event_sample(e.t, T));

    Trace tr;
    tr.T = T;
    for (auto* v : {&tr.t, &tr.r, &tr.r_filtered, &tr.y_clean, &tr.y_measured, &tr.u, &tr.u_lim})
        v->reserve(static_cast<std::size_t>(N));

    std::deque<double> pipeline(static_cast<std::size_t>(s.delay_samples), 0.0);
    double r = s.initial_reference;
    double load = s.initial_load;
    double r_f = 0.0;
    double u_lim_prev = 0.0;
    std::size_t next_event = 0;

    for (long k = 0; k < N; ++k) {
        while (next_event < s.events.size() && due[next_event] <= k) {
            const Event& e = s.events[next_event++];
            switch (e.kind) {
                case EventKind::Setpoint: r = e.value; break;
                case EventKind::Load: load = e.value; break;
                case EventKind::OutputDisturbance: plant->set_output_disturbance(e.value); break;
            }
        }

        const double y = plant->output();
        if (!std::isfinite(y) || std::abs(y) > guard)
            throw DivergenceError(fmt::format("output diverged at sample {} (|y| = {:.6g} > {:.6g})", k,
                                              std::abs(y), guard),
                                  k);
        const double y_meas = add_noise(y, s.noise.sigma, noise, static_cast<std::uint64_t>(k));

        r_f = !filtered ? r : (k == 0 ? r : a * r_f + (1.0 - a) * r);

        if (k == 0 && s.controller.warm_start) controller->warm_start(r_f, y_meas);
        const double u = controller->update(r_f, y_meas);

        LimiterOutput lim{u, false, false};
        if (s.limiter) lim = apply_limiter(*s.limiter, u, u_lim_prev, T);
        controller->commit(s.controller.feed_unlimited ? u : lim.u_lim);
        u_lim_prev = lim.u_lim;

        double applied = lim.u_lim;
        if (s.delay_samples > 0) {
            pipeline.push_back(lim.u_lim);
            applied = pipeline.front();
            pipeline.pop_front();
        }

        tr.t.push_back(static_cast<double>(k) * T);
        tr.r.push_back(r);
        tr.r_filtered.push_back(r_f);
        tr.y_clean.push_back(y);
        tr.y_measured.push_back(y_meas);
        tr.u.push_back(u);
        tr.u_lim.push_back(lim.u_lim);
        tr.lim_mag.push_back(lim.magnitude_active);
        tr.lim_rate.push_back(lim.rate_active);
        if (s.record_state) tr.state.push_back(controller->state());

        plant->step(applied, load);
    }
    return tr;
}

std::vector<Trace> run_lockstep(const Scenario& s, const std::vector<ControllerSpec>& controllers) {
    std::vector<Trace> out;
    out.reserve(controllers.size());
    for (const auto& c : controllers) {
        Scenario copy = s;
        copy.controller = c;
        out.push_back(run_scenario(copy));
    }
    return out;
}

TraceDifference compare_traces(const Trace& a, const Trace& b, double t0, double t1) {
    if (a.T != b.T) throw ShapeError(fmt::format("traces have different sampling intervals ({} vs {})", a.T, b.T));
    if (a.size() != b.size()) throw ShapeError(fmt::format("traces differ in length ({} vs {})", a.size(), b.size()));
    const double eps = 1e-9 * a.T;
    TraceDifference d;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a.t[k] < t0 - eps || a.t[k] >= t1 - eps) continue;
        d.max_abs_du = std::max(d.max_abs_du, std::abs(a.u_lim[k] - b.u_lim[k]));
        d.max_abs_dy = std::max(d.max_abs_dy, std::abs(a.y_clean[k] - b.y_clean[k]));
    }
    return d;
}

std::vector<Window> event_windows(const Scenario& s) {
    const double T = s.T();
    const double end = static_cast<double>(s.samples()) * T;
    std::vector<double> cuts{0.0};
    for (const auto& e : s.events) {
        const double t = static_cast<double>(event_sample(e.t, T)) * T;
        if (t > cuts.back() && t < end) cuts.push_back(t);
    }
    cuts.push_back(end);
    std::vector<Window> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) out.push_back({cuts[i], cuts[i + 1]});
    return out;
}

bool reference_constant(const Trace& tr, const Window& w) {
    if (tr.size() == 0) return false;
    const double eps = 1e-9 * tr.T;
    bool any = false;
    for (std::size_t k = 0; k < tr.size() && tr.t[k] < w.t1 - eps; ++k) {
        if (tr.r_filtered[k] != tr.r_filtered[0]) return false;
        any = any || tr.t[k] >= w.t0 - eps;
    }
    return any;
}

std::size_t first_limited_sample(const Trace& tr) {
    for (std::size_t k = 0; k < tr.size(); ++k)
        if (tr.lim_mag[k] || tr.lim_rate[k]) return k;
    return tr.size();
}

double settling_time(const std::vector<double>& y, double target, double T, double band) {
    const double tol = target == 0.0 ? band : band * std::abs(target);
    for (std::size_t k = y.size(); k-- > 0;)
        if (std::abs(y[k] - target) > tol) return static_cast<double>(k + 1) * T;
    return 0.0;
}

StepMetrics step_metrics(const Trace& trace, double band) {
    StepMetrics m;
    if (trace.size() == 0) return m;
    const double target = trace.r.back();
    m.settling_time = settling_time(trace.y_clean, target, trace.T, band);
    const double span = target - trace.y_clean.front();
    if (span != 0.0) {
        double worst = 0.0;
        for (double y : trace.y_clean) worst = std::max(worst, (y - target) / span);
        m.overshoot_percent = 100.0 * worst;
    }
    std::size_t limited = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        m.max_abs_u_lim = std::max(m.max_abs_u_lim, std::abs(trace.u_lim[k]));
        if (trace.lim_mag[k] || trace.lim_rate[k]) ++limited;
    }
    m.saturation_duty = static_cast<double>(limited) / static_cast<double>(trace.size());
    return m;
}

// ---------------------------------------------------------------------------

Scenario make_buck_scenario() {
    Scenario s;
    s.name = "buck";
    s.controller.design = AdrcDesign{1, 1e4, 4000.0, 5.0, 2e-5};
    s.controller.variant = {Structure::DualFeedback, Signal::ErrorBased};
    s.controller.warm_start = true;
    s.duration = 0.04;
    s.initial_reference = 5.0;
    s.initial_load = 0.0;
    s.events = {{0.004, EventKind::Load, 3.0},
                {0.006, EventKind::Setpoint, 10.0},
                {0.010, EventKind::Load, 8.0},
                {0.012, EventKind::Load, 3.0}};
    s.noise = {0.02, 1};
    s.delay_samples = 1;
    s.limiter = LimiterSpec{0.0, 6.0, 20000.0, true, true};
    s.plant = BuckParams{};
    s.setpoint_filter = SetpointFilterSpec{750e-6, FilterTarget::ErrorBased};
    return s;
}

Scenario make_first_order_step(const AdrcDesign& design, double reference, double duration, int delay_samples) {
    Scenario s;
    s.name = "first_order_step";
    s.controller.design = design;
    s.duration = duration;
    s.initial_reference = reference;
    s.delay_samples = delay_samples;
    s.plant = first_order_plant(1.0, 1.0);
    return s;
}

}  // namespace adrc
