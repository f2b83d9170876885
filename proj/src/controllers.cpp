#include "adrc/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include <json.hpp>

#include "adrc/tuning.hpp"

namespace adrc {

using json = nlohmann::json;

struct Controller::SnapshotParts {
    json j;
};

namespace {

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
    return v;
}

json to_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(to_json(Vector(M.row(i).transpose())));
    return rows;
}

Matrix matrix_from(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) M.row(i) = vector_from(j.at(static_cast<size_t>(i))).transpose();
    return M;
}

// JSON has no infinities; unbounded clamps are stored as null.
json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double bound_from(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

json design_to_json(const AdrcDesign& d) {
    return {{"n", d.order}, {"b0", d.b0}, {"omega_cl", d.omega_cl}, {"k_eso", d.k_eso}, {"T", d.T}};
}

AdrcDesign design_from(const json& j) {
    AdrcDesign d;
    d.order = j.at("n").get<int>();
    d.b0 = j.at("b0").get<double>();
    d.omega_cl = j.at("omega_cl").get<double>();
    d.k_eso = j.at("k_eso").get<double>();
    d.T = j.at("T").get<double>();
    return d;
}

json coefficients_to_json(const TfCoefficients& c) {
    json j{{"variant", to_string(c.variant)},
           {"alpha", to_json(c.alpha)},
           {"beta", to_json(c.beta)},
           {"gamma", to_json(c.gamma)}};
    if (c.variant == TfVariant::DualFeedback) j["k1_over_b0"] = c.k1_over_b0;
    return j;
}

TfCoefficients coefficients_from(const json& j) {
    TfCoefficients c;
    c.variant = tf_variant_from_string(j.at("variant").get<std::string>());
    c.alpha = vector_from(j.at("alpha"));
    c.beta = vector_from(j.at("beta"));
    c.gamma = vector_from(j.at("gamma"));
    if (j.contains("k1_over_b0")) c.k1_over_b0 = j.at("k1_over_b0").get<double>();
    return c;
}

void check_coefficients(const AdrcDesign& design, const TfCoefficients& c, TfVariant expected) {
    const int n = design.order;
    if (c.variant != expected)
        throw ShapeError(fmt::format("expected {} coefficients, got {}", to_string(expected), to_string(c.variant)));
    const bool single = expected == TfVariant::SingleTf;
    const Eigen::Index alpha_len = single ? n : n + 1;
    const Eigen::Index gamma_len = single ? n + 2 : n + 1;
    if (c.alpha.size() != alpha_len || c.beta.size() != n + 1 || c.gamma.size() != gamma_len)
        throw ShapeError(fmt::format("coefficient lengths (alpha {}, beta {}, gamma {}) do not fit order {}",
                                     c.alpha.size(), c.beta.size(), c.gamma.size(), n));
    if (c.beta(0) == 0.0) throw DomainError("beta0 must be nonzero");
}

}  // namespace

const char* to_string(Structure s) {
    switch (s) {
        case Structure::StateSpace: return "ss";
        case Structure::SingleTf: return "single";
        case Structure::DualFeedback: return "dual";
    }
    return "?";
}

const char* to_string(Signal s) { return s == Signal::OutputBased ? "output" : "error"; }

Structure structure_from_string(const std::string& s) {
    if (s == "ss") return Structure::StateSpace;
    if (s == "single") return Structure::SingleTf;
    if (s == "dual") return Structure::DualFeedback;
    throw DomainError(fmt::format("unknown controller structure '{}' (expected ss, single or dual)", s));
}

Signal signal_from_string(const std::string& s) {
    if (s == "output") return Signal::OutputBased;
    if (s == "error") return Signal::ErrorBased;
    throw DomainError(fmt::format("unknown signal flavor '{}' (expected output or error)", s));
}

std::string to_string(const ControllerVariant& v) {
    return fmt::format("{}/{}", to_string(v.structure), to_string(v.signal));
}

std::vector<ControllerVariant> all_variants() {
    std::vector<ControllerVariant> out;
    for (auto s : {Structure::StateSpace, Structure::SingleTf, Structure::DualFeedback})
        for (auto f : {Signal::OutputBased, Signal::ErrorBased}) out.push_back({s, f});
    return out;
}

// ---------------------------------------------------------------------------

Controller::Controller(const AdrcDesign& design, ControllerVariant variant) : design_(design), variant_(variant) {
    design_.validate();
}

double Controller::update(double r, double y) {
    if (pending_) throw UsageError("update called twice without commit");
    const double x = variant_.signal == Signal::OutputBased ? y : r - y;
    const double u = compute(r, x);
    pending_ = true;
    started_ = true;
    return u;
}

double Controller::step_error(double e) {
    if (variant_.signal != Signal::ErrorBased) throw UsageError("step_error requires an error-based controller");
    if (pending_) throw UsageError("step_error called twice without commit");
    const double u = compute(0.0, e);
    pending_ = true;
    started_ = true;
    return u;
}

void Controller::commit(double u_lim) {
    if (!pending_) throw UsageError("commit without a preceding step");
    advance(u_lim);
    u_lim_prev_ = u_lim;
    pending_ = false;
}

void Controller::warm_start(double r, double y) {
    if (started_) throw UsageError("warm_start must precede the first update");
    initialize(r, variant_.signal == Signal::OutputBased ? y : r - y);
}

void Controller::reset() {
    clear();
    u_lim_prev_ = 0.0;
    pending_ = false;
    started_ = false;
}

std::string Controller::snapshot() const {
    SnapshotParts parts;
    parts.j = {{"structure", to_string(variant_.structure)},
               {"signal", to_string(variant_.signal)},
               {"design", design_to_json(design_)},
               {"u_lim_prev", u_lim_prev_},
               {"pending", pending_},
               {"started", started_}};
    save(parts);
    return parts.j.dump();
}

// ---------------------------------------------------------------------------

StateSpaceController::StateSpaceController(const AdrcDesign& design, const GainSet& gains, Signal signal)
    : Controller(design, {Structure::StateSpace, signal}), k_(gains.k), l_(gains.l) {
    const int n = design.order;
    if (k_.size() != n || l_.size() != n + 1)
        throw ShapeError(fmt::format("gain lengths (k {}, l {}) do not fit order {}", k_.size(), l_.size(), n));
    eso_ = build_eso(design, l_);
    h_.resize(n + 1);
    h_.head(n) = k_;
    h_(n) = 1.0;
    xhat_ = Vector::Zero(n + 1);
}

double StateSpaceController::compute(double r, double x) {
    const double b0 = design().b0;
    if (variant().signal == Signal::OutputBased) {
        xhat_ = eso_.A_eso * xhat_ + eso_.b_eso * u_lim_prev_ + l_ * x;
        return (k_(0) * r - h_.dot(xhat_)) / b0;
    }
    xhat_ = eso_.A_eso * xhat_ - eso_.b_eso * u_lim_prev_ + l_ * x;
    return h_.dot(xhat_) / b0;
}

void StateSpaceController::advance(double) {}

void StateSpaceController::initialize(double, double x) {
    // Observer at rest for a constant measurement x and zero input.
    xhat_.setZero();
    xhat_(0) = x;
}

void StateSpaceController::clear() { xhat_.setZero(); }

void StateSpaceController::save(SnapshotParts& parts) const {
    parts.j["k"] = to_json(k_);
    parts.j["l"] = to_json(l_);
    parts.j["A_eso"] = to_json(eso_.A_eso);
    parts.j["b_eso"] = to_json(eso_.b_eso);
    parts.j["state"] = to_json(xhat_);
}

void StateSpaceController::load(const SnapshotParts& parts) {
    eso_.A_eso = matrix_from(parts.j.at("A_eso"));
    eso_.b_eso = vector_from(parts.j.at("b_eso"));
    xhat_ = vector_from(parts.j.at("state"));
    if (xhat_.size() != k_.size() + 1 || eso_.A_eso.rows() != xhat_.size())
        throw ShapeError("snapshot state does not fit the controller order");
}

// ---------------------------------------------------------------------------

TfFilter::TfFilter(Vector num, Vector den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.size() == 0 || den_(0) == 0.0) throw DomainError("filter denominator needs a nonzero leading coefficient");
    clear();
}

double TfFilter::step(double x) {
    double acc = num_(0) * x;
    for (Eigen::Index i = 1; i < num_.size(); ++i) acc += num_(i) * x_hist_(i - 1);
    for (Eigen::Index i = 1; i < den_.size(); ++i) acc -= den_(i) * y_hist_(i - 1);
    const double y = acc / den_(0);
    for (Eigen::Index i = x_hist_.size() - 1; i > 0; --i) x_hist_(i) = x_hist_(i - 1);
    if (x_hist_.size() > 0) x_hist_(0) = x;
    for (Eigen::Index i = y_hist_.size() - 1; i > 0; --i) y_hist_(i) = y_hist_(i - 1);
    if (y_hist_.size() > 0) y_hist_(0) = y;
    return y;
}

void TfFilter::set_history(double x_in, double y_out) {
    x_hist_.setConstant(x_in);
    y_hist_.setConstant(y_out);
}

void TfFilter::clear() {
    x_hist_ = Vector::Zero(std::max<Eigen::Index>(num_.size() - 1, 0));
    y_hist_ = Vector::Zero(std::max<Eigen::Index>(den_.size() - 1, 0));
}

void TfFilter::set_state(const Vector& inputs, const Vector& outputs) {
    if (inputs.size() != x_hist_.size() || outputs.size() != y_hist_.size())
        throw ShapeError("filter history length mismatch");
    x_hist_ = inputs;
    y_hist_ = outputs;
}

// ---------------------------------------------------------------------------

namespace {

Vector with_leading_one(const Vector& tail) {
    Vector v(tail.size() + 1);
    v(0) = 1.0;
    v.tail(tail.size()) = tail;
    return v;
}

}  // namespace

SingleTfController::SingleTfController(const AdrcDesign& design, const TfCoefficients& coeffs, Signal signal,
                                       double clamp_min, double clamp_max)
    : Controller(design, {Structure::SingleTf, signal}),
      coeffs_(coeffs),
      clamp_min_(clamp_min),
      clamp_max_(clamp_max) {
    check_coefficients(design, coeffs, TfVariant::SingleTf);
    if (!(clamp_min_ < clamp_max_)) throw DomainError("accumulator clamp needs min < max");
    prefilter_ = TfFilter(coeffs_.gamma, coeffs_.beta);
    feedback_ = TfFilter(coeffs_.beta, with_leading_one(coeffs_.alpha));
}

double SingleTfController::compute(double r, double x) {
    double e = x;
    if (variant().signal == Signal::OutputBased) {
        r_pf_ = prefilter_.step(r);
        e = r_pf_ - x;
    } else {
        r_pf_ = r;
    }
    acc_ = std::clamp(acc_ + feedback_.step(e), clamp_min_, clamp_max_);
    return acc_;
}

void SingleTfController::advance(double) {}

void SingleTfController::initialize(double r, double) {
    // The prefilter has unity DC gain; the integrating feedback path has no
    // rest state for a nonzero error and stays cleared.
    if (variant().signal == Signal::OutputBased) prefilter_.set_history(r, r);
}

void SingleTfController::clear() {
    prefilter_.clear();
    feedback_.clear();
    acc_ = 0.0;
    r_pf_ = 0.0;
}

Vector SingleTfController::state() const {
    const auto& a = prefilter_.inputs();
    const auto& b = prefilter_.outputs();
    const auto& c = feedback_.inputs();
    const auto& d = feedback_.outputs();
    Vector s(a.size() + b.size() + c.size() + d.size() + 1);
    s << a, b, c, d, acc_;
    return s;
}

void SingleTfController::save(SnapshotParts& parts) const {
    parts.j["coefficients"] = coefficients_to_json(coeffs_);
    parts.j["clamp"] = {bound_to_json(clamp_min_), bound_to_json(clamp_max_)};
    parts.j["prefilter"] = {to_json(prefilter_.inputs()), to_json(prefilter_.outputs())};
    parts.j["feedback"] = {to_json(feedback_.inputs()), to_json(feedback_.outputs())};
    parts.j["accumulator"] = acc_;
    parts.j["prefiltered"] = r_pf_;
}

void SingleTfController::load(const SnapshotParts& parts) {
    const json& pf = parts.j.at("prefilter");
    const json& fb = parts.j.at("feedback");
    prefilter_.set_state(vector_from(pf.at(0)), vector_from(pf.at(1)));
    feedback_.set_state(vector_from(fb.at(0)), vector_from(fb.at(1)));
    acc_ = parts.j.at("accumulator").get<double>();
    r_pf_ = parts.j.at("prefiltered").get<double>();
}

// ---------------------------------------------------------------------------

DualFeedbackController::DualFeedbackController(const AdrcDesign& design, const TfCoefficients& coeffs,
                                               Signal signal)
    : Controller(design, {Structure::DualFeedback, signal}),
      coeffs_(coeffs),
      w_(Vector::Zero(design.order + 1)),
      sign_(signal == Signal::OutputBased ? -1.0 : 1.0) {
    check_coefficients(design, coeffs, TfVariant::DualFeedback);
}

double DualFeedbackController::compute(double r, double x) {
    x_ = sign_ * x;
    v_ = coeffs_.beta(0) * x_ + w_(0);
    if (variant().signal == Signal::OutputBased) return coeffs_.k1_over_b0 * r + v_;
    return v_;
}

void DualFeedbackController::advance(double u_lim) {
    const Eigen::Index m = w_.size();  // n + 1
    for (Eigen::Index j = 0; j < m; ++j) {
        double next = j + 1 < m ? w_(j + 1) : 0.0;
        if (j + 1 < coeffs_.beta.size()) next += coeffs_.beta(j + 1) * x_;
        w_(j) = next + coeffs_.gamma(j) * u_lim - coeffs_.alpha(j) * v_;
    }
}

void DualFeedbackController::initialize(double, double x) {
    // Rest state for a constant measurement x and u_lim = 0.
    const Eigen::Index m = w_.size();
    const double xin = sign_ * x;
    const double v_ss = coeffs_.beta.sum() * xin / (1.0 + coeffs_.alpha.sum());
    double acc = 0.0;
    for (Eigen::Index j = m - 1; j >= 0; --j) {
        if (j + 1 < coeffs_.beta.size()) acc += coeffs_.beta(j + 1) * xin;
        acc -= coeffs_.alpha(j) * v_ss;
        w_(j) = acc;
    }
}

void DualFeedbackController::clear() {
    w_.setZero();
    x_ = 0.0;
    v_ = 0.0;
}

void DualFeedbackController::save(SnapshotParts& parts) const {
    parts.j["coefficients"] = coefficients_to_json(coeffs_);
    parts.j["state"] = to_json(w_);
    parts.j["input"] = x_;
    parts.j["feedback"] = v_;
}

void DualFeedbackController::load(const SnapshotParts& parts) {
    w_ = vector_from(parts.j.at("state"));
    if (w_.size() != design().order + 1) throw ShapeError("snapshot state does not fit the controller order");
    x_ = parts.j.at("input").get<double>();
    v_ = parts.j.at("feedback").get<double>();
}

// ---------------------------------------------------------------------------

TfCoefficients controller_coefficients(const ControllerSpec& spec) {
    const TfVariant variant =
        spec.variant.structure == Structure::SingleTf ? TfVariant::SingleTf : TfVariant::DualFeedback;
    if (spec.coefficients) return *spec.coefficients;
    if (spec.gains == GainMethod::DiscreteTime) return tf_coefficients(spec.design, variant);
    const GainSet g = sampled_gains(spec.design, spec.gains);
    return tf_coefficients_oracle(spec.design, g.k, g.l, variant);
}

std::unique_ptr<Controller> make_controller(const ControllerSpec& spec, const std::optional<LimiterSpec>& limiter) {
    spec.design.validate();
    switch (spec.variant.structure) {
        case Structure::StateSpace:
            return std::make_unique<StateSpaceController>(spec.design, sampled_gains(spec.design, spec.gains),
                                                          spec.variant.signal);
        case Structure::SingleTf: {
            double lo = -INFINITY, hi = INFINITY;
            if (limiter && limiter->magnitude_enabled) {
                lo = limiter->u_min;
                hi = limiter->u_max;
            }
            return std::make_unique<SingleTfController>(spec.design, controller_coefficients(spec),
                                                        spec.variant.signal, lo, hi);
        }
        case Structure::DualFeedback:
            return std::make_unique<DualFeedbackController>(spec.design, controller_coefficients(spec),
                                                            spec.variant.signal);
    }
    throw DomainError("unknown controller structure");
}

std::unique_ptr<Controller> restore_controller(const std::string& text) {
    Controller::SnapshotParts parts;
    try {
        parts.j = json::parse(text);
    } catch (const json::exception& e) {
        throw DomainError(fmt::format("controller snapshot is not valid JSON: {}", e.what()));
    }
    const json& j = parts.j;
    try {
        const AdrcDesign design = design_from(j.at("design"));
        const Structure structure = structure_from_string(j.at("structure").get<std::string>());
        const Signal signal = signal_from_string(j.at("signal").get<std::string>());

        std::unique_ptr<Controller> c;
        switch (structure) {
            case Structure::StateSpace:
                c = std::make_unique<StateSpaceController>(
                    design, GainSet{GainMethod::DiscreteTime, vector_from(j.at("k")), vector_from(j.at("l"))},
                    signal);
                break;
            case Structure::SingleTf: {
                const json& clamp = j.at("clamp");
                c = std::make_unique<SingleTfController>(design, coefficients_from(j.at("coefficients")), signal,
                                                         bound_from(clamp.at(0), -INFINITY),
                                                         bound_from(clamp.at(1), INFINITY));
                break;
            }
            case Structure::DualFeedback:
                c = std::make_unique<DualFeedbackController>(design, coefficients_from(j.at("coefficients")),
                                                             signal);
                break;
        }
        c->load(parts);
        c->u_lim_prev_ = j.at("u_lim_prev").get<double>();
        c->pending_ = j.at("pending").get<bool>();
        c->started_ = j.at("started").get<bool>();
        return c;
    } catch (const json::exception& e) {
        throw DomainError(fmt::format("malformed controller snapshot: {}", e.what()));
    }
}

}  // namespace adrc
