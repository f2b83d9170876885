#include "adrc/limiter.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "adrc/design.hpp"

namespace adrc {

void LimiterSpec::validate() const {
    if (magnitude_enabled && !(u_min < u_max))
        throw DomainError(fmt::format("limiter needs u_min < u_max (got [{}, {}])", u_min, u_max));
    if (rate_enabled && !(rate_max >= 0.0))
        throw DomainError(fmt::format("limiter rate_max must be >= 0 (got {})", rate_max));
}

LimiterOutput apply_limiter(const LimiterSpec& spec, double u, double u_lim_prev, double T) {
    LimiterOutput out{u, false, false};
    if (spec.rate_enabled) {
        const double step = spec.rate_max * T;
        const double lo = u_lim_prev - step;
        const double hi = u_lim_prev + step;
        if (out.u_lim < lo || out.u_lim > hi) {
            out.u_lim = std::clamp(out.u_lim, lo, hi);
            out.rate_active = true;
        }
    }
    if (spec.magnitude_enabled && (out.u_lim < spec.u_min || out.u_lim > spec.u_max)) {
        out.u_lim = std::clamp(out.u_lim, spec.u_min, spec.u_max);
        out.magnitude_active = true;
    }
    return out;
}

}  // namespace adrc
