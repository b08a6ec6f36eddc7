#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "freshsim/specfun.hpp"

namespace freshsim {

enum class CostKind { Linear, Exponential, Logarithmic };

inline std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::Linear: return "linear";
        case CostKind::Exponential: return "exponential";
        case CostKind::Logarithmic: return "logarithmic";
    }
    throw std::logic_error("to_string: bad CostKind");
}

inline CostKind parse_cost_kind(std::string_view name) {
    if (name == "linear") return CostKind::Linear;
    if (name == "exponential") return CostKind::Exponential;
    if (name == "logarithmic") return CostKind::Logarithmic;
    throw std::invalid_argument("unknown cost kind '" + std::string(name) +
                                "' (expected linear|exponential|logarithmic)");
}

/// Requested a quantity that is undefined when alpha = 0 (the staleness cost
/// is identically zero, so per-update value is 0/0).
class degenerate_cost_error : public std::domain_error {
public:
    explicit degenerate_cost_error(const std::string& msg) : std::domain_error(msg) {}
};

/// Staleness cost family selector. alpha >= 0; alpha = 0 collapses the cost
/// to zero and is allowed but flagged via degenerate().
struct CostModel {
    CostKind kind = CostKind::Linear;
    double alpha = 1.0;

    CostModel() = default;
    CostModel(CostKind k, double a) : kind(k), alpha(a) {
        if (!(a >= 0.0)) throw std::invalid_argument("CostModel: alpha must be >= 0");
    }

    bool degenerate() const { return alpha == 0.0; }
};

/// f_s(t): alpha*t | e^{alpha t} - 1 | ln(alpha t + 1). f_s(0) = 0 for every
/// kind; nonnegative and increasing in t.
inline double cost(const CostModel& model, double elapsed) {
    if (!(elapsed >= 0.0))
        throw std::invalid_argument("cost: negative elapsed time (caller bug)");
    switch (model.kind) {
        case CostKind::Linear: return model.alpha * elapsed;
        case CostKind::Exponential: return std::expm1(model.alpha * elapsed);
        case CostKind::Logarithmic: return std::log1p(model.alpha * elapsed);
    }
    throw std::logic_error("cost: bad CostKind");
}

/// Antiderivative F(x) = int_0^x f_s(t) dt, F(0) = 0.
inline double cost_antiderivative(const CostModel& model, double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("cost_antiderivative: negative argument");
    const double a = model.alpha;
    switch (model.kind) {
        case CostKind::Linear: return 0.5 * a * x * x;
        case CostKind::Exponential:
            return a == 0.0 ? 0.0 : std::expm1(a * x) / a - x;
        case CostKind::Logarithmic:
            return a == 0.0 ? 0.0 : ((a * x + 1.0) * std::log1p(a * x) - a * x) / a;
    }
    throw std::logic_error("cost_antiderivative: bad CostKind");
}

/// Inverse of f_s: the elapsed time at which the cost reaches level c.
inline double inverse_cost(const CostModel& model, double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("inverse_cost: negative cost level");
    if (c == 0.0) return 0.0;
    if (model.degenerate())
        throw degenerate_cost_error("inverse_cost: alpha = 0 cost never leaves zero");
    const double a = model.alpha;
    switch (model.kind) {
        case CostKind::Linear: return c / a;
        case CostKind::Exponential: return std::log1p(c) / a;
        case CostKind::Logarithmic: return std::expm1(c) / a;
    }
    throw std::logic_error("inverse_cost: bad CostKind");
}

/// Fractional cost reduction delivered by an update with interarrival Y and
/// system time T. Always in [0, 1]; exactly 1 at T = 0.
///
///   linear:       Y / (Y + T)                      (alpha cancels)
///   exponential:  expm1(-aY) / expm1(-a(Y+T))      (overflow-free form)
///   logarithmic:  1 - ln(aT+1)/ln(a(Y+T)+1)
inline double voiu(const CostModel& model, double interarrival, double system_time) {
    if (!(interarrival > 0.0)) throw std::invalid_argument("voiu: requires Y > 0");
    if (!(system_time >= 0.0)) throw std::invalid_argument("voiu: requires T >= 0");
    if (model.degenerate())
        throw degenerate_cost_error("voiu: undefined for alpha = 0 (0/0)");
    const double a = model.alpha;
    const double y = interarrival;
    const double t = system_time;
    switch (model.kind) {
        case CostKind::Linear: return y / (y + t);
        case CostKind::Exponential: return std::expm1(-a * y) / std::expm1(-a * (y + t));
        case CostKind::Logarithmic:
            return 1.0 - std::log1p(a * t) / std::log1p(a * (y + t));
    }
    throw std::logic_error("voiu: bad CostKind");
}

/// Sawtooth slab between consecutive receptions, Q = F(Y + T) - F(T):
///
///   linear:       a (YT + Y^2/2)
///   exponential:  e^{aT} expm1(aY)/a - Y
///   logarithmic:  [(a(Y+T)+1) ln(a(Y+T)+1) - (aT+1) ln(aT+1)]/a - Y
inline double area(const CostModel& model, double interarrival, double system_time) {
    if (!(interarrival > 0.0)) throw std::invalid_argument("area: requires Y > 0");
    if (!(system_time >= 0.0)) throw std::invalid_argument("area: requires T >= 0");
    const double a = model.alpha;
    const double y = interarrival;
    const double t = system_time;
    switch (model.kind) {
        case CostKind::Linear: return a * (y * t + 0.5 * y * y);
        case CostKind::Exponential:
            if (a == 0.0)
                throw degenerate_cost_error("area: exponential kind needs alpha > 0");
            return std::exp(a * t) * std::expm1(a * y) / a - y;
        case CostKind::Logarithmic:
            if (a == 0.0)
                throw degenerate_cost_error("area: logarithmic kind needs alpha > 0");
            return ((a * (y + t) + 1.0) * std::log1p(a * (y + t)) -
                    (a * t + 1.0) * std::log1p(a * t)) /
                       a -
                   y;
    }
    throw std::logic_error("area: bad CostKind");
}

/// Quadrature route for the slab: integrates the defining cost curves instead
/// of using the closed form. Oracle counterpart of area().
inline double area_numeric(const CostModel& model, double interarrival, double system_time,
                           const QuadratureSpec& spec = {}) {
    if (!(interarrival > 0.0)) throw std::invalid_argument("area_numeric: requires Y > 0");
    if (!(system_time >= 0.0)) throw std::invalid_argument("area_numeric: requires T >= 0");
    const double y = interarrival;
    const double t = system_time;
    // cost accrued since the previous generation, over [0, Y+T], minus the
    // part re-covered by the next sawtooth branch over [Y, Y+T]
    const double grown =
        integrate([&](double u) { return cost(model, u); }, 0.0, y + t, spec);
    const double recovered =
        integrate([&](double u) { return cost(model, u - y); }, y, y + t, spec);
    return grown - recovered;
}

/// One delivered update: timestamps plus the derived per-update quantities.
struct UpdateRecord {
    std::int64_t index = 0;
    double gen_time = 0.0;
    double recv_time = 0.0;
    double interarrival = 0.0;  // Y_i = t_i - t_{i-1}
    double system_time = 0.0;   // T_i = t'_i - t_i
    double voiu = 0.0;
    double area = 0.0;
};

/// Builds a record from consecutive generation events and the reception time,
/// deriving Y, T, V and Q consistently.
inline UpdateRecord make_update_record(const CostModel& model, std::int64_t index,
                                       double prev_gen_time, double gen_time,
                                       double recv_time) {
    if (!(gen_time > prev_gen_time))
        throw std::invalid_argument("make_update_record: generation times must increase");
    if (!(recv_time >= gen_time))
        throw std::invalid_argument("make_update_record: reception precedes generation");
    UpdateRecord r;
    r.index = index;
    r.gen_time = gen_time;
    r.recv_time = recv_time;
    r.interarrival = gen_time - prev_gen_time;
    r.system_time = recv_time - gen_time;
    r.voiu = voiu(model, r.interarrival, r.system_time);
    r.area = area(model, r.interarrival, r.system_time);
    return r;
}

}  // namespace freshsim
