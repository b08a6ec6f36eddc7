#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "freshsim/costmodel.hpp"
#include "freshsim/specfun.hpp"

namespace freshsim {

/// Arrival/service rates of the M/M/1 queue with the stability invariant
/// 0 < rho < 1 enforced at construction.
class QueueParams {
public:
    QueueParams(double arrival_rate, double service_rate)
        : lambda_(arrival_rate), mu_(service_rate) {
        if (!(lambda_ > 0.0) || !(mu_ > 0.0))
            throw std::invalid_argument("QueueParams: rates must be positive");
        if (!(lambda_ < mu_))
            throw std::invalid_argument("QueueParams: unstable queue (requires lambda < mu)");
    }

    static QueueParams from_rho(double rho, double service_rate) {
        return QueueParams(rho * service_rate, service_rate);
    }

    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    double rho() const { return lambda_ / mu_; }

    /// Rate mu(1 - rho) = mu - lambda of the stationary system-time law.
    double system_time_rate() const { return mu_ - lambda_; }

private:
    double lambda_;
    double mu_;
};

/// Stationary averages for one (QueueParams, CostModel) point. When the
/// exponential-kind moment conditions fail, avg_coud is +inf, valid is false
/// and validity_note names the violated condition; the VoIU fields stay
/// finite (per-update value is bounded regardless).
struct AnalyticResult {
    double avg_coud = std::numeric_limits<double>::quiet_NaN();
    double mean_voiu = std::numeric_limits<double>::quiet_NaN();
    double avg_voiu_rate = std::numeric_limits<double>::quiet_NaN();
    bool valid = true;
    std::string validity_note;
};

/// Stationary system-time density mu(1-rho) e^{-mu(1-rho) t}, t >= 0.
inline double system_time_pdf(const QueueParams& q, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("system_time_pdf: t must be >= 0");
    const double rate = q.system_time_rate();
    return rate * std::exp(-rate * t);
}

namespace detail {

inline constexpr double kTailCutoff = 36.841361487904734;  // -ln(1e-16)

// E[g(Y,T)] with Y ~ exp(lambda) and T ~ exp(mu - lambda) taken independent,
// by iterated adaptive quadrature (inner over t, outer over y). Tails are cut
// where the exponential weight drops to 1e-16 of its peak.
template <class G>
double expect_y_t(const QueueParams& q, G&& g, const QuadratureSpec& spec) {
    const double lambda = q.lambda();
    const double trate = q.system_time_rate();
    const double y_hi = kTailCutoff / lambda;
    const double t_hi = kTailCutoff / trate;
    auto outer = [&](double y) {
        auto inner = [&](double t) { return g(y, t) * trate * std::exp(-trate * t); };
        return integrate(inner, 0.0, t_hi, spec) * lambda * std::exp(-lambda * y);
    };
    return integrate(outer, 0.0, y_hi, spec);
}

}  // namespace detail

/// Average cost for the linear kind, alpha (1/mu)(1 + 1/rho + rho^2/(1-rho)).
/// Exact for the dependent (Y, T) process.
inline double avg_coud_linear(const QueueParams& q, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("avg_coud_linear: alpha must be >= 0");
    const double rho = q.rho();
    return alpha / q.mu() * (1.0 + 1.0 / rho + rho * rho / (1.0 - rho));
}

/// Average cost for the exponential kind. Finite only while the moment
/// generating functions of T and Y converge, i.e. alpha < min(lambda,
/// mu - lambda) strictly; otherwise the average is +inf and the violated
/// condition is reported.
inline AnalyticResult avg_coud_exponential(const QueueParams& q, double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("avg_coud_exponential: alpha must be > 0");
    AnalyticResult out;
    const double lambda = q.lambda();
    const double trate = q.system_time_rate();
    std::string violated;
    if (alpha >= lambda) violated = "alpha >= lambda";
    if (alpha >= trate)
        violated += (violated.empty() ? "" : "; ") + std::string("alpha >= mu - lambda");
    if (!violated.empty()) {
        out.avg_coud = std::numeric_limits<double>::infinity();
        out.valid = false;
        out.validity_note = violated + " (average cost diverges)";
        return out;
    }
    out.avg_coud = lambda * trate / ((alpha - trate) * (alpha - lambda)) - 1.0;
    return out;
}

/// Average cost for the logarithmic kind, lambda E[Q] with the slab expected
/// against the independent interarrival/system-time marginals by iterated
/// quadrature. Always finite.
inline AnalyticResult avg_coud_logarithmic(const QueueParams& q, double alpha,
                                           const QuadratureSpec& spec = {}) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("avg_coud_logarithmic: alpha must be > 0");
    const CostModel model(CostKind::Logarithmic, alpha);
    AnalyticResult out;
    out.avg_coud =
        q.lambda() *
        detail::expect_y_t(q, [&](double y, double t) { return area(model, y, t); }, spec);
    return out;
}

/// Mean per-update value for the linear kind,
/// [mu(1-rho)/(2 lambda)] 2F1(1,2;3;(2 lambda - mu)/lambda).
inline double mean_voiu_linear(const QueueParams& q) {
    const double z = (2.0 * q.lambda() - q.mu()) / q.lambda();
    return q.system_time_rate() / (2.0 * q.lambda()) * hyp2f1_1_2_3(z);
}

/// Mean per-update value by iterated quadrature against the independent
/// marginals. Intended for the exponential and logarithmic kinds; the linear
/// kind is accepted as a cross-check of the closed form.
inline double mean_voiu_numeric(const QueueParams& q, const CostModel& model,
                                const QuadratureSpec& spec = {}) {
    if (model.degenerate())
        throw degenerate_cost_error("mean_voiu_numeric: alpha = 0 has undefined value");
    return detail::expect_y_t(
        q, [&](double y, double t) { return voiu(model, y, t); }, spec);
}

/// Long-run delivered value per unit time, lambda E[V].
inline double avg_voiu_rate(const QueueParams& q, const CostModel& model,
                            const QuadratureSpec& spec = {}) {
    const double mean =
        model.kind == CostKind::Linear ? mean_voiu_linear(q) : mean_voiu_numeric(q, model, spec);
    return q.lambda() * mean;
}

/// Full stationary evaluation of one parameter point: average cost, mean
/// per-update value and value rate, with the exponential-kind validity flag.
inline AnalyticResult evaluate(const QueueParams& q, const CostModel& model,
                               const QuadratureSpec& spec = {}) {
    if (model.degenerate())
        throw degenerate_cost_error("evaluate: alpha = 0 has undefined per-update value");
    AnalyticResult out;
    switch (model.kind) {
        case CostKind::Linear:
            out.avg_coud = avg_coud_linear(q, model.alpha);
            out.mean_voiu = mean_voiu_linear(q);
            break;
        case CostKind::Exponential:
            out = avg_coud_exponential(q, model.alpha);
            out.mean_voiu = mean_voiu_numeric(q, model, spec);
            break;
        case CostKind::Logarithmic:
            out = avg_coud_logarithmic(q, model.alpha, spec);
            out.mean_voiu = mean_voiu_numeric(q, model, spec);
            break;
    }
    out.avg_voiu_rate = q.lambda() * out.mean_voiu;
    return out;
}

}  // namespace freshsim
