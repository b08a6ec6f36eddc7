#pragma once

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace freshsim {

/// Tolerances and subdivision budget for adaptive quadrature.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1)
            throw std::invalid_argument(
                "QuadratureSpec: need abs_tol > 0, rel_tol > 0, max_subdivisions >= 1");
    }
};

/// Subdivision budget exhausted before the requested tolerance was met.
/// Carries the best estimate obtained so far.
class quadrature_error : public std::runtime_error {
public:
    quadrature_error(const std::string& msg, double best, double err)
        : std::runtime_error(msg), best_estimate(best), error_estimate(err) {}

    double best_estimate;
    double error_estimate;
};

namespace detail {

// Gauss-Kronrod 7-15 pair. Kronrod abscissae on [0,1] side of the interval;
// even indices are also Gauss points.
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGk15KronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGk15GaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
    double lo, hi;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

// One G7/K15 evaluation over [lo, hi]; error estimate follows the QUADPACK
// resasc scaling.
template <class F>
Segment gk15(F&& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double halfwidth = 0.5 * (hi - lo);

    double fv[15];
    const double fc = f(center);
    double resk = kGk15KronrodW[7] * fc;
    double resg = kGk15GaussW[3] * fc;
    fv[14] = fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = halfwidth * kGk15Nodes[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        resk += kGk15KronrodW[j] * (f1 + f2);
        if (j % 2 == 1) resg += kGk15GaussW[j / 2] * (f1 + f2);
    }

    const double reskh = resk * 0.5;
    double resasc = kGk15KronrodW[7] * std::fabs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kGk15KronrodW[j] *
                  (std::fabs(fv[2 * j] - reskh) + std::fabs(fv[2 * j + 1] - reskh));
    resasc *= std::fabs(halfwidth);

    const double value = resk * halfwidth;
    double err = std::fabs((resk - resg) * halfwidth);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    return Segment{lo, hi, value, err};
}

template <class F>
double integrate_finite(F&& f, double lo, double hi, const QuadratureSpec& spec) {
    std::priority_queue<Segment> segments;
    Segment first = gk15(f, lo, hi);
    double total = first.value;
    double total_err = first.error;
    segments.push(first);

    int splits = 0;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)) ||
           !std::isfinite(total)) {
        if (splits >= spec.max_subdivisions || segments.empty())
            throw quadrature_error(
                "integrate: tolerance not reached after " + std::to_string(splits) +
                    " subdivisions",
                total, total_err);
        Segment worst = segments.top();
        segments.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(worst.lo < mid && mid < worst.hi))
            throw quadrature_error("integrate: interval collapsed below representable width",
                                   total, total_err);
        Segment left = gk15(f, worst.lo, mid);
        Segment right = gk15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        segments.push(left);
        segments.push(right);
        ++splits;
    }
    return total;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over (lo, hi). A semi-infinite
/// domain (hi = +inf) is mapped onto (0, 1) with t = lo + u/(1-u). Endpoints
/// are never evaluated, so integrable endpoint singularities are tolerated.
/// Throws quadrature_error (with the running estimate attached) if the
/// subdivision budget runs out.
template <class F>
double integrate(F&& f, double lo, double hi, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (std::isnan(lo) || std::isnan(hi) || std::isinf(lo))
        throw std::invalid_argument("integrate: bad interval");
    if (lo == hi) return 0.0;
    if (hi < lo) return -integrate(f, hi, lo, spec);
    if (std::isinf(hi)) {
        auto mapped = [&f, lo](double u) {
            const double w = 1.0 - u;
            return f(lo + u / w) / (w * w);
        };
        return detail::integrate_finite(mapped, 0.0, 1.0, spec);
    }
    return detail::integrate_finite(f, lo, hi, spec);
}

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

/// Exponential integral Ei(x) = -PV int_{-x}^inf e^{-t}/t dt.
///
///   -1 <= x < 0 or 0 < x <= 40:  Ei(x) = gamma + ln|x| + sum_k x^k/(k k!)
///   x < -1:                      Ei(x) = -E1(-x), E1 by modified-Lentz
///                                continued fraction (the power series loses
///                                all significance there in doubles)
///   x > 40:                      e^x/x sum_k k!/x^k truncated at the
///                                smallest term
inline double exp_integral_ei(double x) {
    if (std::isnan(x)) throw std::domain_error("exp_integral_ei: NaN argument");
    if (x == 0.0)
        throw std::domain_error("exp_integral_ei: x = 0 is a logarithmic singularity");
    if (x > 700.0) throw std::overflow_error("exp_integral_ei: overflow for x > 700");

    if (x < -1.0) {
        const double t = -x;
        // E1(t) = e^{-t} / (t + 1 - 1/(t + 3 - 4/(t + 5 - 9/(...))))
        double b = t + 1.0;
        double c = 1.0 / std::numeric_limits<double>::min();
        double d = 1.0 / b;
        double h = d;
        for (int k = 1; k <= 300; ++k) {
            const double a = -static_cast<double>(k) * static_cast<double>(k);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            const double delta = c * d;
            h *= delta;
            if (std::fabs(delta - 1.0) <= std::numeric_limits<double>::epsilon()) break;
        }
        return -std::exp(-t) * h;
    }

    if (x <= 40.0) {
        double sum = 0.0;
        double term = 1.0;
        for (int k = 1; k <= 400; ++k) {
            term *= x / k;
            const double add = term / k;
            sum += add;
            if (std::fabs(add) <= std::numeric_limits<double>::epsilon() * std::fabs(sum))
                break;
        }
        return kEulerGamma + std::log(std::fabs(x)) + sum;
    }

    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double next = term * k / x;
        if (next >= term) break;  // asymptotic tail started to diverge
        term = next;
        sum += term;
        if (term <= 1e-18 * sum) break;
    }
    return std::exp(x) / x * sum;
}

/// Gauss hypergeometric value 2F1(1,2;3;z) for z < 1. Away from zero this is
/// the closed form 2(-z - ln(1-z))/z^2; a short series take over for
/// |z| < 1e-4 where the closed form is a 0/0 cancellation.
inline double hyp2f1_1_2_3(double z) {
    if (!(z < 1.0)) throw std::domain_error("hyp2f1_1_2_3: requires z < 1");
    if (std::fabs(z) < 1e-4) {
        // sum_k 2 z^k/(k+2); truncation error below 1e-36 at |z| = 1e-4
        double sum = 0.0;
        double zk = 1.0;
        for (int k = 0; k <= 8; ++k) {
            sum += 2.0 * zk / (k + 2);
            zk *= z;
        }
        return sum;
    }
    return 2.0 * (-z - std::log1p(-z)) / (z * z);
}

}  // namespace freshsim
