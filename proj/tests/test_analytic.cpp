#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "freshsim/analytic.hpp"

using namespace freshsim;
using Catch::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Average cost over independent (Y, T) reduced to one dimension: the cost
// level s is attained while T <= s < T + Y, so
//   C = int_0^inf f_s(s) * lambda*m*(e^{-lambda s} - e^{-m s})/(m - lambda) ds.
// Independent algebraic route used as an oracle for the iterated quadrature.
double avg_coud_reduced(const QueueParams& q, const CostModel& model) {
    const double lambda = q.lambda();
    const double m = q.system_time_rate();
    REQUIRE(lambda != m);  // oracle keeps the generic branch only
    QuadratureSpec spec;
    spec.abs_tol = 1e-12;
    auto w = [&](double s) {
        return lambda * m * (std::exp(-lambda * s) - std::exp(-m * s)) / (m - lambda);
    };
    const double upper = 60.0 / std::min(lambda, m);
    return integrate([&](double s) { return cost(model, s) * w(s); }, 0.0, upper, spec);
}

// Mean exponential-kind value by the telescoping series
//   E[V_E] = sum_k M_T(-k a) [M_Y(-k a) - M_Y(-(k+1) a)]
// with M the exponential moment generating functions; independent of any
// quadrature.
double mean_voiu_exp_series(const QueueParams& q, double alpha) {
    const double lambda = q.lambda();
    const double m = q.system_time_rate();
    auto my = [&](double k) { return lambda / (lambda + k * alpha); };
    auto mt = [&](double k) { return m / (m + k * alpha); };
    double sum = 0.0;
    for (int k = 0; k < 2000000; ++k) {
        const double term = mt(k) * (my(k) - my(k + 1.0));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

}  // namespace

TEST_CASE("QueueParams enforces stability") {
    CHECK_THROWS_AS(QueueParams(1.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(QueueParams(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(QueueParams(-0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(QueueParams(0.5, 0.0), std::invalid_argument);
    const QueueParams q(0.5, 2.0);
    CHECK(q.rho() == 0.25);
    CHECK(q.system_time_rate() == 1.5);
    CHECK(QueueParams::from_rho(0.25, 2.0).lambda() == 0.5);
}

TEST_CASE("system_time_pdf matches the stationary law") {
    CHECK(system_time_pdf(QueueParams::from_rho(0.5, 1.0), 0.0) == 0.5);
    CHECK(system_time_pdf(QueueParams::from_rho(0.25, 2.0), 1.0) ==
          Approx(1.5 * std::exp(-1.5)).epsilon(1e-15));
    const QueueParams q(0.7, 1.3);
    CHECK(integrate([&](double t) { return system_time_pdf(q, t); }, 0.0, kInf) ==
          Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(system_time_pdf(q, -1.0), std::invalid_argument);
}

TEST_CASE("avg_coud_linear fixtures and scaling") {
    const QueueParams q = QueueParams::from_rho(0.5, 1.0);
    CHECK(avg_coud_linear(q, 1.0) == 3.5);
    CHECK(avg_coud_linear(q, 0.1) == Approx(0.35).epsilon(1e-15));
    CHECK(avg_coud_linear(q, 0.0) == 0.0);

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> rhos(0.05, 0.95);
    std::uniform_real_distribution<double> ks(0.1, 10.0);
    for (int i = 0; i < 200; ++i) {
        const QueueParams qq = QueueParams::from_rho(rhos(gen), 1.0);
        const double a = ks(gen);
        const double k = ks(gen);
        CHECK(avg_coud_linear(qq, k * a) == Approx(k * avg_coud_linear(qq, a)).epsilon(1e-12));
    }
}

TEST_CASE("avg_coud_exponential value and validity conditions") {
    {
        const AnalyticResult r = avg_coud_exponential(QueueParams(0.5, 1.0), 0.1);
        CHECK(r.valid);
        CHECK(std::fabs(r.avg_coud - 0.5625) <= 1e-12);
    }
    {
        // alpha >= lambda diverges
        const AnalyticResult r = avg_coud_exponential(QueueParams(0.5, 1.0), 0.6);
        CHECK_FALSE(r.valid);
        CHECK(std::isinf(r.avg_coud));
        CHECK(r.validity_note.find("alpha >= lambda") != std::string::npos);
    }
    {
        // alpha >= mu - lambda diverges
        const AnalyticResult r = avg_coud_exponential(QueueParams(0.9, 1.0), 0.2);
        CHECK_FALSE(r.valid);
        CHECK(r.validity_note.find("alpha >= mu - lambda") != std::string::npos);
    }
    CHECK_THROWS_AS(avg_coud_exponential(QueueParams(0.5, 1.0), 0.0), std::invalid_argument);
}

TEST_CASE("avg_coud_exponential validity flips exactly at the boundaries") {
    const QueueParams q(0.5, 1.0);  // lambda = mu - lambda = 0.5
    CHECK_FALSE(avg_coud_exponential(q, 0.5).valid);
    CHECK(avg_coud_exponential(q, 0.5 - 1e-9).valid);
    const QueueParams skew(0.9, 1.0);  // binding condition is mu - lambda = 0.1
    CHECK_FALSE(avg_coud_exponential(skew, 0.1).valid);
    CHECK(avg_coud_exponential(skew, 0.1 - 1e-12).valid);
    CHECK_FALSE(avg_coud_exponential(skew, 0.9).valid);
}

TEST_CASE("avg_coud_exponential small-alpha limit matches the independent linear level") {
    // Under the independent-marginals treatment the small-alpha cost slope is
    // 1/lambda + 1/(mu - lambda); note this exceeds the exact dependent-process
    // linear average (which uses the true E[YT]).
    for (double rho : {0.3, 0.5, 0.7}) {
        const QueueParams q = QueueParams::from_rho(rho, 1.0);
        const double alpha = 1e-3;
        const double limit = alpha * (1.0 / q.lambda() + 1.0 / q.system_time_rate());
        const double ce = avg_coud_exponential(q, alpha).avg_coud;
        CHECK(ce / limit == Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("avg_coud_exponential agrees with the reduced-integral oracle") {
    for (double rho : {0.35, 0.6}) {
        const QueueParams q = QueueParams::from_rho(rho, 1.0);
        const CostModel m(CostKind::Exponential, 0.1);
        CHECK(avg_coud_exponential(q, 0.1).avg_coud ==
              Approx(avg_coud_reduced(q, m)).epsilon(1e-8));
    }
}

TEST_CASE("avg_coud_logarithmic fixtures") {
    const QueueParams q = QueueParams::from_rho(0.5, 1.0);
    const AnalyticResult r = avg_coud_logarithmic(q, 0.1);
    CHECK(r.valid);
    // below the linear average at the same parameters
    CHECK(r.avg_coud > 0.0);
    CHECK(r.avg_coud < avg_coud_linear(q, 0.1));
    // golden value from the quadrature oracle, cross-checked externally
    CHECK(r.avg_coud == Approx(0.31831129486107).epsilon(1e-6));
    // alpha -> 0 collapses the cost
    CHECK(avg_coud_logarithmic(q, 1e-6).avg_coud < 1e-5);
    CHECK_THROWS_AS(avg_coud_logarithmic(q, 0.0), std::invalid_argument);
}

TEST_CASE("avg_coud_logarithmic agrees with the reduced-integral oracle") {
    for (double rho : {0.3, 0.45, 0.7}) {
        const QueueParams q = QueueParams::from_rho(rho, 1.0);
        const CostModel m(CostKind::Logarithmic, 0.1);
        CHECK(avg_coud_logarithmic(q, 0.1).avg_coud ==
              Approx(avg_coud_reduced(q, m)).epsilon(1e-8));
    }
}

TEST_CASE("avg_coud_logarithmic is symmetric under lambda <-> mu-lambda") {
    // property of the independent-marginals treatment: the attained-level
    // weight only involves {lambda, mu - lambda} as a set
    const double a = 0.1;
    CHECK(avg_coud_logarithmic(QueueParams::from_rho(0.3, 1.0), a).avg_coud ==
          Approx(avg_coud_logarithmic(QueueParams::from_rho(0.7, 1.0), a).avg_coud)
              .epsilon(1e-9));
}

TEST_CASE("avg_coud_logarithmic matches an independent-resampling Monte Carlo") {
    const QueueParams q = QueueParams::from_rho(0.5, 1.0);
    const CostModel model(CostKind::Logarithmic, 0.1);
    std::mt19937_64 gen(991);
    std::exponential_distribution<double> ey(q.lambda());
    std::exponential_distribution<double> et(q.system_time_rate());
    const int n = 2000000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double y = ey(gen);
        while (y <= 0.0) y = ey(gen);
        const double v = area(model, y, et(gen));
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq / n - mean * mean) / n);
    const double mc = q.lambda() * mean;
    const double quad = avg_coud_logarithmic(q, 0.1).avg_coud;
    CHECK(std::fabs(mc - quad) < 4.0 * q.lambda() * sd + 1e-12);
}

TEST_CASE("quadrature failures propagate out of the averages") {
    QuadratureSpec starved;
    starved.abs_tol = 1e-14;
    starved.rel_tol = 1e-14;
    starved.max_subdivisions = 1;
    CHECK_THROWS_AS(avg_coud_logarithmic(QueueParams(0.5, 1.0), 0.1, starved),
                    quadrature_error);
}

TEST_CASE("mean_voiu_linear fixtures") {
    CHECK(std::fabs(mean_voiu_linear(QueueParams(0.5, 1.0)) - 0.5) <= 1e-12);
    // z = 1/3 hypergeometric point
    CHECK(mean_voiu_linear(QueueParams(0.6, 1.0)) == Approx(0.43279064864934).epsilon(1e-10));
    // rare updates are maximally valuable
    CHECK(mean_voiu_linear(QueueParams(1e-6, 1.0)) == Approx(1.0).margin(1e-4));
}

TEST_CASE("mean_voiu_linear is in (0,1) and decreasing in rho") {
    double prev = 1.0;
    for (double rho = 0.01; rho < 0.995; rho += 0.01) {
        const double v = mean_voiu_linear(QueueParams::from_rho(rho, 1.0));
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("mean_voiu_linear agrees with the conditional-expectation route") {
    // E[V | Y = x] = -x m e^{m x} Ei(-m x) integrated against the interarrival
    // density; exercises the exponential-integral path end to end
    QuadratureSpec spec;
    spec.abs_tol = 1e-12;
    for (double rho : {0.3, 0.5, 0.7}) {
        const QueueParams q = QueueParams::from_rho(rho, 1.0);
        const double lambda = q.lambda();
        const double m = q.system_time_rate();
        auto integrand = [&](double x) {
            const double conditional = -x * m * std::exp(m * x) * exp_integral_ei(-m * x);
            return lambda * std::exp(-lambda * x) * conditional;
        };
        const double upper = 38.0 / lambda;
        const double oracle = integrate(integrand, 0.0, upper, spec);
        CHECK(mean_voiu_linear(q) == Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("mean_voiu_numeric reproduces the linear closed form") {
    for (double rho = 0.1; rho < 0.95; rho += 0.1) {
        const QueueParams q = QueueParams::from_rho(rho, 1.0);
        const double numeric = mean_voiu_numeric(q, CostModel(CostKind::Linear, 1.0));
        CHECK(std::fabs(numeric - mean_voiu_linear(q)) <= 1e-6);
    }
}

TEST_CASE("mean_voiu_numeric exponential kind approaches linear as alpha -> 0") {
    const QueueParams q(0.5, 1.0);
    const double v = mean_voiu_numeric(q, CostModel(CostKind::Exponential, 1e-4));
    CHECK(v == Approx(mean_voiu_linear(q)).margin(1e-3));
}

TEST_CASE("mean_voiu_numeric exponential kind matches the series oracle") {
    for (double rho : {0.3, 0.5, 0.7}) {
        for (double alpha : {0.1, 0.5}) {
            const QueueParams q = QueueParams::from_rho(rho, 1.0);
            const double numeric = mean_voiu_numeric(q, CostModel(CostKind::Exponential, alpha));
            CHECK(numeric == Approx(mean_voiu_exp_series(q, alpha)).epsilon(1e-7));
        }
    }
}

TEST_CASE("mean per-update value is ordered exponential > linear > logarithmic") {
    for (double rho = 0.1; rho < 0.95; rho += 0.1) {
        const QueueParams q = QueueParams::from_rho(rho, 1.0);
        const double ve = mean_voiu_numeric(q, CostModel(CostKind::Exponential, 0.1));
        const double vp = mean_voiu_linear(q);
        const double vl = mean_voiu_numeric(q, CostModel(CostKind::Logarithmic, 0.1));
        CHECK(ve > vp);
        CHECK(vp > vl);
        CHECK(vl > 0.0);
        CHECK(ve < 1.0);
    }
}

TEST_CASE("mean voiu golden values") {
    // locked from the quadrature oracle at mu = 1, alpha = 0.1
    struct Golden {
        double rho, ve, vl;
    };
    // E[V_E](rho=0.7) = 0.3975 exactly: the telescoping series terminates in
    // rationals when lambda/alpha and (mu-lambda)/alpha are integers
    const Golden goldens[] = {
        {0.3, 0.670833333333, 0.609991496055},
        {0.5, 0.533073893428, 0.473570895679},
        {0.7, 0.397500000000, 0.336562010256},
    };
    for (const Golden& g : goldens) {
        const QueueParams q = QueueParams::from_rho(g.rho, 1.0);
        CHECK(mean_voiu_numeric(q, CostModel(CostKind::Exponential, 0.1)) ==
              Approx(g.ve).epsilon(1e-6));
        CHECK(mean_voiu_numeric(q, CostModel(CostKind::Logarithmic, 0.1)) ==
              Approx(g.vl).epsilon(1e-6));
    }
}

TEST_CASE("avg_voiu_rate dispatches by kind") {
    CHECK(std::fabs(avg_voiu_rate(QueueParams(0.5, 1.0), CostModel(CostKind::Linear, 1.0)) -
                    0.25) <= 1e-12);
    CHECK(avg_voiu_rate(QueueParams(0.6, 1.0), CostModel(CostKind::Linear, 0.3)) ==
          Approx(0.6 * 0.43279064864934).epsilon(1e-10));
    CHECK(avg_voiu_rate(QueueParams(1e-6, 1.0), CostModel(CostKind::Linear, 1.0)) < 1e-5);
    const QueueParams q(0.5, 1.0);
    CHECK(avg_voiu_rate(q, CostModel(CostKind::Logarithmic, 0.1)) ==
          Approx(0.5 * mean_voiu_numeric(q, CostModel(CostKind::Logarithmic, 0.1)))
              .epsilon(1e-12));
}

TEST_CASE("evaluate assembles the combined result") {
    const QueueParams q(0.5, 1.0);
    {
        const AnalyticResult r = evaluate(q, CostModel(CostKind::Linear, 1.0));
        CHECK(r.valid);
        CHECK(r.avg_coud == 3.5);
        CHECK(r.mean_voiu == Approx(0.5).epsilon(1e-12));
        CHECK(r.avg_voiu_rate == Approx(0.25).epsilon(1e-12));
    }
    {
        const AnalyticResult r = evaluate(q, CostModel(CostKind::Exponential, 0.6));
        CHECK_FALSE(r.valid);
        CHECK(std::isinf(r.avg_coud));
        // the per-update value stays finite even where the cost diverges
        CHECK(r.mean_voiu > 0.0);
        CHECK(r.mean_voiu < 1.0);
        CHECK(r.avg_voiu_rate == Approx(0.5 * r.mean_voiu));
    }
    CHECK_THROWS_AS(evaluate(q, CostModel(CostKind::Linear, 0.0)), degenerate_cost_error);
}

TEST_CASE("average cost ordering exponential > linear > logarithmic on the grid") {
    for (double rho = 0.1; rho < 0.95; rho += 0.1) {
        const QueueParams q = QueueParams::from_rho(rho, 1.0);
        const double cp = avg_coud_linear(q, 0.1);
        const double ce = avg_coud_exponential(q, 0.1).avg_coud;  // +inf where divergent
        const double cl = avg_coud_logarithmic(q, 0.1).avg_coud;
        CHECK(ce > cp);
        CHECK(cp > cl);
        CHECK(cl > 0.0);
    }
}
