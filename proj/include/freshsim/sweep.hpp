#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "freshsim/analytic.hpp"
#include "freshsim/sim.hpp"

namespace freshsim {

enum class SweepMode { Analytic, Simulation, Both };

inline std::string to_string(SweepMode m) {
    switch (m) {
        case SweepMode::Analytic: return "analytic";
        case SweepMode::Simulation: return "simulation";
        case SweepMode::Both: return "both";
    }
    throw std::logic_error("to_string: bad SweepMode");
}

/// Simulation settings shared by every simulated sweep cell; per-row seeds
/// are derived from `seed` and the row index via splitmix64.
struct SimSweepTemplate {
    std::int64_t target_updates = 100000;
    int replications = 5;
    std::uint64_t seed = 1;
    double warmup_fraction = 0.1;
};

struct SweepSpec {
    double mu = 1.0;
    std::vector<double> rho_grid;
    std::vector<CostModel> models;
    SweepMode mode = SweepMode::Analytic;
    SimSweepTemplate sim;
    QuadratureSpec quad;

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("SweepSpec: mu must be > 0");
        if (rho_grid.empty()) throw std::invalid_argument("SweepSpec: empty rho grid");
        if (models.empty()) throw std::invalid_argument("SweepSpec: no cost models");
        double prev = 0.0;
        for (double r : rho_grid) {
            if (!(r > 0.0 && r < 1.0))
                throw std::invalid_argument("SweepSpec: rho values must lie in (0,1)");
            if (!(r > prev))
                throw std::invalid_argument("SweepSpec: rho grid must be strictly increasing");
            prev = r;
        }
    }
};

/// One (rho, model) cell. Columns not produced by the requested mode stay
/// NaN; a cell that failed outright carries the message in `error` and does
/// not abort the sweep.
struct SweepRow {
    double rho = 0.0;
    CostModel model;
    double coud = std::numeric_limits<double>::quiet_NaN();
    double voiu_rate = std::numeric_limits<double>::quiet_NaN();
    bool valid = true;
    std::string note;
    double sim_coud = std::numeric_limits<double>::quiet_NaN();
    double sim_coud_ci95 = std::numeric_limits<double>::quiet_NaN();
    double sim_voiu_rate = std::numeric_limits<double>::quiet_NaN();
    double sim_voiu_ci95 = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

/// Evaluates the rho x model grid. Rows are laid out rho-major in grid order
/// and computed independently; `jobs` > 1 spreads rows across threads with
/// results identical to the serial order.
inline std::vector<SweepRow> sweep(const SweepSpec& spec, int jobs = 1) {
    spec.validate();
    if (jobs < 1) throw std::invalid_argument("sweep: jobs must be >= 1");

    const std::size_t n_rows = spec.rho_grid.size() * spec.models.size();
    std::vector<SweepRow> rows(n_rows);

    auto compute_row = [&spec](std::size_t idx, SweepRow& row) {
        const double rho = spec.rho_grid[idx / spec.models.size()];
        const CostModel& model = spec.models[idx % spec.models.size()];
        row.rho = rho;
        row.model = model;
        try {
            const QueueParams q = QueueParams::from_rho(rho, spec.mu);
            if (spec.mode != SweepMode::Simulation) {
                const AnalyticResult a = evaluate(q, model, spec.quad);
                row.coud = a.avg_coud;
                row.voiu_rate = a.avg_voiu_rate;
                row.valid = a.valid;
                row.note = a.validity_note;
            }
            if (spec.mode != SweepMode::Analytic) {
                SimConfig c;
                c.queue = q;
                c.model = model;
                c.target_updates = spec.sim.target_updates;
                c.warmup_fraction = spec.sim.warmup_fraction;
                c.seed = splitmix64(spec.sim.seed +
                                    0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(idx + 1));
                const SimSummary s = run_replications(c, spec.sim.replications);
                row.sim_coud = s.avg_coud;
                row.sim_coud_ci95 = s.ci_halfwidth_coud;
                row.sim_voiu_rate = s.avg_voiu_rate;
                row.sim_voiu_ci95 = s.ci_halfwidth_voiu;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    if (jobs == 1 || n_rows < 2) {
        for (std::size_t i = 0; i < n_rows; ++i) compute_row(i, rows[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_rows) return;
                compute_row(i, rows[i]);
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(jobs, static_cast<int>(n_rows));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return rows;
}

enum class Objective { MinCoud, MaxVoiu };

inline std::string to_string(Objective o) {
    return o == Objective::MinCoud ? "min_coud" : "max_voiu";
}

struct OptimumReport {
    Objective objective = Objective::MinCoud;
    double rho_star = 0.0;
    double value_at_star = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int iterations = 0;
};

namespace detail {

inline double objective_value(Objective obj, const CostModel& model, double mu, double rho,
                              const QuadratureSpec& quad) {
    const QueueParams q = QueueParams::from_rho(rho, mu);
    if (obj == Objective::MinCoud) {
        switch (model.kind) {
            case CostKind::Linear: return avg_coud_linear(q, model.alpha);
            case CostKind::Exponential: return avg_coud_exponential(q, model.alpha).avg_coud;
            case CostKind::Logarithmic:
                return avg_coud_logarithmic(q, model.alpha, quad).avg_coud;
        }
        throw std::logic_error("objective_value: bad CostKind");
    }
    return -avg_voiu_rate(q, model, quad);
}

}  // namespace detail

/// Golden-section search of the analytic objective over utilization. The
/// default bracket (0.02, 0.98) is tightened for the exponential-kind cost
/// objective to the window where the average stays finite; an empty window is
/// a configuration error. Assumes the objective is unimodal on the bracket.
inline OptimumReport optimize(Objective objective, const CostModel& model, double mu,
                              double tol = 1e-4, const QuadratureSpec& quad = {}) {
    if (!(mu > 0.0)) throw std::invalid_argument("optimize: mu must be > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("optimize: tol must be > 0");
    if (model.degenerate()) throw degenerate_cost_error("optimize: alpha = 0 is degenerate");

    double lo = 0.02;
    double hi = 0.98;
    if (objective == Objective::MinCoud && model.kind == CostKind::Exponential) {
        // finite average needs alpha < min(lambda, mu - lambda)
        lo = std::max(lo, model.alpha / mu + 1e-6);
        hi = std::min(hi, 1.0 - model.alpha / mu - 1e-6);
        if (!(lo < hi))
            throw std::invalid_argument(
                "optimize: no utilization keeps the exponential average finite "
                "(alpha too large relative to mu)");
    }

    auto g = [&](double rho) {
        return detail::objective_value(objective, model, mu, rho, quad);
    };

    constexpr double kGolden = 0.6180339887498949;  // (sqrt(5)-1)/2
    double a = lo, b = hi;
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = g(c);
    double fd = g(d);
    int iterations = 0;
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = g(d);
        }
        ++iterations;
    }

    OptimumReport report;
    report.objective = objective;
    report.rho_star = 0.5 * (a + b);
    const double v = g(report.rho_star);
    report.value_at_star = objective == Objective::MinCoud ? v : -v;
    report.bracket_lo = lo;
    report.bracket_hi = hi;
    report.iterations = iterations;
    return report;
}

}  // namespace freshsim
