#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "freshsim/analytic.hpp"
#include "freshsim/costmodel.hpp"

namespace freshsim {

/// Fewer than two updates were delivered inside the observation window, so no
/// averages can be formed.
class insufficient_data_error : public std::runtime_error {
public:
    explicit insufficient_data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// SplitMix64 mix step; used to derive replication and sweep-row seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Simulation setup. Exactly one of horizon / target_updates must be set.
struct SimConfig {
    QueueParams queue{0.5, 1.0};
    CostModel model{CostKind::Linear, 1.0};
    std::optional<double> horizon;               // observe arrivals in (0, horizon]
    std::optional<std::int64_t> target_updates;  // or run until N deliveries
    std::uint64_t seed = 1;
    double warmup_fraction = 0.1;  // leading fraction of records dropped from averages
    double initial_cost = 0.0;     // C(0); 0 means the cost starts fresh at t = 0

    void validate() const {
        if (horizon.has_value() == target_updates.has_value())
            throw std::invalid_argument(
                "SimConfig: set exactly one of horizon / target_updates");
        if (horizon && !(*horizon > 0.0))
            throw std::invalid_argument("SimConfig: horizon must be > 0");
        if (target_updates && *target_updates < 1)
            throw std::invalid_argument("SimConfig: target_updates must be >= 1");
        if (!(warmup_fraction >= 0.0 && warmup_fraction < 0.5))
            throw std::invalid_argument("SimConfig: warmup_fraction must be in [0, 0.5)");
        if (!(initial_cost >= 0.0))
            throw std::invalid_argument("SimConfig: initial_cost must be >= 0");
        if (model.degenerate())
            throw degenerate_cost_error(
                "SimConfig: per-update value is undefined for alpha = 0");
    }
};

/// Aggregated outcome of a run (or of pooled replications).
struct SimSummary {
    std::int64_t n_updates = 0;  // deliveries inside the observation window
    double elapsed = 0.0;        // window length, ends at the last reception
    double avg_coud = 0.0;
    double avg_voiu_rate = 0.0;
    double mean_voiu = 0.0;
    double ci_halfwidth_coud = 0.0;  // 95% normal approximation
    double ci_halfwidth_voiu = 0.0;  // for avg_voiu_rate
    double effective_rate = 0.0;     // deliveries per unit time in the window
    std::uint64_t seed = 0;
    int replications = 1;
};

namespace detail {

// Inverse-CDF exponential variate from the top 53 bits of the generator;
// rejects u = 0 so interarrivals stay strictly positive.
inline double exp_variate(std::mt19937_64& gen, double rate) {
    double u;
    do {
        u = std::ldexp(static_cast<double>(gen() >> 11), -53);
    } while (u == 0.0);
    return -std::log1p(-u) / rate;
}

struct WindowStats {
    double avg_coud = 0.0;
    double voiu_rate = 0.0;
    double mean_voiu = 0.0;
    double rate = 0.0;
};

// Time averages over the reception-to-reception window (from, to]: the cost
// curve over it decomposes into the slabs Q_i plus the partial slabs
// F(T_last) - F(T_first) cut at the window edges.
inline WindowStats window_stats(const CostModel& model, const std::vector<UpdateRecord>& rec,
                                std::size_t first, std::size_t last, double start_time,
                                double start_system_time) {
    WindowStats w;
    double sum_q = 0.0;
    double sum_v = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        sum_q += rec[i].area;
        sum_v += rec[i].voiu;
    }
    const double span = rec[last].recv_time - start_time;
    const double trailing = cost_antiderivative(model, rec[last].system_time);
    const double leading = cost_antiderivative(model, start_system_time);
    const double count = static_cast<double>(last - first + 1);
    w.avg_coud = (sum_q + trailing - leading) / span;
    w.voiu_rate = sum_v / span;
    w.mean_voiu = sum_v / count;
    w.rate = count / span;
    return w;
}

}  // namespace detail

/// Runs the seeded M/M/1 FCFS update process: Poisson(lambda) generation,
/// i.i.d. exponential(mu) service, single server. Produces one record per
/// delivered update and the window averages. The cost level starts at
/// initial_cost, attributed to a virtual update received at t = 0 whose
/// timestamp sits f_s^{-1}(C0) in the past. Identical seeds give identical
/// output.
inline std::pair<SimSummary, std::vector<UpdateRecord>> run(const SimConfig& config) {
    config.validate();
    std::mt19937_64 gen(config.seed);
    const double lambda = config.queue.lambda();
    const double mu = config.queue.mu();
    const CostModel& model = config.model;

    // virtual update 0: generated at -f^{-1}(C0), received at t = 0
    const double virtual_system_time =
        config.initial_cost > 0.0 ? inverse_cost(model, config.initial_cost) : 0.0;

    std::vector<UpdateRecord> records;
    if (config.target_updates) records.reserve(static_cast<std::size_t>(*config.target_updates));

    double prev_gen = -virtual_system_time;
    double arrival_clock = 0.0;
    double prev_recv = 0.0;
    std::int64_t i = 0;
    for (;;) {
        if (config.target_updates && i >= *config.target_updates) break;
        const double gap = detail::exp_variate(gen, lambda);
        const double gen_time = arrival_clock + gap;
        if (config.horizon && gen_time > *config.horizon) break;
        const double service = detail::exp_variate(gen, mu);
        const double recv_time = std::max(prev_recv, gen_time) + service;
        records.push_back(make_update_record(model, ++i, prev_gen, gen_time, recv_time));
        arrival_clock = gen_time;
        prev_gen = gen_time;
        prev_recv = recv_time;
    }

    const std::int64_t n = static_cast<std::int64_t>(records.size());
    if (n < 2)
        throw insufficient_data_error(
            "run: fewer than 2 updates delivered; extend the horizon");

    const std::int64_t warm =
        static_cast<std::int64_t>(config.warmup_fraction * static_cast<double>(n));
    const std::size_t first = static_cast<std::size_t>(warm);
    const std::size_t last = static_cast<std::size_t>(n - 1);
    if (last - first + 1 < 2)
        throw insufficient_data_error("run: fewer than 2 updates left after warmup");
    const double start_time = warm == 0 ? 0.0 : records[first - 1].recv_time;
    const double start_t =
        warm == 0 ? virtual_system_time : records[first - 1].system_time;

    const detail::WindowStats w =
        detail::window_stats(model, records, first, last, start_time, start_t);

    SimSummary s;
    s.n_updates = n;
    s.elapsed = records.back().recv_time;
    s.avg_coud = w.avg_coud;
    s.avg_voiu_rate = w.voiu_rate;
    s.mean_voiu = w.mean_voiu;
    s.effective_rate = w.rate;
    s.seed = config.seed;
    s.replications = 1;

    // single-run confidence from batch means over the kept records
    const std::size_t kept = last - first + 1;
    const std::size_t batches = std::min<std::size_t>(20, kept / 2);
    if (batches >= 2) {
        const std::size_t per = kept / batches;
        double mc = 0.0, mv = 0.0, sc = 0.0, sv = 0.0;
        std::vector<double> bc(batches), bv(batches);
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t lo = first + b * per;
            const std::size_t hi = (b + 1 == batches) ? last : lo + per - 1;
            const double bstart = lo == 0 ? 0.0 : records[lo - 1].recv_time;
            const double bstart_t =
                lo == 0 ? virtual_system_time : records[lo - 1].system_time;
            const detail::WindowStats ws =
                detail::window_stats(model, records, lo, hi, bstart, bstart_t);
            bc[b] = ws.avg_coud;
            bv[b] = ws.voiu_rate;
            mc += ws.avg_coud;
            mv += ws.voiu_rate;
        }
        mc /= static_cast<double>(batches);
        mv /= static_cast<double>(batches);
        for (std::size_t b = 0; b < batches; ++b) {
            sc += (bc[b] - mc) * (bc[b] - mc);
            sv += (bv[b] - mv) * (bv[b] - mv);
        }
        const double nb = static_cast<double>(batches);
        s.ci_halfwidth_coud = 1.959963984540054 * std::sqrt(sc / (nb - 1.0) / nb);
        s.ci_halfwidth_voiu = 1.959963984540054 * std::sqrt(sv / (nb - 1.0) / nb);
    }
    return {std::move(s), std::move(records)};
}

/// Independent replications with seeds splitmix64(seed + r); reports the mean
/// across replication means and a 95% normal CI from their spread.
inline SimSummary run_replications(const SimConfig& config, int replications) {
    if (replications < 2)
        throw std::invalid_argument("run_replications: needs replications >= 2");
    config.validate();

    std::vector<SimSummary> reps;
    reps.reserve(static_cast<std::size_t>(replications));
    for (int r = 0; r < replications; ++r) {
        SimConfig c = config;
        c.seed = splitmix64(config.seed + static_cast<std::uint64_t>(r));
        reps.push_back(run(c).first);
    }

    SimSummary pooled;
    pooled.seed = config.seed;
    pooled.replications = replications;
    const double nr = static_cast<double>(replications);
    for (const SimSummary& r : reps) {
        pooled.n_updates += r.n_updates;
        pooled.elapsed += r.elapsed;
        pooled.avg_coud += r.avg_coud / nr;
        pooled.avg_voiu_rate += r.avg_voiu_rate / nr;
        pooled.mean_voiu += r.mean_voiu / nr;
        pooled.effective_rate += r.effective_rate / nr;
    }
    double sc = 0.0, sv = 0.0;
    for (const SimSummary& r : reps) {
        sc += (r.avg_coud - pooled.avg_coud) * (r.avg_coud - pooled.avg_coud);
        sv += (r.avg_voiu_rate - pooled.avg_voiu_rate) *
              (r.avg_voiu_rate - pooled.avg_voiu_rate);
    }
    pooled.ci_halfwidth_coud = 1.959963984540054 * std::sqrt(sc / (nr - 1.0) / nr);
    pooled.ci_halfwidth_voiu = 1.959963984540054 * std::sqrt(sv / (nr - 1.0) / nr);
    return pooled;
}

/// Samples the cost process C(t) = f_s(t - u(t)) on a uniform grid, where
/// u(t) is the timestamp of the most recent delivered update (the virtual
/// update before the first delivery, so the curve starts at C(0) = C0).
/// Requires the horizon form of the config.
inline std::vector<std::pair<double, double>> coud_trajectory(const SimConfig& config,
                                                              double sample_dt) {
    if (!(sample_dt > 0.0))
        throw std::invalid_argument("coud_trajectory: sample_dt must be > 0");
    if (!config.horizon)
        throw std::invalid_argument("coud_trajectory: requires the horizon form of SimConfig");
    auto [summary, records] = run(config);

    const double t0 =
        config.initial_cost > 0.0 ? -inverse_cost(config.model, config.initial_cost) : 0.0;
    std::vector<std::pair<double, double>> curve;
    curve.reserve(static_cast<std::size_t>(summary.elapsed / sample_dt) + 2);
    std::size_t next = 0;  // first record not yet received
    double last_gen = t0;
    for (std::int64_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * sample_dt;
        if (t > summary.elapsed) break;
        while (next < records.size() && records[next].recv_time <= t)
            last_gen = records[next++].gen_time;
        curve.emplace_back(t, cost(config.model, t - last_gen));
    }
    return curve;
}

}  // namespace freshsim
