// freshsim: staleness-cost / update-value analysis of an M/M/1 FCFS
// status-update stream. Subcommands evaluate closed forms, run seeded
// simulations, sweep utilization, search the optimal utilization and emit
// curve data as CSV. All outputs are a pure function of flags + seed;
// wall-clock timestamps appear only in the sidecar manifest files.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "freshsim/freshsim.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace freshsim;

namespace {

std::string utc_now() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct QueueOpts {
    double lambda = std::nan("");
    double mu = std::nan("");
    double rho = std::nan("");

    void attach(CLI::App* cmd) {
        cmd->add_option("--lambda", lambda, "arrival rate");
        cmd->add_option("--mu", mu, "service rate")->required();
        cmd->add_option("--rho", rho, "server utilization; shorthand for --lambda rho*mu");
    }

    QueueParams resolve() const {
        if (!std::isnan(lambda) && !std::isnan(rho))
            throw std::invalid_argument("give either --lambda or --rho, not both");
        if (std::isnan(lambda) && std::isnan(rho))
            throw std::invalid_argument("one of --lambda / --rho is required");
        const double l = std::isnan(lambda) ? rho * mu : lambda;
        return QueueParams(l, mu);
    }

    ordered_json echo(const QueueParams& q) const {
        return ordered_json{{"lambda", q.lambda()}, {"mu", q.mu()}, {"rho", q.rho()}};
    }
};

void write_manifest(const fs::path& output, const std::string& command,
                    const ordered_json& parameters, std::uint64_t seed,
                    const std::string& started, const std::string& finished) {
    ordered_json m;
    m["command"] = command;
    m["parameters"] = parameters;
    m["seed"] = seed;
    m["tool_version"] = kVersion;
    m["started"] = started;
    m["finished"] = finished;
    m["output"] = output.filename().string();
    fs::path manifest = output;
    manifest += ".manifest.json";
    std::ofstream out(manifest);
    if (!out) throw std::runtime_error("cannot write " + manifest.string());
    out << m.dump(2) << '\n';
}

ordered_json summary_json(const SimSummary& s) {
    return ordered_json{{"n_updates", s.n_updates},
                        {"elapsed", s.elapsed},
                        {"avg_coud", s.avg_coud},
                        {"avg_voiu_rate", s.avg_voiu_rate},
                        {"mean_voiu", s.mean_voiu},
                        {"ci_halfwidth_coud", s.ci_halfwidth_coud},
                        {"ci_halfwidth_voiu", s.ci_halfwidth_voiu},
                        {"effective_rate", s.effective_rate},
                        {"seed", s.seed},
                        {"replications", s.replications}};
}

// ---------------------------------------------------------------- analytic

struct AnalyticCmd {
    QueueOpts queue;
    std::string kind = "linear";
    double alpha = 1.0;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("analytic", "closed-form averages for one point");
        queue.attach(cmd);
        cmd->add_option("--kind", kind, "cost kind: linear|exponential|logarithmic");
        cmd->add_option("--alpha", alpha, "cost-rate parameter");
        cmd->callback([this] { execute(); });
    }

    void execute() const {
        const QueueParams q = queue.resolve();
        const CostModel model(parse_cost_kind(kind), alpha);
        const AnalyticResult r = evaluate(q, model);
        ordered_json out;
        out["command"] = "analytic";
        ordered_json params = queue.echo(q);
        params["kind"] = kind;
        params["alpha"] = alpha;
        out["parameters"] = params;
        out["result"] = ordered_json{{"avg_coud", r.avg_coud},
                                     {"mean_voiu", r.mean_voiu},
                                     {"avg_voiu_rate", r.avg_voiu_rate},
                                     {"valid", r.valid},
                                     {"validity_note", r.validity_note}};
        out["tool_version"] = kVersion;
        std::cout << out.dump(2) << '\n';
    }
};

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
    QueueOpts queue;
    std::string kind = "linear";
    double alpha = 1.0;
    std::uint64_t seed = 1;
    std::optional<std::int64_t> updates;
    std::optional<double> horizon;
    int replications = 1;
    double warmup = 0.1;
    double initial_cost = 0.0;
    std::string dump_records;
    std::string out_path;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("simulate", "seeded discrete-event simulation");
        queue.attach(cmd);
        cmd->add_option("--kind", kind, "cost kind");
        cmd->add_option("--alpha", alpha, "cost-rate parameter");
        cmd->add_option("--seed", seed, "RNG seed")->envname("FRESHSIM_SEED");
        auto* u = cmd->add_option("--updates", updates, "run until N deliveries");
        cmd->add_option("--horizon", horizon, "observe arrivals in (0, T]")->excludes(u);
        cmd->add_option("--replications", replications, "independent replications (pooled)");
        cmd->add_option("--warmup", warmup, "leading fraction dropped from averages");
        cmd->add_option("--c0", initial_cost, "cost level at t = 0");
        cmd->add_option("--dump-records", dump_records, "write per-update records CSV here");
        cmd->add_option("--out", out_path, "also write the summary JSON here");
        cmd->callback([this] { execute(); });
    }

    void execute() const {
        const std::string started = utc_now();
        SimConfig config;
        config.queue = queue.resolve();
        config.model = CostModel(parse_cost_kind(kind), alpha);
        config.horizon = horizon;
        config.target_updates = updates;
        config.seed = seed;
        config.warmup_fraction = warmup;
        config.initial_cost = initial_cost;
        config.validate();
        if (replications < 1) throw std::invalid_argument("--replications must be >= 1");
        if (replications > 1 && !dump_records.empty())
            throw std::invalid_argument("--dump-records needs a single replication");

        ordered_json params = queue.echo(config.queue);
        params["kind"] = kind;
        params["alpha"] = alpha;
        if (updates) params["updates"] = *updates;
        if (horizon) params["horizon"] = *horizon;
        params["replications"] = replications;
        params["warmup_fraction"] = warmup;
        params["initial_cost"] = initial_cost;
        params["seed"] = seed;

        SimSummary summary;
        if (replications == 1) {
            auto [s, records] = run(config);
            summary = s;
            if (!dump_records.empty()) {
                std::ofstream csv(dump_records);
                if (!csv) throw std::runtime_error("cannot write " + dump_records);
                write_records_csv(csv, records);
                write_manifest(dump_records, "simulate", params, seed, started, utc_now());
            }
        } else {
            summary = run_replications(config, replications);
        }

        ordered_json out;
        out["command"] = "simulate";
        out["parameters"] = params;
        out["result"] = summary_json(summary);
        out["tool_version"] = kVersion;
        const std::string text = out.dump(2);
        std::cout << text << '\n';
        if (!out_path.empty()) {
            std::ofstream f(out_path);
            if (!f) throw std::runtime_error("cannot write " + out_path);
            f << text << '\n';
            write_manifest(out_path, "simulate", params, seed, started, utc_now());
        }
    }
};

// ---------------------------------------------------------------- sweep

struct SweepCmd {
    double mu = 1.0;
    double rho_min = 0.02, rho_max = 0.98, rho_step = 0.02;
    std::vector<double> rho_points;
    std::vector<std::string> kinds{"linear"};
    std::vector<double> alphas{1.0};
    std::string mode = "analytic";
    std::int64_t updates = 100000;
    int replications = 5;
    std::uint64_t seed = 1;
    double warmup = 0.1;
    int jobs = 1;
    std::string out_path;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("sweep", "evaluate a utilization grid");
        cmd->add_option("--mu", mu, "service rate");
        cmd->add_option("--rho-min", rho_min);
        cmd->add_option("--rho-max", rho_max);
        cmd->add_option("--rho-step", rho_step);
        cmd->add_option("--rho", rho_points, "explicit grid points (overrides min/max/step)");
        cmd->add_option("--kind", kinds, "cost kinds (repeatable)");
        cmd->add_option("--alpha", alphas, "cost-rate parameters (repeatable)");
        cmd->add_option("--mode", mode, "analytic|simulation|both");
        cmd->add_option("--updates", updates, "simulated deliveries per replication");
        cmd->add_option("--replications", replications);
        cmd->add_option("--seed", seed)->envname("FRESHSIM_SEED");
        cmd->add_option("--warmup", warmup);
        cmd->add_option("--jobs", jobs, "parallel row evaluation");
        cmd->add_option("--out", out_path, "CSV path (default: stdout)");
        cmd->callback([this] { execute(); });
    }

    static SweepMode parse_mode(const std::string& m) {
        if (m == "analytic") return SweepMode::Analytic;
        if (m == "simulation") return SweepMode::Simulation;
        if (m == "both") return SweepMode::Both;
        throw std::invalid_argument("--mode must be analytic|simulation|both");
    }

    void execute() const {
        const std::string started = utc_now();
        SweepSpec spec;
        spec.mu = mu;
        if (!rho_points.empty()) {
            spec.rho_grid = rho_points;
        } else {
            if (!(rho_step > 0.0)) throw std::invalid_argument("--rho-step must be > 0");
            for (double r = rho_min; r <= rho_max + 1e-12; r += rho_step)
                spec.rho_grid.push_back(r);
        }
        for (const std::string& k : kinds)
            for (double a : alphas) spec.models.emplace_back(parse_cost_kind(k), a);
        spec.mode = parse_mode(mode);
        spec.sim.target_updates = updates;
        spec.sim.replications = replications;
        spec.sim.seed = seed;
        spec.sim.warmup_fraction = warmup;

        const std::vector<SweepRow> rows = sweep(spec, jobs);
        if (out_path.empty()) {
            write_sweep_csv(std::cout, rows, spec.mode);
            return;
        }
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        write_sweep_csv(f, rows, spec.mode);
        ordered_json params{{"mu", mu},
                            {"mode", mode},
                            {"kinds", kinds},
                            {"alphas", alphas},
                            {"rho_points", spec.rho_grid},
                            {"updates", updates},
                            {"replications", replications},
                            {"warmup", warmup},
                            {"jobs", jobs}};
        write_manifest(out_path, "sweep", params, seed, started, utc_now());
    }
};

// ---------------------------------------------------------------- optimize

struct OptimizeCmd {
    std::string objective = "min-coud";
    std::string kind = "linear";
    double alpha = 1.0;
    double mu = 1.0;
    double tol = 1e-4;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("optimize", "search the optimal utilization");
        cmd->add_option("--objective", objective, "min-coud|max-voiu");
        cmd->add_option("--kind", kind, "cost kind");
        cmd->add_option("--alpha", alpha, "cost-rate parameter");
        cmd->add_option("--mu", mu, "service rate");
        cmd->add_option("--tol", tol, "bracket width in rho");
        cmd->callback([this] { execute(); });
    }

    void execute() const {
        Objective obj;
        if (objective == "min-coud") obj = Objective::MinCoud;
        else if (objective == "max-voiu") obj = Objective::MaxVoiu;
        else throw std::invalid_argument("--objective must be min-coud|max-voiu");

        const OptimumReport r =
            optimize(obj, CostModel(parse_cost_kind(kind), alpha), mu, tol);
        ordered_json out;
        out["command"] = "optimize";
        out["parameters"] = ordered_json{{"objective", objective},
                                         {"kind", kind},
                                         {"alpha", alpha},
                                         {"mu", mu},
                                         {"tol", tol}};
        out["result"] = ordered_json{{"objective", to_string(r.objective)},
                                     {"rho_star", r.rho_star},
                                     {"value_at_star", r.value_at_star},
                                     {"bracket", {r.bracket_lo, r.bracket_hi}},
                                     {"iterations", r.iterations}};
        out["tool_version"] = kVersion;
        std::cout << out.dump(2) << '\n';
    }
};

// ---------------------------------------------------------------- figure

struct FigureCmd {
    std::string name;
    std::string out_dir = ".";
    double rho_step = 0.02;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("figure", "emit utilization-curve data as CSV");
        cmd->add_option("name", name, "fig2a|fig2b|fig2c")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--rho-step", rho_step, "grid spacing");
        cmd->callback([this] { execute(); });
    }

    std::vector<double> grid() const {
        std::vector<double> g;
        for (int k = 1;; ++k) {
            const double rho = static_cast<double>(k) * rho_step;
            if (rho >= 1.0 - 0.5 * rho_step) break;
            g.push_back(rho);
        }
        return g;
    }

    void execute() const {
        const std::string started = utc_now();
        if (name != "fig2a" && name != "fig2b" && name != "fig2c")
            throw std::invalid_argument("figure name must be fig2a|fig2b|fig2c");
        if (!(rho_step > 0.0 && rho_step < 0.5))
            throw std::invalid_argument("--rho-step must be in (0, 0.5)");
        fs::create_directories(out_dir);
        const fs::path path = fs::path(out_dir) / (name + ".csv");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());

        const std::vector<double> rhos = grid();
        const std::vector<double> alphas = {0.1, 0.5, 1.0};

        if (name == "fig2a") {
            // linear cost per alpha, plus the value rate emitted once per
            // alpha: the value columns come out identical since the linear
            // per-update value does not involve alpha
            out << "rho";
            for (double a : alphas) out << ",coud_alpha_" << format_double(a);
            for (double a : alphas) out << ",voiu_rate_alpha_" << format_double(a);
            out << '\n';
            for (double rho : rhos) {
                const QueueParams q = QueueParams::from_rho(rho, 1.0);
                out << format_double(rho);
                for (double a : alphas) out << ',' << format_double(avg_coud_linear(q, a));
                const double v = q.lambda() * mean_voiu_linear(q);
                for (std::size_t i = 0; i < alphas.size(); ++i)
                    out << ',' << format_double(v);
                out << '\n';
            }
        } else if (name == "fig2b") {
            out << "rho,coud_linear,coud_exponential,coud_logarithmic\n";
            for (double rho : rhos) {
                const QueueParams q = QueueParams::from_rho(rho, 1.0);
                out << format_double(rho) << ','
                    << format_double(avg_coud_linear(q, 0.1)) << ','
                    << format_double(avg_coud_exponential(q, 0.1).avg_coud) << ','
                    << format_double(avg_coud_logarithmic(q, 0.1).avg_coud) << '\n';
            }
        } else {
            out << "rho";
            for (const char* kind : {"linear", "exponential", "logarithmic"})
                for (double a : alphas)
                    out << ",voiu_rate_" << kind << "_alpha_" << format_double(a);
            out << '\n';
            for (double rho : rhos) {
                const QueueParams q = QueueParams::from_rho(rho, 1.0);
                out << format_double(rho);
                const double vp = q.lambda() * mean_voiu_linear(q);
                for (std::size_t i = 0; i < alphas.size(); ++i)
                    out << ',' << format_double(vp);
                for (CostKind kind : {CostKind::Exponential, CostKind::Logarithmic})
                    for (double a : alphas)
                        out << ','
                            << format_double(q.lambda() *
                                             mean_voiu_numeric(q, CostModel(kind, a)));
                out << '\n';
            }
        }
        out.close();

        ordered_json params{{"name", name}, {"out", out_dir}, {"rho_step", rho_step}};
        write_manifest(path, "figure", params, 0, started, utc_now());
        std::cerr << "wrote " << path.string() << '\n';
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"staleness-cost and update-value analysis for M/M/1 status updates"};
    app.set_version_flag("--version", std::string("freshsim ") + kVersion);
    app.require_subcommand(1);

    AnalyticCmd analytic_cmd;
    SimulateCmd simulate_cmd;
    SweepCmd sweep_cmd;
    OptimizeCmd optimize_cmd;
    FigureCmd figure_cmd;
    analytic_cmd.attach(app);
    simulate_cmd.attach(app);
    sweep_cmd.attach(app);
    optimize_cmd.attach(app);
    figure_cmd.attach(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
