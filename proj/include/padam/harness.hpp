#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "padam/errors.hpp"
#include "padam/optim.hpp"
#include "padam/problems.hpp"
#include "padam/rng.hpp"

namespace padam {

enum class ProblemId { quadratic, polyreg, gauss_density, heat_dkm };
enum class OptimizerId { sgd, momentum, adam, adamw, adam_ema, padam3, padam10 };

inline const char* to_string(ProblemId p) {
    switch (p) {
        case ProblemId::quadratic: return "quadratic";
        case ProblemId::polyreg: return "polyreg";
        case ProblemId::gauss_density: return "gauss_density";
        case ProblemId::heat_dkm: return "heat_dkm";
    }
    return "?";
}

inline const char* to_string(OptimizerId o) {
    switch (o) {
        case OptimizerId::sgd: return "sgd";
        case OptimizerId::momentum: return "momentum";
        case OptimizerId::adam: return "adam";
        case OptimizerId::adamw: return "adamw";
        case OptimizerId::adam_ema: return "adam_ema";
        case OptimizerId::padam3: return "padam3";
        case OptimizerId::padam10: return "padam10";
    }
    return "?";
}

inline std::optional<ProblemId> parse_problem(std::string_view s) {
    for (ProblemId p : {ProblemId::quadratic, ProblemId::polyreg, ProblemId::gauss_density,
                        ProblemId::heat_dkm}) {
        if (s == to_string(p)) return p;
    }
    return std::nullopt;
}

inline std::optional<OptimizerId> parse_optimizer(std::string_view s) {
    for (OptimizerId o : {OptimizerId::sgd, OptimizerId::momentum, OptimizerId::adam,
                          OptimizerId::adamw, OptimizerId::adam_ema, OptimizerId::padam3,
                          OptimizerId::padam10}) {
        if (s == to_string(o)) return o;
    }
    return std::nullopt;
}

inline bool is_padam_family(OptimizerId o) {
    return o == OptimizerId::adam_ema || o == OptimizerId::padam3 || o == OptimizerId::padam10;
}

inline bool uses_selection(OptimizerId o) {
    return o == OptimizerId::padam3 || o == OptimizerId::padam10;
}

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ProblemId problem = ProblemId::quadratic;
    OptimizerId optimizer = OptimizerId::adam;
    HyperParams hp;
    long steps = 50000;           // N
    int batch_size = 256;         // J
    long selection_period = 5000; // n_T
    int seed_count = 1;
    int test_mc_samples = 10000;
    long eval_every = 0;          // 0 -> selection_period / 10
    std::uint64_t seed_base = 0;
    std::string out_dir;
    std::string preset;

    // per-problem overrides; negative / empty means problem default
    int dim = -1;
    std::vector<int> hidden_widths;
    double terminal_time = 2.0;
    double sigma2 = 3.0;
    double noise_var = 0.2;
    bool padam10_channel6_literal = false;

    // testing hook, not exposed on the CLI
    std::vector<ChannelSpec> channel_override;

    long resolved_eval_every() const {
        return eval_every > 0 ? eval_every : std::max(1L, selection_period / 10);
    }

    void validate() const {
        if (steps < 1) throw UsageError("steps: must be >= 1");
        if (batch_size < 1) throw UsageError("batch: must be >= 1");
        if (selection_period < 1 || selection_period > steps) {
            throw UsageError("nt: must lie in [1, steps]");
        }
        if (seed_count < 1) throw UsageError("seeds: must be >= 1");
        if (test_mc_samples < 1) throw UsageError("mc-samples: must be >= 1");
        if (eval_every < 0) throw UsageError("eval-every: must be >= 1 (or omitted)");
        try {
            hp.validate();
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
};

/// Benchmark-standard constant learning rates per problem, with the
/// SGD/momentum exceptions on the quadratic problem.
inline double default_lr(ProblemId p, OptimizerId o) {
    switch (p) {
        case ProblemId::quadratic:
            return (o == OptimizerId::sgd || o == OptimizerId::momentum) ? 0.001 : 0.01;
        case ProblemId::polyreg: return 0.01;
        case ProblemId::gauss_density: return 1e-4;
        case ProblemId::heat_dkm: return 1e-4;
    }
    return 0.01;
}

struct Preset {
    std::string name;
    ProblemId problem;
    long steps;
    int seeds;
    long n_t;
    int mc_samples;
    int dim;                   // -1 keeps the problem default
    std::vector<int> hidden;   // empty keeps the problem default
    std::optional<double> lr;  // overrides the learning-rate table
    std::string note;
};

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> table = {
        {"quadratic", ProblemId::quadratic, 50000, 50, 5000, 10000, 10, {}, std::nullopt,
         "quadratic minimization, d=10, full seed count"},
        {"quadratic-desk", ProblemId::quadratic, 20000, 20, 5000, 10000, 10, {}, std::nullopt,
         "quadratic minimization, shortened run"},
        {"polyreg", ProblemId::polyreg, 50000, 50, 5000, 50000, -1, {}, std::nullopt,
         "degree-25 polynomial regression of sin(pi x)"},
        {"polyreg-desk", ProblemId::polyreg, 50000, 3, 5000, 10000, -1, {}, std::nullopt,
         "polynomial regression, few seeds"},
        {"gauss_density", ProblemId::gauss_density, 50000, 50, 5000, 100000, 20, {300, 500, 100},
         std::nullopt, "Gaussian density fit, d=20, 300/500/100 ReLU net"},
        {"gauss_density-desk", ProblemId::gauss_density, 20000, 3, 5000, 10000, 5, {32, 32},
         std::nullopt, "Gaussian density fit, d=5, 32/32 ReLU net"},
        {"heat_dkm", ProblemId::heat_dkm, 50000, 50, 5000, 100000, 10, {50, 100, 50}, std::nullopt,
         "heat-equation Kolmogorov regression, d=10, 50/100/50 GELU net"},
        {"heat_dkm-desk", ProblemId::heat_dkm, 20000, 3, 5000, 10000, 5, {32, 32}, 1e-3,
         "heat-equation Kolmogorov regression, d=5, 32/32 GELU net"},
    };
    return table;
}

inline const Preset* find_preset(std::string_view name) {
    for (const Preset& p : presets()) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

/// Raw option values before resolution; every field optional so that the
/// file layer and the CLI layer can be overlaid.
struct ConfigInputs {
    std::optional<std::string> problem, optimizer, preset, out;
    std::optional<long> steps, nt, eval_every;
    std::optional<int> batch, seeds, mc_samples, dim;
    std::optional<double> lr, alpha, beta, eps, momentum, weight_decay;
    std::optional<double> heat_t, sigma2, noise_var;
    std::optional<std::vector<int>> hidden;
    std::optional<std::uint64_t> seed_base;
    std::optional<bool> channel6_literal;

    void overlay(const ConfigInputs& higher) {
        auto take = [](auto& dst, const auto& src) {
            if (src.has_value()) dst = src;
        };
        take(problem, higher.problem);
        take(optimizer, higher.optimizer);
        take(preset, higher.preset);
        take(out, higher.out);
        take(steps, higher.steps);
        take(nt, higher.nt);
        take(eval_every, higher.eval_every);
        take(batch, higher.batch);
        take(seeds, higher.seeds);
        take(mc_samples, higher.mc_samples);
        take(dim, higher.dim);
        take(lr, higher.lr);
        take(alpha, higher.alpha);
        take(beta, higher.beta);
        take(eps, higher.eps);
        take(momentum, higher.momentum);
        take(weight_decay, higher.weight_decay);
        take(heat_t, higher.heat_t);
        take(sigma2, higher.sigma2);
        take(noise_var, higher.noise_var);
        take(hidden, higher.hidden);
        take(seed_base, higher.seed_base);
        take(channel6_literal, higher.channel6_literal);
    }
};

/// Flat JSON object with keys mirroring the CLI flags. Unknown keys are a
/// usage error naming the key.
inline ConfigInputs load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw UsageError("config file " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file " + path.string() + ": expected a JSON object");

    ConfigInputs c;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "problem") c.problem = value.get<std::string>();
            else if (key == "optimizer") c.optimizer = value.get<std::string>();
            else if (key == "preset") c.preset = value.get<std::string>();
            else if (key == "out") c.out = value.get<std::string>();
            else if (key == "steps") c.steps = value.get<long>();
            else if (key == "nt") c.nt = value.get<long>();
            else if (key == "eval-every") c.eval_every = value.get<long>();
            else if (key == "batch") c.batch = value.get<int>();
            else if (key == "seeds") c.seeds = value.get<int>();
            else if (key == "mc-samples") c.mc_samples = value.get<int>();
            else if (key == "dim") c.dim = value.get<int>();
            else if (key == "lr") c.lr = value.get<double>();
            else if (key == "alpha") c.alpha = value.get<double>();
            else if (key == "beta") c.beta = value.get<double>();
            else if (key == "eps") c.eps = value.get<double>();
            else if (key == "momentum") c.momentum = value.get<double>();
            else if (key == "weight-decay") c.weight_decay = value.get<double>();
            else if (key == "heat-T") c.heat_t = value.get<double>();
            else if (key == "sigma2") c.sigma2 = value.get<double>();
            else if (key == "noise-var") c.noise_var = value.get<double>();
            else if (key == "hidden") c.hidden = value.get<std::vector<int>>();
            else if (key == "seed-base") c.seed_base = value.get<std::uint64_t>();
            else if (key == "padam10-channel6-literal") c.channel6_literal = value.get<bool>();
            else throw UsageError("config file: unknown key \"" + key + "\"");
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception&) {
            throw UsageError("config file: bad value for key \"" + key + "\"");
        }
    }
    return c;
}

/// CLI flags override file values override preset values override built-in
/// defaults.
inline RunConfig resolve_config(const ConfigInputs& file_values, const ConfigInputs& cli_values) {
    ConfigInputs merged = file_values;
    merged.overlay(cli_values);

    const Preset* preset = nullptr;
    if (merged.preset) {
        preset = find_preset(*merged.preset);
        if (!preset) throw UsageError("preset: unknown preset \"" + *merged.preset + "\"");
    }

    RunConfig cfg;
    std::optional<ProblemId> problem;
    if (preset) problem = preset->problem;
    if (merged.problem) {
        auto p = parse_problem(*merged.problem);
        if (!p) throw UsageError("problem: unknown problem \"" + *merged.problem + "\"");
        if (preset && *p != preset->problem) {
            throw UsageError("problem: \"" + *merged.problem + "\" conflicts with preset \"" +
                             preset->name + "\"");
        }
        problem = *p;
    }
    if (!problem) throw UsageError("problem: required (give --problem or --preset)");
    cfg.problem = *problem;

    if (!merged.optimizer) throw UsageError("optimizer: required");
    auto opt = parse_optimizer(*merged.optimizer);
    if (!opt) throw UsageError("optimizer: unknown optimizer \"" + *merged.optimizer + "\"");
    cfg.optimizer = *opt;

    if (preset) {
        cfg.preset = preset->name;
        cfg.steps = preset->steps;
        cfg.seed_count = preset->seeds;
        cfg.selection_period = preset->n_t;
        cfg.test_mc_samples = preset->mc_samples;
        cfg.dim = preset->dim;
        cfg.hidden_widths = preset->hidden;
    }

    cfg.hp.lr = merged.lr ? *merged.lr
                          : (preset && preset->lr ? *preset->lr : default_lr(cfg.problem, cfg.optimizer));
    if (merged.steps) cfg.steps = *merged.steps;
    if (merged.nt) {
        cfg.selection_period = *merged.nt;
    } else if (!preset) {
        cfg.selection_period = cfg.steps >= 5000 ? 5000 : 500;  // small-N default
    }
    if (merged.eval_every) cfg.eval_every = *merged.eval_every;
    if (merged.batch) cfg.batch_size = *merged.batch;
    if (merged.seeds) cfg.seed_count = *merged.seeds;
    if (merged.mc_samples) cfg.test_mc_samples = *merged.mc_samples;
    if (merged.dim) cfg.dim = *merged.dim;
    if (merged.alpha) cfg.hp.alpha = *merged.alpha;
    if (merged.beta) cfg.hp.beta = *merged.beta;
    if (merged.eps) cfg.hp.eps = *merged.eps;
    if (merged.momentum) cfg.hp.momentum = *merged.momentum;
    if (merged.weight_decay) cfg.hp.weight_decay = *merged.weight_decay;
    if (merged.heat_t) cfg.terminal_time = *merged.heat_t;
    if (merged.sigma2) cfg.sigma2 = *merged.sigma2;
    if (merged.noise_var) cfg.noise_var = *merged.noise_var;
    if (merged.hidden) cfg.hidden_widths = *merged.hidden;
    if (merged.seed_base) cfg.seed_base = *merged.seed_base;
    if (merged.channel6_literal) cfg.padam10_channel6_literal = *merged.channel6_literal;
    if (merged.out) cfg.out_dir = *merged.out;

    cfg.validate();
    return cfg;
}

inline std::unique_ptr<StochasticObjective> make_problem(const RunConfig& cfg) {
    switch (cfg.problem) {
        case ProblemId::quadratic:
            return std::make_unique<QuadraticProblem>(cfg.dim > 0 ? cfg.dim : 10);
        case ProblemId::polyreg:
            return std::make_unique<PolyRegProblem>(25, cfg.noise_var);
        case ProblemId::gauss_density:
            return std::make_unique<GaussianDensityProblem>(
                cfg.dim > 0 ? cfg.dim : 5,
                cfg.hidden_widths.empty() ? std::vector<int>{32, 32} : cfg.hidden_widths,
                cfg.sigma2);
        case ProblemId::heat_dkm:
            return std::make_unique<HeatDkmProblem>(
                cfg.dim > 0 ? cfg.dim : 5,
                cfg.hidden_widths.empty() ? std::vector<int>{32, 32} : cfg.hidden_widths,
                cfg.terminal_time);
    }
    throw std::logic_error("make_problem: unreachable");
}

inline std::vector<ChannelSpec> channels_for(const RunConfig& cfg) {
    if (!is_padam_family(cfg.optimizer)) return {};
    if (!cfg.channel_override.empty()) return cfg.channel_override;
    switch (cfg.optimizer) {
        case OptimizerId::adam_ema: return adam_ema_channels();
        case OptimizerId::padam3: return padam3_channels();
        case OptimizerId::padam10: return padam10_channels(cfg.padam10_channel6_literal);
        default: return {};
    }
}

/// Stream roles per seed: init=0, train=1, selection=2, test=3. Keeping the
/// roles on separate streams means changing the test sample count never
/// perturbs training randomness.
enum class StreamRole { init = 0, train = 1, selection = 2, test = 3 };

inline RngStream run_stream(const RunConfig& cfg, int seed, StreamRole role) {
    const std::uint64_t id =
        static_cast<std::uint64_t>(seed) * 4 + static_cast<std::uint64_t>(role);
    return derive_stream(cfg.seed_base, id);
}

struct ErrorPoint {
    long step;
    double error;
    int channel;  // -1 for non-PADAM rows, else the selected channel (1-based)
};

struct ErrorSeries {
    std::string optimizer_label;
    int seed = 0;
    std::vector<ErrorPoint> points;
    bool diverged = false;
    long diverged_step = -1;
    int diverged_channel = -1;
};

/// Executes one seeded training run and records the error trajectory. For
/// padam3/padam10 the reported iterate is the channel selected at the most
/// recent multiple of n_T (re-selection included at step 0); adam_ema
/// reports its single EMA channel; every other optimizer reports the raw
/// iterate. A non-finite value ends the series with a diverged marker.
inline ErrorSeries run_single(const RunConfig& cfg, int seed) {
    cfg.validate();
    const auto problem = make_problem(cfg);

    RngStream init_stream = run_stream(cfg, seed, StreamRole::init);
    RngStream train_stream = run_stream(cfg, seed, StreamRole::train);
    RngStream selection_stream = run_stream(cfg, seed, StreamRole::selection);
    RngStream test_stream = run_stream(cfg, seed, StreamRole::test);

    ParamVector params = problem->initial_params(init_stream);

    const bool family = is_padam_family(cfg.optimizer);
    const bool selecting = uses_selection(cfg.optimizer);
    std::optional<PadamState> padam;
    ParamVector velocity;
    AdamState adam_state;
    if (family) {
        padam.emplace(params, channels_for(cfg), cfg.steps);
    } else if (cfg.optimizer == OptimizerId::momentum) {
        velocity.assign(params.size(), 0.0);
    } else if (cfg.optimizer == OptimizerId::adam || cfg.optimizer == OptimizerId::adamw) {
        adam_state = AdamState(params.size());
    }

    ErrorSeries series;
    series.optimizer_label = to_string(cfg.optimizer);
    series.seed = seed;

    auto reporting_iterate = [&]() -> const ParamVector& {
        if (selecting) return padam->selected();
        if (cfg.optimizer == OptimizerId::adam_ema) return padam->channels[0];
        return params;
    };
    auto reported_channel = [&]() -> int { return selecting ? padam->best_index : -1; };

    auto log_error = [&](long step) -> bool {
        const double err = problem->test_error(reporting_iterate(), test_stream, cfg.test_mc_samples);
        if (!std::isfinite(err)) {
            series.diverged = true;
            series.diverged_step = step;
            series.diverged_channel = reported_channel();
            return false;
        }
        series.points.push_back(ErrorPoint{step, err, reported_channel()});
        return true;
    };

    const long eval_every = cfg.resolved_eval_every();

    if (selecting) {
        evaluate_and_select(*padam, *problem, selection_stream, cfg.batch_size);
    }
    log_error(0);

    for (long n = 1; n <= cfg.steps && !series.diverged; ++n) {
        try {
            const Batch batch = problem->sample_batch(train_stream, cfg.batch_size);
            const ParamVector& train_point = family ? padam->raw : params;
            const ParamVector g = problem->grad(train_point, batch);
            switch (cfg.optimizer) {
                case OptimizerId::sgd: sgd_step(params, g, cfg.hp); break;
                case OptimizerId::momentum: momentum_sgd_step(velocity, params, g, cfg.hp); break;
                case OptimizerId::adam: adam_step(adam_state, params, g, cfg.hp); break;
                case OptimizerId::adamw: adamw_step(adam_state, params, g, cfg.hp); break;
                case OptimizerId::adam_ema:
                case OptimizerId::padam3:
                case OptimizerId::padam10: padam_step(*padam, g, cfg.hp); break;
            }
            if (selecting && n % cfg.selection_period == 0) {
                evaluate_and_select(*padam, *problem, selection_stream, cfg.batch_size);
            }
            if (n % eval_every == 0) {
                if (!log_error(n)) break;
            }
        } catch (const NonFiniteError&) {
            series.diverged = true;
            series.diverged_step = n;
            series.diverged_channel = reported_channel();
        } catch (const SelectionError&) {
            series.diverged = true;
            series.diverged_step = n;
            series.diverged_channel = reported_channel();
        }
    }
    return series;
}

struct Aggregate {
    std::vector<std::pair<long, double>> per_step_mean_error;
    double final_mean_error = std::numeric_limits<double>::quiet_NaN();
    int diverged_seed_count = 0;
};

/// Mean error per step across seeds (the empirical L1 error over the
/// probability space). Diverged seeds contribute only their finite points,
/// so aggregates never carry NaN.
inline Aggregate aggregate_series(const std::vector<ErrorSeries>& all) {
    Aggregate agg;
    std::map<long, std::pair<double, int>> acc;
    for (const ErrorSeries& s : all) {
        if (s.diverged) agg.diverged_seed_count += 1;
        for (const ErrorPoint& pt : s.points) {
            auto& slot = acc[pt.step];
            slot.first += pt.error;
            slot.second += 1;
        }
    }
    for (const auto& [step, slot] : acc) {
        agg.per_step_mean_error.emplace_back(step, slot.first / slot.second);
    }
    if (!agg.per_step_mean_error.empty()) {
        agg.final_mean_error = agg.per_step_mean_error.back().second;
    }
    return agg;
}

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_series_csv(std::ostream& os, const ErrorSeries& s, bool with_header = true) {
    if (with_header) os << "optimizer,seed,step,error,channel\n";
    for (const ErrorPoint& pt : s.points) {
        os << s.optimizer_label << ',' << s.seed << ',' << pt.step << ',' << format_g17(pt.error)
           << ',' << pt.channel << '\n';
    }
    if (s.diverged) {
        os << s.optimizer_label << ',' << s.seed << ',' << s.diverged_step << ",diverged,"
           << s.diverged_channel << '\n';
    }
}

inline std::string series_to_csv(const ErrorSeries& s) {
    std::ostringstream os;
    write_series_csv(os, s);
    return os.str();
}

inline nlohmann::ordered_json config_echo_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["problem"] = to_string(cfg.problem);
    j["optimizer"] = to_string(cfg.optimizer);
    j["preset"] = cfg.preset;
    j["steps"] = cfg.steps;
    j["batch"] = cfg.batch_size;
    j["nt"] = cfg.selection_period;
    j["seeds"] = cfg.seed_count;
    j["mc_samples"] = cfg.test_mc_samples;
    j["eval_every"] = cfg.resolved_eval_every();
    j["seed_base"] = cfg.seed_base;
    j["lr"] = cfg.hp.lr;
    j["alpha"] = cfg.hp.alpha;
    j["beta"] = cfg.hp.beta;
    j["eps"] = cfg.hp.eps;
    j["momentum"] = cfg.hp.momentum;
    j["weight_decay"] = cfg.hp.weight_decay;
    j["dim"] = cfg.dim;
    j["hidden"] = cfg.hidden_widths;
    j["heat_T"] = cfg.terminal_time;
    j["sigma2"] = cfg.sigma2;
    j["noise_var"] = cfg.noise_var;
    j["padam10_channel6_literal"] = cfg.padam10_channel6_literal;
    return j;
}

inline nlohmann::ordered_json aggregate_json(const RunConfig& cfg, const Aggregate& agg) {
    nlohmann::ordered_json j;
    j["config_echo"] = config_echo_json(cfg);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [step, mean] : agg.per_step_mean_error) {
        rows.push_back({step, mean});
    }
    j["per_step_mean_error"] = std::move(rows);
    j["final_mean_error"] = agg.final_mean_error;  // NaN serializes as null
    j["diverged_seed_count"] = agg.diverged_seed_count;
    return j;
}

/// Runs every seed; independent seeds may execute concurrently, results are
/// collected in seed order so output is scheduling-independent.
inline std::vector<ErrorSeries> run_all_seeds(const RunConfig& cfg) {
    cfg.validate();
    const int n = cfg.seed_count;
    std::vector<ErrorSeries> out(n);
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (n == 1 || workers == 1) {
        for (int s = 0; s < n; ++s) out[s] = run_single(cfg, s);
        return out;
    }
    for (int start = 0; start < n; start += static_cast<int>(workers)) {
        const int end = std::min(n, start + static_cast<int>(workers));
        std::vector<std::future<ErrorSeries>> wave;
        wave.reserve(end - start);
        for (int s = start; s < end; ++s) {
            wave.push_back(std::async(std::launch::async, [&cfg, s] { return run_single(cfg, s); }));
        }
        for (int s = start; s < end; ++s) out[s] = wave[s - start].get();
    }
    return out;
}

struct ExperimentResult {
    std::vector<ErrorSeries> series;
    Aggregate aggregate;
    std::vector<std::filesystem::path> files_written;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace detail

/// Runs all seeds, then writes per-seed CSVs, a merged CSV, and the
/// aggregate JSON (single-threaded, after all runs finish).
inline ExperimentResult run_experiment(const RunConfig& cfg) {
    ExperimentResult result;
    result.series = run_all_seeds(cfg);
    result.aggregate = aggregate_series(result.series);

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        const fs::path dir(cfg.out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());

        const std::string base =
            std::string(to_string(cfg.problem)) + "_" + to_string(cfg.optimizer);

        std::ostringstream merged;
        merged << "optimizer,seed,step,error,channel\n";
        for (const ErrorSeries& s : result.series) {
            const fs::path seed_path = dir / (base + "_seed" + std::to_string(s.seed) + ".csv");
            detail::write_file(seed_path, series_to_csv(s));
            result.files_written.push_back(seed_path);
            write_series_csv(merged, s, /*with_header=*/false);
        }
        const fs::path merged_path = dir / (base + ".csv");
        detail::write_file(merged_path, merged.str());
        result.files_written.push_back(merged_path);

        const fs::path agg_path = dir / (base + "_aggregate.json");
        detail::write_file(agg_path, aggregate_json(cfg, result.aggregate).dump(2) + "\n");
        result.files_written.push_back(agg_path);
    }
    return result;
}

}  // namespace padam
