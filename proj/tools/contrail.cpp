// contrail command-line interface.
//
// Exit codes: 0 success, 1 validation error, 2 runtime/training error,
// 3 I/O error.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contrail/bounds.hpp"
#include "contrail/environment.hpp"
#include "contrail/errors.hpp"
#include "contrail/harness.hpp"
#include "contrail/learner.hpp"
#include "contrail/rng.hpp"
#include "contrail/transfer.hpp"

namespace {

using namespace contrail;

void cmd_tasks() {
    for (const TaskSpec& t : builtin_tasks(true)) {
        std::printf("%s: ", t.id.c_str());
        if (t.function.kind == FunctionKind::linear)
            std::printf("y = %g*x + %g", t.function.a, t.function.b);
        else
            std::printf("y = x^2");
        std::printf("  domain [%g, %g]  sample_size %d  noise N(%g, %g^2)\n", t.domain_lo,
                    t.domain_hi, t.sample_size, t.noise.mean, t.noise.std);
    }
}

struct RunOptions {
    std::string scenario = "all";
    std::string config_path;
    std::optional<int> reps;
    std::optional<std::uint64_t> seed;
    bool no_noise = false;
    std::optional<std::string> out_dir;
};

void cmd_run(const RunOptions& opt) {
    ExperimentConfig cfg;
    if (!opt.config_path.empty()) load_config_file(cfg, opt.config_path);
    if (opt.reps) cfg.repetitions = *opt.reps;
    if (opt.seed) cfg.base_seed = *opt.seed;
    if (opt.no_noise) cfg.noise_enabled = false;
    if (opt.out_dir) cfg.output_dir = *opt.out_dir;

    RunResult result;
    if (opt.scenario == "all") {
        result = run_all(cfg);
    } else {
        const auto id = scenario_from_name(opt.scenario);
        if (!id) throw ValidationError("unknown scenario '" + opt.scenario + "'");
        result.outcomes = run_scenario(scenario_spec(*id), cfg);
        result.summary = summarize(final_rows(result.outcomes));
    }
    write_reports(result, cfg);
    for (const SummaryRow& s : result.summary)
        std::printf("%-10s %-4s r2 = %.4f ± %.4f  (%d reps)\n", scenario_name(s.scenario),
                    s.task.c_str(), s.r2_mean, s.r2_std, s.repetitions);
    std::printf("reports written to %s\n", cfg.output_dir.c_str());
}

double need_param(const std::map<std::string, std::string>& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) throw ValidationError("bounds: missing --param " + key + "=...");
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ValidationError("bounds: bad numeric value for " + key + ": " + it->second);
    }
}

/// Capacity handles come in as capacity=constant:K | linear:K | sqrt:K.
CapacityLog parse_capacity(const std::map<std::string, std::string>& params) {
    auto it = params.find("capacity");
    if (it == params.end())
        throw ValidationError("bounds: missing --param capacity=constant:K|linear:K|sqrt:K");
    const std::string& v = it->second;
    const auto colon = v.find(':');
    if (colon == std::string::npos)
        throw ValidationError("bounds: capacity must look like constant:K, linear:K or sqrt:K");
    const std::string kind = v.substr(0, colon);
    double k = 0.0;
    try {
        k = std::stod(v.substr(colon + 1));
    } catch (const std::exception&) {
        throw ValidationError("bounds: bad capacity constant in " + v);
    }
    if (kind == "constant") return capacity_constant(k);
    if (kind == "linear") return capacity_linear(k);
    if (kind == "sqrt") return capacity_sqrt(k);
    throw ValidationError("bounds: unknown capacity kind " + kind);
}

void print_report(const BoundReport& r, bool as_csv) {
    if (as_csv)
        std::fputs(render_bound_csv(r).c_str(), stdout);
    else
        std::fputs(render_bound_text(r).c_str(), stdout);
}

void cmd_bounds(const std::string& name, const std::vector<std::string>& raw_params, bool as_csv) {
    std::map<std::string, std::string> params;
    for (const std::string& kv : raw_params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ValidationError("bounds: --param expects k=v, got " + kv);
        params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }

    if (name == "min_target_sample") {
        print_report(min_target_sample(need_param(params, "eps1"), need_param(params, "delta"),
                                       need_param(params, "d_max")),
                     as_csv);
    } else if (name == "min_source_sample") {
        print_report(min_source_sample(need_param(params, "eps2"), need_param(params, "delta"),
                                       need_param(params, "d_H_n")),
                     as_csv);
    } else if (name == "examples_per_task_scaling") {
        print_report(examples_per_task_scaling(static_cast<long>(need_param(params, "n")),
                                               need_param(params, "eps"), parse_capacity(params)),
                     as_csv);
    } else if (name == "per_task_transfer_gap") {
        print_report(per_task_transfer_gap(static_cast<long>(need_param(params, "i")),
                                           static_cast<long>(need_param(params, "n")),
                                           need_param(params, "eps_f"),
                                           need_param(params, "eps_b")),
                     as_csv);
    } else if (name == "continual_epsilon") {
        const long n = static_cast<long>(need_param(params, "n"));
        const double ef = need_param(params, "eps_f");
        const double eb = need_param(params, "eps_b");
        auto it = params.find("variant");
        if (it == params.end()) {
            // no variant requested: report both readings
            print_report(continual_epsilon(n, ef, eb, EpsilonVariant::as_eq35), as_csv);
            print_report(continual_epsilon(n, ef, eb, EpsilonVariant::as_eq31_summed), as_csv);
        } else if (it->second == "as_eq35") {
            print_report(continual_epsilon(n, ef, eb, EpsilonVariant::as_eq35), as_csv);
        } else if (it->second == "as_eq31_summed") {
            print_report(continual_epsilon(n, ef, eb, EpsilonVariant::as_eq31_summed), as_csv);
        } else {
            throw ValidationError("bounds: unknown variant " + it->second);
        }
    } else if (name == "min_tasks") {
        print_report(min_tasks(need_param(params, "eps"), need_param(params, "delta"),
                               parse_capacity(params)),
                     as_csv);
    } else if (name == "min_examples_theorem3") {
        print_report(min_examples_theorem3(static_cast<long>(need_param(params, "n")),
                                           need_param(params, "eps"), need_param(params, "delta"),
                                           parse_capacity(params)),
                     as_csv);
    } else if (name == "generalization_gap") {
        print_report(generalization_gap(static_cast<long>(need_param(params, "m")),
                                        need_param(params, "d"), need_param(params, "eps"),
                                        need_param(params, "delta")),
                     as_csv);
    } else {
        throw ValidationError("bounds: unknown bound '" + name + "'");
    }
}

void cmd_plotdata(bool with_models, const std::string& out_dir) {
    ExperimentConfig cfg;
    const auto tasks = builtin_tasks(cfg.noise_enabled, cfg.sample_size);
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < tasks.size(); ++i)
        samples.push_back(generate_sample(tasks[i], derive_seed(cfg.base_seed, "plotdata", i)));

    if (!with_models) {
        emit_plot_data(tasks, samples, nullptr, out_dir);
    } else {
        std::vector<MlpModel> models;
        TrainConfig plain = cfg.train;
        plain.hidden_lr_factor = 1.0;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            auto [train_s, test_s] = split_sample(samples[i], cfg.train_fraction,
                                                  derive_seed(cfg.base_seed, "plotsplit", i));
            MlpModel fresh =
                init_model(cfg.hidden_units, derive_seed(cfg.base_seed, "plotinit", i));
            models.push_back(train(fresh, train_s, plain, TrainMode::full));
        }
        emit_plot_data(tasks, samples, &models, out_dir);
    }
    std::printf("plot data written to %s\n", out_dir.c_str());
}

/// Random (model, sample) pairs; analytic gradient must match the
/// central-difference oracle within relative 1e-4 (absolute floor 1e-8).
int cmd_gradcheck(int trials) {
    Rng rng(20240915);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const int hidden = 1 + static_cast<int>(rng.below(12));
        MlpModel m = init_model(hidden, rng.next_u64());
        for (auto* vec : {&m.w1, &m.b1, &m.w2})
            for (double& v : *vec) v += rng.gaussian(0.0, 0.5);
        m.b2 += rng.gaussian(0.0, 0.5);

        Sample s;
        const int n = 2 + static_cast<int>(rng.below(39));
        for (int i = 0; i < n; ++i)
            s.points.push_back({rng.uniform(-3.0, 3.0), rng.gaussian(0.0, 2.0)});

        const auto analytic = gradient(m, s);
        const auto numeric = numeric_gradient(m, s, 1e-6);
        for (std::size_t k = 0; k < analytic.size(); ++k) {
            const double scale = std::max(std::abs(analytic[k]), std::abs(numeric[k]));
            const double err = std::abs(analytic[k] - numeric[k]);
            if (err > 1e-8) worst = std::max(worst, err / std::max(scale, 1e-30));
        }
    }
    std::printf("gradcheck: %d trials, worst relative discrepancy %.3e (tolerance 1e-4)\n", trials,
                worst);
    return worst <= 1e-4 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"contrail: continual-learning transfer experiments and bound calculators"};
    app.require_subcommand(1);

    auto* tasks_cmd = app.add_subcommand("tasks", "print the built-in task specs");

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "execute scenarios and write reports");
    run_cmd->add_option("--scenario", run_opt.scenario, "scenario id (iso, iso_noise, s1..s6) or 'all'");
    run_cmd->add_option("--config", run_opt.config_path, "config file (flat key = value lines)");
    int reps_flag = -1;
    run_cmd->add_option("--reps", reps_flag, "repetitions per scenario");
    std::uint64_t seed_flag = 0;
    auto* seed_opt = run_cmd->add_option("--seed", seed_flag, "base seed");
    run_cmd->add_flag("--no-noise", run_opt.no_noise, "disable label noise");
    std::string out_flag;
    auto* out_opt = run_cmd->add_option("--out", out_flag, "output directory");

    std::string bound_name;
    std::vector<std::string> bound_params;
    bool bounds_csv = false;
    auto* bounds_cmd = app.add_subcommand("bounds", "evaluate a sample-complexity or gap bound");
    bounds_cmd->add_option("name", bound_name, "bound name")->required();
    bounds_cmd->add_option("--param", bound_params, "named parameter k=v (repeatable)");
    bounds_cmd->add_flag("--csv", bounds_csv, "emit the CSV row instead of the text block");

    bool with_models = false;
    std::string plot_out = "out";
    auto* plot_cmd = app.add_subcommand("plotdata", "emit per-task curve/sample data");
    plot_cmd->add_flag("--with-models", with_models, "include fitted model predictions");
    plot_cmd->add_option("--out", plot_out, "output directory");

    int trials = 100;
    auto* grad_cmd = app.add_subcommand("gradcheck", "verify analytic gradients against the oracle");
    grad_cmd->add_option("--trials", trials, "number of random (model, sample) pairs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*tasks_cmd) {
            cmd_tasks();
        } else if (*run_cmd) {
            if (reps_flag >= 0) run_opt.reps = reps_flag;
            if (seed_opt->count() > 0) run_opt.seed = seed_flag;
            if (out_opt->count() > 0) run_opt.out_dir = out_flag;
            cmd_run(run_opt);
        } else if (*bounds_cmd) {
            cmd_bounds(bound_name, bound_params, bounds_csv);
        } else if (*plot_cmd) {
            cmd_plotdata(with_models, plot_out);
        } else if (*grad_cmd) {
            return cmd_gradcheck(trials);
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 1;
    } catch (const LookupError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 1;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 1;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 3;
    } catch (const TrainingError& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
