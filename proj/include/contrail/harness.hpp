#pragma once

// Experiment orchestration: the eight built-in scenarios, seeded repetition
// management, aggregation into the summary table, and report/plot-data
// emission.
//
// Seed derivation: every repetition r of scenario sc runs under
// derive_seed(base_seed, scenario_name(sc), r), so scenario results are
// independent of execution order and of how many workers run in parallel.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "contrail/environment.hpp"
#include "contrail/errors.hpp"
#include "contrail/learner.hpp"
#include "contrail/rng.hpp"
#include "contrail/transfer.hpp"

namespace contrail {

// ---------------------------------------------------------------------------
// Scenario definitions
// ---------------------------------------------------------------------------

enum class ScenarioId { iso, iso_noise, s1, s2, s3, s4, s5, s6 };

inline constexpr ScenarioId kAllScenarios[] = {ScenarioId::iso, ScenarioId::iso_noise,
                                               ScenarioId::s1,  ScenarioId::s2,
                                               ScenarioId::s3,  ScenarioId::s4,
                                               ScenarioId::s5,  ScenarioId::s6};

inline const char* scenario_name(ScenarioId id) {
    switch (id) {
        case ScenarioId::iso: return "iso";
        case ScenarioId::iso_noise: return "iso_noise";
        case ScenarioId::s1: return "s1";
        case ScenarioId::s2: return "s2";
        case ScenarioId::s3: return "s3";
        case ScenarioId::s4: return "s4";
        case ScenarioId::s5: return "s5";
        case ScenarioId::s6: return "s6";
    }
    return "?";
}

inline std::optional<ScenarioId> scenario_from_name(const std::string& name) {
    for (ScenarioId id : kAllScenarios)
        if (name == scenario_name(id)) return id;
    return std::nullopt;
}

enum class ScenarioDirection { none, forward, backward, sequential_forward, sequential_backward };

/// source_ids are the transfer-FROM tasks in arrival order; target_id is the
/// transfer-TO task (for backward directions that is the earlier task being
/// refined). Isolated scenarios have no transfer at all.
struct ScenarioSpec {
    ScenarioId id;
    std::string description;
    std::vector<std::string> source_ids;
    std::string target_id;
    ScenarioDirection direction = ScenarioDirection::none;
    std::vector<std::string> measured_tasks;
};

inline std::vector<ScenarioSpec> builtin_scenarios() {
    return {
        {ScenarioId::iso, "isolated learning, noiseless", {}, "", ScenarioDirection::none,
         {"f1", "f2", "f3", "f4"}},
        {ScenarioId::iso_noise, "isolated learning", {}, "", ScenarioDirection::none,
         {"f1", "f2", "f3", "f4"}},
        {ScenarioId::s1, "forward transfer f1 -> f2", {"f1"}, "f2", ScenarioDirection::forward,
         {"f2"}},
        {ScenarioId::s2, "backward transfer f2 -> f1", {"f2"}, "f1", ScenarioDirection::backward,
         {"f1"}},
        {ScenarioId::s3, "forward transfer f1,f2 -> f3", {"f1", "f2"}, "f3",
         ScenarioDirection::sequential_forward, {"f3"}},
        {ScenarioId::s4, "backward transfer f2 then f3 -> f1", {"f2", "f3"}, "f1",
         ScenarioDirection::sequential_backward, {"f1"}},
        {ScenarioId::s5, "forward transfer f1 -> f4 (unrelated)", {"f1"}, "f4",
         ScenarioDirection::forward, {"f4"}},
        {ScenarioId::s6, "backward transfer f4 -> f1 (unrelated)", {"f4"}, "f1",
         ScenarioDirection::backward, {"f1"}},
    };
}

inline ScenarioSpec scenario_spec(ScenarioId id) {
    for (auto& s : builtin_scenarios())
        if (s.id == id) return s;
    throw LookupError("unknown scenario");
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ReportFormats {
    bool csv = true;
    bool markdown = true;
    bool plotdata = false;
};

struct ExperimentConfig {
    int repetitions = 10;
    std::uint64_t base_seed = 1;
    bool noise_enabled = true;
    int sample_size = 30;
    double train_fraction = 0.75;
    int hidden_units = 10;
    TrainConfig train;
    std::string output_dir = "out";
    ReportFormats formats;
};

inline void validate(const ExperimentConfig& c) {
    if (c.repetitions < 1) throw ValidationError("ExperimentConfig: repetitions must be >= 1");
    if (c.sample_size < 2) throw ValidationError("ExperimentConfig: sample_size must be >= 2");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
        throw ValidationError("ExperimentConfig: train_fraction must lie in (0,1)");
    if (c.hidden_units < 1) throw ValidationError("ExperimentConfig: hidden_units must be >= 1");
    validate(c.train);
}

/// The four benchmark tasks on [0, 10] with N(1, 2) label noise when enabled.
inline std::vector<TaskSpec> builtin_tasks(bool noise_enabled, int sample_size = 30) {
    const NoiseModel noise{1.0, 2.0, noise_enabled};
    return {
        {"f1", FunctionSpec::linear(-3.0, 10.0), noise, 0.0, 10.0, sample_size},
        {"f2", FunctionSpec::linear(-3.0, -5.0), noise, 0.0, 10.0, sample_size},
        {"f3", FunctionSpec::linear(-6.0, -12.0), noise, 0.0, 10.0, sample_size},
        {"f4", FunctionSpec::quadratic(), noise, 0.0, 10.0, sample_size},
    };
}

inline TaskSpec builtin_task(const std::string& id, bool noise_enabled, int sample_size = 30) {
    for (auto& t : builtin_tasks(noise_enabled, sample_size))
        if (t.id == id) return t;
    throw LookupError("unknown task id " + id);
}

// ---------------------------------------------------------------------------
// Scenario execution
// ---------------------------------------------------------------------------

struct OutcomeRow {
    ScenarioId scenario;
    int rep = 0;
    TransferOutcome outcome;
};

inline int worker_cap() {
    if (const char* env = std::getenv("CONTRAIL_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

template <typename Fn>
void parallel_for_index(int count, Fn&& fn) {
    const int workers = std::min(count, worker_cap());
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mu;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// One repetition of one scenario; pure given (spec, cfg, rep).
inline std::vector<OutcomeRow> run_repetition(const ScenarioSpec& spec,
                                              const ExperimentConfig& cfg, int rep) {
    const std::uint64_t seed = derive_seed(cfg.base_seed, scenario_name(spec.id),
                                           static_cast<std::uint64_t>(rep));
    const bool noise = spec.id == ScenarioId::iso ? false : cfg.noise_enabled;

    std::vector<OutcomeRow> rows;

    if (spec.direction == ScenarioDirection::none) {
        for (const std::string& id : spec.measured_tasks) {
            const TaskSpec task = builtin_task(id, noise, cfg.sample_size);
            const Sample sample = generate_sample(task, derive_seed(seed, "sample:" + id));
            auto [train_s, test_s] =
                split_sample(sample, cfg.train_fraction, derive_seed(seed, "split:" + id));
            MlpModel fresh = init_model(cfg.hidden_units, derive_seed(seed, "init:" + id));
            TrainConfig plain = cfg.train;
            plain.hidden_lr_factor = 1.0;
            const MlpModel trained = train(fresh, train_s, plain, TrainMode::full);
            const double r2 = r_squared(trained, test_s).r2;
            rows.push_back({spec.id, rep,
                            {id, TransferDirection::none, {}, trained, r2, r2, seed}});
        }
        return rows;
    }

    // Knowledge base holds every task that existed before the transfer: for
    // forward directions the sources, for backward directions the task being
    // refined first (it arrived first) and then the newer sources.
    KnowledgeBase kb;
    std::vector<std::string> enrolled;
    if (spec.direction == ScenarioDirection::backward ||
        spec.direction == ScenarioDirection::sequential_backward)
        enrolled.push_back(spec.target_id);
    enrolled.insert(enrolled.end(), spec.source_ids.begin(), spec.source_ids.end());
    for (const std::string& id : enrolled)
        enroll_task(kb, builtin_task(id, noise, cfg.sample_size), cfg.train, cfg.train_fraction,
                    cfg.hidden_units, seed);

    switch (spec.direction) {
        case ScenarioDirection::forward: {
            const TaskSpec target = builtin_task(spec.target_id, noise, cfg.sample_size);
            rows.push_back({spec.id, rep,
                            forward_transfer(kb, spec.source_ids, target, cfg.train, seed,
                                             cfg.train_fraction)});
            break;
        }
        case ScenarioDirection::sequential_forward: {
            const TaskSpec target = builtin_task(spec.target_id, noise, cfg.sample_size);
            std::vector<std::size_t> times(spec.source_ids.size());
            for (std::size_t i = 0; i < times.size(); ++i) times[i] = i + 1;
            for (auto& out : forward_transfer_at_times(kb, target, times, cfg.train, seed,
                                                       cfg.train_fraction))
                rows.push_back({spec.id, rep, std::move(out)});
            break;
        }
        case ScenarioDirection::backward:
            rows.push_back({spec.id, rep,
                            backward_transfer(kb, spec.target_id, spec.source_ids.front(),
                                              cfg.train, seed)});
            break;
        case ScenarioDirection::sequential_backward:
            for (auto& out :
                 sequential_backward(kb, spec.target_id, spec.source_ids, cfg.train, seed))
                rows.push_back({spec.id, rep, std::move(out)});
            break;
        default:
            break;
    }
    return rows;
}

} // namespace detail

/// Run every repetition of one scenario. Repetitions are independent and may
/// execute on parallel workers; rows are merged in repetition order so the
/// result is identical either way.
inline std::vector<OutcomeRow> run_scenario(const ScenarioSpec& spec,
                                            const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<std::vector<OutcomeRow>> per_rep(static_cast<std::size_t>(cfg.repetitions));
    detail::parallel_for_index(cfg.repetitions, [&](int rep) {
        try {
            per_rep[static_cast<std::size_t>(rep)] = detail::run_repetition(spec, cfg, rep);
        } catch (const std::exception& e) {
            throw TrainingError(std::string(scenario_name(spec.id)) + " repetition " +
                                    std::to_string(rep) + " failed: " + e.what(),
                                rep);
        }
    });
    std::vector<OutcomeRow> rows;
    for (auto& chunk : per_rep)
        for (auto& row : chunk) rows.push_back(std::move(row));
    return rows;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct SummaryRow {
    ScenarioId scenario;
    std::string task;
    double r2_mean = 0.0;
    double r2_std = 0.0; // sample standard deviation, n-1 denominator
    int repetitions = 0;
    bool degenerate = false; // single-value group, std forced to 0
};

/// Mean and sample standard deviation of r2_after_transfer per (scenario,
/// task) group, ordered by scenario enum order then task id.
inline std::vector<SummaryRow> summarize(const std::vector<OutcomeRow>& rows) {
    if (rows.empty()) throw ValidationError("summarize: no outcome rows");
    std::map<std::pair<int, std::string>, std::vector<double>> groups;
    for (const OutcomeRow& row : rows)
        groups[{static_cast<int>(row.scenario), row.outcome.task_id}].push_back(
            row.outcome.r2_after_transfer);

    std::vector<SummaryRow> out;
    for (const auto& [key, values] : groups) {
        SummaryRow s;
        s.scenario = static_cast<ScenarioId>(key.first);
        s.task = key.second;
        s.repetitions = static_cast<int>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        s.r2_mean = mean;
        if (values.size() > 1) {
            double acc = 0.0;
            for (double v : values) acc += (v - mean) * (v - mean);
            s.r2_std = std::sqrt(acc / static_cast<double>(values.size() - 1));
        } else {
            s.r2_std = 0.0;
            s.degenerate = true;
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// For sequential scenarios only the final checkpoint/step feeds the summary
/// table; intermediate outcomes stay in the raw outcome rows.
inline std::vector<OutcomeRow> final_rows(const std::vector<OutcomeRow>& rows) {
    std::map<std::pair<int, std::string>, std::size_t> widest;
    for (const OutcomeRow& row : rows) {
        auto key = std::make_pair(static_cast<int>(row.scenario), row.outcome.task_id);
        auto it = widest.find(key);
        if (it == widest.end() || row.outcome.sources_used.size() > it->second)
            widest[key] = row.outcome.sources_used.size();
    }
    std::vector<OutcomeRow> out;
    for (const OutcomeRow& row : rows)
        if (row.outcome.sources_used.size() ==
            widest[{static_cast<int>(row.scenario), row.outcome.task_id}])
            out.push_back(row);
    return out;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline std::string join_ids(const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) {
        if (!s.empty()) s += '+';
        s += id;
    }
    return s;
}

inline void write_outcomes_csv(const std::vector<OutcomeRow>& rows, std::ostream& out) {
    out << "scenario,task,direction,sources,rep,seed,r2_baseline,r2_after\n";
    char buf[128];
    for (const OutcomeRow& row : rows) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", row.outcome.r2_isolated_baseline,
                      row.outcome.r2_after_transfer);
        out << scenario_name(row.scenario) << ',' << row.outcome.task_id << ','
            << direction_name(row.outcome.direction) << ',' << join_ids(row.outcome.sources_used)
            << ',' << row.rep << ',' << row.outcome.repetition_seed << buf;
    }
}

inline void write_summary_csv(const std::vector<SummaryRow>& summary, std::ostream& out) {
    if (summary.empty()) throw ValidationError("write_summary_csv: empty summary");
    out << "scenario,task,r2_mean,r2_std,repetitions\n";
    char buf[96];
    for (const SummaryRow& s : summary) {
        std::snprintf(buf, sizeof buf, "%.4f,%.4f,%d\n", s.r2_mean, s.r2_std, s.repetitions);
        out << scenario_name(s.scenario) << ',' << s.task << ',' << buf;
    }
}

namespace detail {

inline std::string scenario_label(ScenarioId id, bool noise_enabled) {
    const std::string suffix = noise_enabled ? " (noise)" : " (no noise)";
    switch (id) {
        case ScenarioId::iso: return "Isolated learning";
        case ScenarioId::iso_noise: return "Isolated learning" + suffix;
        default: break;
    }
    return "Scenario " + std::string(1, scenario_name(id)[1]) + suffix;
}

inline std::string cell(double mean, double std) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f±%.4f", mean, std);
    return buf;
}

} // namespace detail

/// Markdown grid shaped like the benchmark summary table: one row per
/// scenario, columns R² f1..f4 plus the combined f1,f2,f3 column for the
/// isolated rows. `--` marks cells a scenario does not measure.
inline void write_summary_markdown(const std::vector<SummaryRow>& summary, std::ostream& out,
                                   bool noise_enabled = true) {
    if (summary.empty()) throw ValidationError("write_summary_markdown: empty summary");
    std::map<std::pair<int, std::string>, const SummaryRow*> by_key;
    std::set<int> scenarios_present;
    bool any_degenerate = false;
    for (const SummaryRow& s : summary) {
        by_key[{static_cast<int>(s.scenario), s.task}] = &s;
        scenarios_present.insert(static_cast<int>(s.scenario));
        any_degenerate |= s.degenerate;
    }

    out << "| Scenario | R² f1 | R² f2 | R² f3 | R² f4 | R² f1,f2,f3 |\n";
    out << "|---|---|---|---|---|---|\n";
    for (ScenarioId id : kAllScenarios) {
        if (!scenarios_present.count(static_cast<int>(id))) continue;
        out << "| " << detail::scenario_label(id, noise_enabled) << " |";
        std::vector<double> iso_means;
        for (const char* task : {"f1", "f2", "f3", "f4"}) {
            auto it = by_key.find({static_cast<int>(id), task});
            if (it == by_key.end()) {
                out << " -- |";
            } else {
                out << ' ' << detail::cell(it->second->r2_mean, it->second->r2_std) << " |";
                if (std::string(task) != "f4") iso_means.push_back(it->second->r2_mean);
            }
        }
        if ((id == ScenarioId::iso || id == ScenarioId::iso_noise) && iso_means.size() == 3) {
            double mean = (iso_means[0] + iso_means[1] + iso_means[2]) / 3.0;
            double acc = 0.0;
            for (double v : iso_means) acc += (v - mean) * (v - mean);
            out << ' ' << detail::cell(mean, std::sqrt(acc / 2.0)) << " |";
        } else {
            out << " -- |";
        }
        out << "\n";
    }
    out << "\nCombined f1,f2,f3 column: mean of the three per-task means; std across those "
           "three means.\n";
    if (any_degenerate)
        out << "Warning: at least one cell aggregates a single repetition; its std is 0 by "
               "convention.\n";
}

/// Deterministic echo of the configuration a run used, including the fixed
/// algorithm identifiers behind reproducibility.
inline void write_run_config(const ExperimentConfig& cfg, std::ostream& out) {
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << key << " = " << buf << "\n";
    };
    out << "repetitions = " << cfg.repetitions << "\n";
    out << "base_seed = " << cfg.base_seed << "\n";
    out << "noise_enabled = " << (cfg.noise_enabled ? "true" : "false") << "\n";
    out << "sample_size = " << cfg.sample_size << "\n";
    put("train_fraction", cfg.train_fraction);
    out << "hidden_units = " << cfg.hidden_units << "\n";
    put("train.learning_rate", cfg.train.learning_rate);
    out << "train.max_epochs = " << cfg.train.max_epochs << "\n";
    put("train.convergence_tol", cfg.train.convergence_tol);
    out << "train.convergence_patience = " << cfg.train.convergence_patience << "\n";
    put("train.partial_fraction", cfg.train.partial_fraction);
    put("train.hidden_lr_factor", cfg.train.hidden_lr_factor);
    out << "train.seed = " << cfg.train.seed << "\n";
    out << "output_dir = " << cfg.output_dir << "\n";
    out << "formats = " << (cfg.formats.csv ? "csv," : "") << (cfg.formats.markdown ? "markdown," : "")
        << (cfg.formats.plotdata ? "plotdata," : "") << "\n";
    out << "rng_algorithm = " << kRngAlgorithm << "\n";
    out << "seed_hash = " << kSeedHashAlgorithm << "\n";
    out << "split_rounding = round-half-up\n";
    out << "partial_rule = fraction_of_full_epochs\n";
    out << "standardization = per-model z-score, fitted on first training split, kept for life\n";
    out << "log_base = natural\n";
}

// ---------------------------------------------------------------------------
// Config file: flat `key = value` lines, '#' comments, unknown keys rejected.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ValidationError("config: bad boolean for " + key + ": " + v);
}

} // namespace detail

inline void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                              const std::string& value) {
    try {
        if (key == "repetitions") cfg.repetitions = std::stoi(value);
        else if (key == "base_seed") cfg.base_seed = std::stoull(value);
        else if (key == "noise_enabled") cfg.noise_enabled = detail::parse_bool(value, key);
        else if (key == "sample_size") cfg.sample_size = std::stoi(value);
        else if (key == "train_fraction") cfg.train_fraction = std::stod(value);
        else if (key == "hidden_units") cfg.hidden_units = std::stoi(value);
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "train.learning_rate") cfg.train.learning_rate = std::stod(value);
        else if (key == "train.max_epochs") cfg.train.max_epochs = std::stol(value);
        else if (key == "train.convergence_tol") cfg.train.convergence_tol = std::stod(value);
        else if (key == "train.convergence_patience") cfg.train.convergence_patience = std::stoi(value);
        else if (key == "train.partial_fraction") cfg.train.partial_fraction = std::stod(value);
        else if (key == "train.hidden_lr_factor") cfg.train.hidden_lr_factor = std::stod(value);
        else if (key == "train.seed") cfg.train.seed = std::stoull(value);
        else if (key == "formats") {
            cfg.formats = {false, false, false};
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = detail::trim(item);
                if (item == "csv") cfg.formats.csv = true;
                else if (item == "markdown") cfg.formats.markdown = true;
                else if (item == "plotdata") cfg.formats.plotdata = true;
                else if (!item.empty()) throw ValidationError("config: unknown format " + item);
            }
        } else {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ValidationError("config: bad value for " + key + ": " + value);
    }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = detail::trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: line " + std::to_string(lineno) +
                                  " is not `key = value`");
        apply_config_line(cfg, detail::trim(stripped.substr(0, eq)),
                          detail::trim(stripped.substr(eq + 1)));
    }
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

/// One CSV per task: a 200-point grid of the true curve plus the sample
/// points, tagged by a `kind` column; y_model present when models given.
inline void emit_plot_data(const std::vector<TaskSpec>& tasks, const std::vector<Sample>& samples,
                           const std::vector<MlpModel>* models, const std::string& out_dir) {
    if (tasks.empty()) throw ValidationError("emit_plot_data: no tasks");
    if (samples.size() != tasks.size())
        throw ValidationError("emit_plot_data: samples must align with tasks");
    if (models && models->size() != tasks.size())
        throw ValidationError("emit_plot_data: models must align with tasks");
    std::filesystem::create_directories(out_dir);
    char buf[160];
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const TaskSpec& task = tasks[t];
        const std::string path = out_dir + "/plot_" + task.id + ".csv";
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path);
        out << (models ? "kind,x,y_true,y_noisy_sample,y_model\n" : "kind,x,y_true,y_noisy_sample\n");
        for (int i = 0; i < 200; ++i) {
            const double x = task.domain_lo +
                             (task.domain_hi - task.domain_lo) * static_cast<double>(i) / 199.0;
            if (models) {
                std::snprintf(buf, sizeof buf, "curve,%.17g,%.17g,,%.17g\n", x, task.function(x),
                              predict((*models)[t], x));
            } else {
                std::snprintf(buf, sizeof buf, "curve,%.17g,%.17g,\n", x, task.function(x));
            }
            out << buf;
        }
        for (const Point& p : samples[t].points) {
            if (models) {
                std::snprintf(buf, sizeof buf, "sample,%.17g,%.17g,%.17g,%.17g\n", p.x,
                              task.function(p.x), p.y, predict((*models)[t], p.x));
            } else {
                std::snprintf(buf, sizeof buf, "sample,%.17g,%.17g,%.17g\n", p.x,
                              task.function(p.x), p.y);
            }
            out << buf;
        }
    }
}

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

struct RunResult {
    std::vector<OutcomeRow> outcomes;
    std::vector<SummaryRow> summary;
};

/// Execute iso, iso_noise and s1..s6 and aggregate the summary table. The
/// iso scenario always runs noiseless; every other scenario follows
/// cfg.noise_enabled.
inline RunResult run_all(const ExperimentConfig& cfg) {
    validate(cfg);
    RunResult result;
    for (const ScenarioSpec& spec : builtin_scenarios()) {
        auto rows = run_scenario(spec, cfg);
        result.outcomes.insert(result.outcomes.end(), rows.begin(), rows.end());
    }
    result.summary = summarize(final_rows(result.outcomes));
    return result;
}

inline void write_reports(const RunResult& result, const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    auto open = [&](const std::string& name) {
        std::ofstream out(cfg.output_dir + "/" + name);
        if (!out) throw IoError("cannot write " + cfg.output_dir + "/" + name);
        return out;
    };
    {
        auto out = open("run_config.txt");
        write_run_config(cfg, out);
    }
    if (cfg.formats.csv) {
        auto out = open("outcomes.csv");
        write_outcomes_csv(result.outcomes, out);
        auto sum = open("summary.csv");
        write_summary_csv(result.summary, sum);
    }
    if (cfg.formats.markdown) {
        auto out = open("summary.md");
        write_summary_markdown(result.summary, out, cfg.noise_enabled);
    }
    if (cfg.formats.plotdata) {
        const auto tasks = builtin_tasks(cfg.noise_enabled, cfg.sample_size);
        std::vector<Sample> samples;
        for (std::size_t i = 0; i < tasks.size(); ++i)
            samples.push_back(
                generate_sample(tasks[i], derive_seed(cfg.base_seed, "plotdata", i)));
        emit_plot_data(tasks, samples, nullptr, cfg.output_dir);
    }
}

} // namespace contrail
