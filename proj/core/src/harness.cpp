#include "bbo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "bbo/errors.hpp"
#include "bbo/optimizer.hpp"
#include "bbo/rng.hpp"
#include "json_detail.hpp"

namespace bbo {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

using detail::num_array_to_json;
using detail::num_to_json;

double num_from_json(const json& j, const char* what) {
    return detail::num_from_json<ConfigError>(j, what);
}

std::vector<double> num_array_from_json(const json& j, const char* what) {
    return detail::num_array_from_json<ConfigError>(j, what);
}

const json& require_key(const json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(std::string(where) + " is missing '" + key + "'");
    }
    return j.at(key);
}

// Full-precision form for CSV cells, so identical doubles always print
// identical bytes regardless of locale-free stream state.
std::string fmt_full(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt_short(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StateError("cannot read '" + path.string() + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Write-then-rename, so a crash never leaves a half-written file at the
// final path; completion markers rely on this.
void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StateError("cannot open '" + tmp.string() + "' for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw StateError("failed writing '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

std::string gap_label(const Job& job) {
    return "optimizer '" + job.optimizer_name + "' objective '" + job.objective_id +
           "' repeat " + std::to_string(job.repeat_idx);
}

json config_to_json(const StudyConfig& cfg) {
    json j;
    j["n_step"] = cfg.n_step;
    j["n_batch"] = cfg.n_batch;
    j["n_repeat"] = cfg.n_repeat;
    j["budget_seconds"] = num_to_json(cfg.budget_seconds);
    j["strict_budget"] = cfg.strict_budget;
    j["run_seed"] = cfg.run_seed;
    j["workers"] = cfg.workers;
    j["baseline_pool"] = cfg.baseline_pool;
    j["baseline_sims"] = cfg.baseline_sims;
    return j;
}

StudyConfig config_from_json(const json& j) {
    StudyConfig cfg;
    try {
        cfg.n_step = require_key(j, "n_step", "manifest config").get<std::size_t>();
        cfg.n_batch = require_key(j, "n_batch", "manifest config").get<std::size_t>();
        cfg.n_repeat = require_key(j, "n_repeat", "manifest config").get<std::size_t>();
        cfg.budget_seconds =
            num_from_json(require_key(j, "budget_seconds", "manifest config"),
                          "manifest config budget_seconds");
        cfg.strict_budget = require_key(j, "strict_budget", "manifest config").get<bool>();
        cfg.run_seed = require_key(j, "run_seed", "manifest config").get<std::uint64_t>();
        cfg.workers = require_key(j, "workers", "manifest config").get<std::size_t>();
        cfg.baseline_pool =
            require_key(j, "baseline_pool", "manifest config").get<std::size_t>();
        cfg.baseline_sims =
            require_key(j, "baseline_sims", "manifest config").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest config has a mistyped field: ") + e.what());
    }
    return cfg;
}

struct SearchOutcome {
    std::string best_single_holdout;
    std::string best_pair_holdout;
    bool has_pairs = false;
    bool pair_beats_singles = false;
};

void write_manifest(const fs::path& out_dir, const StudyConfig& cfg,
                    const std::vector<std::string>& study_names,
                    const std::vector<std::string>& objective_ids, std::size_t n_jobs,
                    bool complete, const std::vector<std::string>& gaps,
                    const SearchOutcome* outcome) {
    json j;
    j["config"] = config_to_json(cfg);
    j["study_names"] = study_names;
    j["objective_ids"] = objective_ids;
    j["suite_version"] = std::string(kSuiteVersion);
    j["n_jobs"] = n_jobs;
    j["complete"] = complete;
    j["gaps"] = gaps;
    if (outcome != nullptr && outcome->has_pairs) {
        j["best_single_holdout"] = outcome->best_single_holdout;
        j["best_pair_holdout"] = outcome->best_pair_holdout;
        j["pair_beats_singles_holdout"] = outcome->pair_beats_singles;
    }
    write_file_atomic(out_dir / "manifest.json", j.dump(2) + "\n");
}

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::string text = header + "\n";
    for (const auto& row : rows) {
        text += row + "\n";
    }
    write_file_atomic(path, text);
}

std::string grid_line(const SearchResult& res, const StudyConfig& cfg,
                      std::size_t n_objectives) {
    return "study grid: " + std::to_string(res.study_names.size()) + " studies x " +
           std::to_string(n_objectives) + " objectives x " + std::to_string(cfg.n_repeat) +
           " repeats = " + std::to_string(res.jobs.size()) + " jobs";
}

// The per-study score tables, convergence curves, timing breakdown,
// leaderboard, and human-readable summary. Timing files carry wall-clock
// measurements; everything else is a pure function of the scores.
SearchOutcome write_report_bundle(const fs::path& out_dir, const StudyConfig& cfg,
                                  const SearchResult& res,
                                  const std::map<std::string, Baseline>& baselines,
                                  std::size_t n_objectives) {
    const fs::path rdir = out_dir / "reports";
    SearchOutcome outcome;

    if (!res.complete) {
        std::ostringstream os;
        os << grid_line(res, cfg, n_objectives) << "\n";
        os << "completed: " << res.reports.size() << ", failed: " << res.gaps.size()
           << "\n";
        os << "grid incomplete; missing cells:\n";
        for (const auto& gap : res.gaps) {
            os << "  " << gap << "\n";
        }
        write_file_atomic(rdir / "summary.txt", os.str());
        return outcome;
    }

    const AggregateResult vis = aggregate(res.reports, ScoreKind::Visible);
    const AggregateResult hold = aggregate(res.reports, ScoreKind::Holdout);

    const std::pair<std::string, const AggregateResult*> table_kinds[] = {
        {"visible", &vis}, {"holdout", &hold}};
    for (const auto& [kind, agg] : table_kinds) {
        std::vector<std::string> rows;
        for (std::size_t i = 0; i < agg->optimizers.size(); ++i) {
            rows.push_back(agg->optimizers[i] + "," + fmt_full(agg->mean_norm[i]) + "," +
                           fmt_full(leaderboard_score(agg->mean_norm[i])));
        }
        write_csv(rdir / ("aggregate_" + kind + ".csv"), "optimizer,mean_norm,leaderboard",
                  rows);

        std::string header = "objective";
        for (const auto& opt : agg->optimizers) {
            header += "," + opt;
        }
        header += ",best";
        rows.clear();
        for (std::size_t j = 0; j < agg->objectives.size(); ++j) {
            std::string row = agg->objectives[j];
            for (std::size_t i = 0; i < agg->optimizers.size(); ++i) {
                row += "," + fmt_full(agg->matrix[i][j]);
            }
            row += "," + agg->optimizers[agg->best_per_objective[j]];
            rows.push_back(row);
        }
        write_csv(rdir / ("matrix_" + kind + ".csv"), header, rows);
    }

    // Convergence curves: per optimizer, the per-iteration normalized
    // cumulative minimum averaged over objectives and repeats.
    std::map<std::string, std::vector<const StudyReport*>> by_opt;
    for (const auto& rep : res.reports) {
        by_opt[rep.optimizer_name].push_back(&rep);
    }
    const std::pair<std::string, std::vector<double> StudyReport::*> curve_kinds[] = {
        {"visible", &StudyReport::visible_curve},
        {"holdout", &StudyReport::holdout_curve}};
    for (const auto& [kind, pick] : curve_kinds) {
        std::vector<std::string> rows;
        for (const auto& [opt, reps] : by_opt) {
            for (std::size_t iter = 0; iter < cfg.n_step; ++iter) {
                double sum = 0.0;
                for (const StudyReport* rep : reps) {
                    sum += normalize((rep->*pick).at(iter),
                                     baselines.at(rep->objective_id));
                }
                rows.push_back(opt + "," + std::to_string(iter) + "," +
                               fmt_full(sum / double(reps.size())));
            }
        }
        write_csv(rdir / ("curves_" + kind + ".csv"), "optimizer,iter,mean_norm", rows);
    }

    {
        std::vector<std::string> rows;
        for (const auto& [opt, reps] : by_opt) {
            double s = 0.0;
            double o = 0.0;
            double e = 0.0;
            std::size_t n = 0;
            for (const StudyReport* rep : reps) {
                for (std::size_t iter = 0; iter < rep->suggest_seconds.size(); ++iter) {
                    s += rep->suggest_seconds[iter];
                    o += rep->observe_seconds[iter];
                    e += rep->evaluate_seconds[iter];
                    n += 1;
                }
            }
            rows.push_back(opt + "," + fmt_full(s / double(n)) + "," +
                           fmt_full(o / double(n)) + "," + fmt_full(e / double(n)));
        }
        write_csv(rdir / "timings.csv",
                  "optimizer,mean_suggest_s,mean_observe_s,mean_evaluate_s", rows);
    }

    {
        std::vector<std::string> rows;
        std::map<std::string, double> hold_mean;
        for (std::size_t i = 0; i < hold.optimizers.size(); ++i) {
            hold_mean[hold.optimizers[i]] = hold.mean_norm[i];
        }
        for (std::size_t i = 0; i < vis.optimizers.size(); ++i) {
            rows.push_back(vis.optimizers[i] + "," +
                           fmt_full(leaderboard_score(vis.mean_norm[i])) + "," +
                           fmt_full(leaderboard_score(hold_mean.at(vis.optimizers[i]))));
        }
        write_csv(rdir / "leaderboard.csv", "optimizer,score_visible,score_holdout", rows);
    }

    // Summary: the best single and best pair by mean holdout normalized
    // score, and whether some pair beat every single.
    double best_single = kInf;
    double best_pair = kInf;
    for (std::size_t i = 0; i < hold.optimizers.size(); ++i) {
        const bool is_pair = hold.optimizers[i].find('+') != std::string::npos;
        double& best = is_pair ? best_pair : best_single;
        std::string& name = is_pair ? outcome.best_pair_holdout : outcome.best_single_holdout;
        if (hold.mean_norm[i] < best) {
            best = hold.mean_norm[i];
            name = hold.optimizers[i];
        }
    }
    outcome.has_pairs = !outcome.best_pair_holdout.empty();
    outcome.pair_beats_singles = outcome.has_pairs && best_pair < best_single;

    std::ostringstream os;
    os << grid_line(res, cfg, n_objectives) << "\n";
    os << "completed: " << res.reports.size() << ", failed: 0\n";
    if (!outcome.best_single_holdout.empty()) {
        os << "best single by mean holdout normalized score: " << outcome.best_single_holdout
           << " (" << fmt_short(best_single) << ")\n";
    }
    if (outcome.has_pairs) {
        os << "best pair by mean holdout normalized score: " << outcome.best_pair_holdout
           << " (" << fmt_short(best_pair) << ")\n";
        os << "a pair beats every single on mean holdout normalized score: "
           << (outcome.pair_beats_singles ? "yes" : "no") << "\n";
    } else {
        os << "no pairs in this run\n";
    }
    write_file_atomic(rdir / "summary.txt", os.str());
    return outcome;
}

} // namespace

void validate_config(const StudyConfig& cfg) {
    if (cfg.n_step < 1 || cfg.n_batch < 1 || cfg.n_repeat < 1 || cfg.workers < 1 ||
        cfg.baseline_pool < 1 || cfg.baseline_sims < 1) {
        throw ConfigError("study config: every count must be at least 1");
    }
    if (!(cfg.budget_seconds > 0.0)) {
        throw ConfigError("study config: budget_seconds must be positive");
    }
}

std::vector<std::string> enumerate_studies(const std::vector<std::string>& names,
                                           bool include_singles, bool include_pairs) {
    std::set<std::string> seen;
    for (const auto& name : names) {
        if (!seen.insert(name).second) {
            throw ConfigError("duplicate optimizer name '" + name + "'");
        }
    }
    std::vector<std::string> out;
    if (include_singles) {
        out = names;
    }
    if (include_pairs) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == "random") {
                continue;
            }
            for (std::size_t j = i + 1; j < names.size(); ++j) {
                if (names[j] == "random") {
                    continue;
                }
                out.push_back(names[i] + "+" + names[j]);
            }
        }
    }
    return out;
}

std::vector<std::size_t> schedule(std::size_t n_jobs, std::size_t workers) {
    if (workers < 1) {
        throw DomainError("schedule: workers must be at least 1");
    }
    std::vector<std::size_t> assignment(n_jobs);
    for (std::size_t i = 0; i < n_jobs; ++i) {
        assignment[i] = i % workers;
    }
    return assignment;
}

std::uint64_t job_seed(std::uint64_t run_seed, const std::string& optimizer_name,
                       const std::string& objective_id, std::size_t repeat_idx) {
    return seed_mix(run_seed, std::string_view(optimizer_name),
                    std::string_view(objective_id), std::uint64_t(repeat_idx));
}

std::vector<Job> make_jobs(const StudyConfig& cfg, const std::vector<std::string>& study_names,
                           const std::vector<std::string>& objective_ids) {
    validate_config(cfg);
    std::vector<Job> jobs;
    jobs.reserve(study_names.size() * objective_ids.size() * cfg.n_repeat);
    for (const auto& name : study_names) {
        for (const auto& obj_id : objective_ids) {
            for (std::size_t rep = 0; rep < cfg.n_repeat; ++rep) {
                Job job;
                job.job_id = jobs.size();
                job.optimizer_name = name;
                job.objective_id = obj_id;
                job.repeat_idx = rep;
                job.derived_seed = job_seed(cfg.run_seed, name, obj_id, rep);
                jobs.push_back(std::move(job));
            }
        }
    }
    return jobs;
}

StudyReport run_study(const StudyConfig& cfg, const std::string& optimizer_name,
                      const ObjectiveSpec& obj, std::size_t repeat_idx,
                      const Baseline& baseline, std::size_t job_id, const TrialSink& sink) {
    validate_config(cfg);
    if (baseline.objective_id != obj.id) {
        throw ConfigError("run_study: baseline was built for '" + baseline.objective_id +
                          "', not '" + obj.id + "'");
    }
    const std::uint64_t seed = job_seed(cfg.run_seed, optimizer_name, obj.id, repeat_idx);
    auto opt = make_optimizer({optimizer_name, {}, seed}, obj.space);

    StudyReport rep;
    rep.optimizer_name = optimizer_name;
    rep.objective_id = obj.id;
    rep.repeat_idx = repeat_idx;
    double best_visible = kInf;
    double best_holdout = kInf;

    for (std::size_t iter = 0; iter < cfg.n_step; ++iter) {
        auto t0 = Clock::now();
        const auto batch = opt->suggest(cfg.n_batch);
        const double suggest_s = seconds_since(t0);
        if (batch.size() != cfg.n_batch) {
            throw ContractViolation("optimizer '" + optimizer_name + "' returned " +
                                    std::to_string(batch.size()) + " suggestions, wanted " +
                                    std::to_string(cfg.n_batch));
        }

        std::vector<double> visible(cfg.n_batch);
        std::vector<double> holdout(cfg.n_batch);
        std::vector<double> eval_s(cfg.n_batch);
        for (std::size_t b = 0; b < cfg.n_batch; ++b) {
            t0 = Clock::now();
            const EvalResult r =
                evaluate(obj, batch[b], seed_mix(seed, "trial", std::uint64_t(iter),
                                                 std::uint64_t(b)));
            eval_s[b] = seconds_since(t0);
            visible[b] = r.visible;
            holdout[b] = r.holdout;
        }

        t0 = Clock::now();
        opt->observe(batch, visible);
        const double observe_s = seconds_since(t0);

        for (std::size_t b = 0; b < cfg.n_batch; ++b) {
            if (std::isfinite(visible[b]) && visible[b] < best_visible) {
                best_visible = visible[b];
            }
            if (std::isfinite(holdout[b]) && holdout[b] < best_holdout) {
                best_holdout = holdout[b];
            }
        }
        rep.visible_curve.push_back(best_visible);
        rep.holdout_curve.push_back(best_holdout);
        rep.suggest_seconds.push_back(suggest_s);
        rep.observe_seconds.push_back(observe_s);
        rep.evaluate_seconds.push_back(
            std::accumulate(eval_s.begin(), eval_s.end(), 0.0));

        if (sink) {
            std::vector<TrialRecord> records(cfg.n_batch);
            for (std::size_t b = 0; b < cfg.n_batch; ++b) {
                TrialRecord& t = records[b];
                t.job_id = job_id;
                t.iter_id = iter;
                t.batch_index = b;
                t.params = batch[b];
                t.visible = visible[b];
                t.holdout = holdout[b];
                t.suggest_ms = suggest_s * 1000.0;
                t.observe_ms = observe_s * 1000.0;
                t.evaluate_ms = eval_s[b] * 1000.0;
            }
            sink(records);
        }

        if (cfg.strict_budget && suggest_s + observe_s > cfg.budget_seconds) {
            throw TimeoutError("iteration " + std::to_string(iter) + " spent " +
                               fmt_short(suggest_s + observe_s) + " s of a " +
                               fmt_short(cfg.budget_seconds) +
                               " s suggest+observe budget");
        }
    }

    rep.norm_visible = normalize(rep.visible_curve.back(), baseline);
    rep.norm_holdout = normalize(rep.holdout_curve.back(), baseline);
    return rep;
}

std::vector<BudgetViolation> budget_check(const StudyReport& report, double budget_seconds) {
    if (std::isnan(budget_seconds)) {
        throw DataError("budget_check: budget_seconds is NaN");
    }
    if (budget_seconds <= 0.0) {
        throw DomainError("budget_check: budget_seconds must be positive");
    }
    if (report.suggest_seconds.size() != report.observe_seconds.size()) {
        throw ShapeError("budget_check: " + std::to_string(report.suggest_seconds.size()) +
                         " suggest timings vs " +
                         std::to_string(report.observe_seconds.size()) + " observe timings");
    }
    std::vector<BudgetViolation> out;
    for (std::size_t iter = 0; iter < report.suggest_seconds.size(); ++iter) {
        const double spent = report.suggest_seconds[iter] + report.observe_seconds[iter];
        if (spent > budget_seconds) {
            out.push_back({iter, spent});
        }
    }
    return out;
}

std::filesystem::path baseline_path(const std::filesystem::path& out_dir,
                                    const std::string& objective_id, Budget budget,
                                    std::uint64_t baseline_seed) {
    return out_dir / "baselines" /
           (objective_id + "_s" + std::to_string(budget.n_step) + "x" +
            std::to_string(budget.n_batch) + "_seed" + std::to_string(baseline_seed) +
            ".json");
}

std::filesystem::path trial_log_path(const std::filesystem::path& out_dir,
                                     const std::string& stem) {
    return out_dir / "trials" / (stem + ".jsonl");
}

std::filesystem::path done_marker_path(const std::filesystem::path& out_dir,
                                       const std::string& stem) {
    return out_dir / "trials" / (stem + ".done");
}

std::string job_stem(const Job& job) {
    std::ostringstream os;
    os << "job_" << std::setw(4) << std::setfill('0') << job.job_id;
    return os.str();
}

std::uint64_t baseline_seed_for(std::uint64_t run_seed, const std::string& objective_id) {
    return seed_mix(run_seed, "baseline", std::string_view(objective_id));
}

Baseline load_or_build_baseline(const ObjectiveSpec& obj, Budget budget, std::size_t pool_size,
                                std::size_t n_sim_runs, std::uint64_t baseline_seed,
                                const std::filesystem::path& out_dir) {
    const fs::path path = baseline_path(out_dir, obj.id, budget, baseline_seed);
    if (fs::exists(path)) {
        Baseline b = baseline_from_json(obj.space, read_file(path));
        if (b.objective_id != obj.id || b.n_step != budget.n_step ||
            b.n_batch != budget.n_batch || b.seed != baseline_seed) {
            throw ConfigError("baseline file '" + path.string() +
                              "' does not match the key in its name");
        }
        if (b.pool_size != pool_size || b.n_sim_runs != n_sim_runs) {
            throw ConfigError("baseline file '" + path.string() +
                              "' was built with pool=" + std::to_string(b.pool_size) +
                              " sims=" + std::to_string(b.n_sim_runs) +
                              ", but this run wants pool=" + std::to_string(pool_size) +
                              " sims=" + std::to_string(n_sim_runs));
        }
        return b;
    }
    Baseline b = build_baseline(obj, budget, pool_size, n_sim_runs, baseline_seed);
    fs::create_directories(path.parent_path());
    write_file_atomic(path, baseline_to_json(b));
    return b;
}

SearchResult run_search(const StudyConfig& cfg, const std::vector<std::string>& names,
                        const std::vector<std::string>& objective_ids,
                        const std::filesystem::path& out_dir, bool include_pairs) {
    validate_config(cfg);
    SearchResult res;
    res.study_names = enumerate_studies(names, true, include_pairs);
    if (res.study_names.empty()) {
        throw ConfigError("run_search: no studies to run");
    }
    if (objective_ids.empty()) {
        throw ConfigError("run_search: no objectives to run on");
    }

    std::map<std::string, ObjectiveSpec> objs;
    for (const auto& id : objective_ids) {
        if (objs.count(id)) {
            throw ConfigError("duplicate objective id '" + id + "'");
        }
        objs.emplace(id, objective_by_id(id));
    }

    fs::create_directories(out_dir / "baselines");
    fs::create_directories(out_dir / "trials");
    fs::create_directories(out_dir / "reports");

    std::map<std::string, Baseline> baselines;
    for (const auto& [id, obj] : objs) {
        baselines.emplace(id, load_or_build_baseline(obj, cfg.budget(), cfg.baseline_pool,
                                                     cfg.baseline_sims,
                                                     baseline_seed_for(cfg.run_seed, id),
                                                     out_dir));
    }

    res.jobs = make_jobs(cfg, res.study_names, objective_ids);
    write_manifest(out_dir, cfg, res.study_names, objective_ids, res.jobs.size(),
                   /*complete=*/false, {}, nullptr);

    const auto assignment = schedule(res.jobs.size(), cfg.workers);
    std::vector<std::vector<std::size_t>> lanes(cfg.workers);
    for (std::size_t i = 0; i < res.jobs.size(); ++i) {
        lanes[assignment[i]].push_back(i);
    }

    std::vector<std::unique_ptr<StudyReport>> slots(res.jobs.size());
    std::mutex failures_mu;
    std::vector<JobFailure> failures;

    auto run_lane = [&](std::size_t w) {
        for (std::size_t ji : lanes[w]) {
            const Job& job = res.jobs[ji];
            const std::string stem = job_stem(job);
            const fs::path done = done_marker_path(out_dir, stem);
            try {
                if (fs::exists(done)) {
                    slots[ji] =
                        std::make_unique<StudyReport>(report_from_json(read_file(done)));
                    continue;
                }
                std::ofstream log(trial_log_path(out_dir, stem),
                                  std::ios::binary | std::ios::trunc);
                if (!log) {
                    throw StateError("cannot open trial log for job " +
                                     std::to_string(job.job_id));
                }
                const TrialSink sink = [&log](const std::vector<TrialRecord>& records) {
                    for (const auto& t : records) {
                        log << trial_to_json(t) << '\n';
                    }
                    log.flush();
                };
                StudyReport rep = run_study(cfg, job.optimizer_name,
                                            objs.at(job.objective_id), job.repeat_idx,
                                            baselines.at(job.objective_id), job.job_id,
                                            sink);
                write_file_atomic(done, report_to_json(rep) + "\n");
                slots[ji] = std::make_unique<StudyReport>(std::move(rep));
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failures_mu);
                failures.push_back({job, e.what()});
            }
        }
    };

    if (cfg.workers == 1) {
        run_lane(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(cfg.workers);
        for (std::size_t w = 0; w < cfg.workers; ++w) {
            threads.emplace_back(run_lane, w);
        }
        for (auto& t : threads) {
            t.join();
        }
    }

    for (std::size_t ji = 0; ji < res.jobs.size(); ++ji) {
        if (slots[ji]) {
            res.reports.push_back(std::move(*slots[ji]));
        } else {
            res.gaps.push_back(gap_label(res.jobs[ji]));
        }
    }
    std::sort(failures.begin(), failures.end(),
              [](const JobFailure& a, const JobFailure& b) {
                  return a.job.job_id < b.job.job_id;
              });
    res.failures = std::move(failures);
    res.complete = res.gaps.empty();

    const SearchOutcome outcome =
        write_report_bundle(out_dir, cfg, res, baselines, objective_ids.size());
    write_manifest(out_dir, cfg, res.study_names, objective_ids, res.jobs.size(),
                   res.complete, res.gaps, &outcome);
    return res;
}

SearchResult load_search(const std::filesystem::path& out_dir) {
    const RunManifest m = read_manifest(out_dir);
    SearchResult res;
    res.study_names = m.study_names;
    res.jobs = make_jobs(m.cfg, m.study_names, m.objective_ids);
    for (const auto& job : res.jobs) {
        const fs::path done = done_marker_path(out_dir, job_stem(job));
        if (fs::exists(done)) {
            res.reports.push_back(report_from_json(read_file(done)));
        } else {
            res.gaps.push_back(gap_label(job));
        }
    }
    res.complete = res.gaps.empty();
    return res;
}

RunManifest read_manifest(const std::filesystem::path& out_dir) {
    const fs::path path = out_dir / "manifest.json";
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    RunManifest m;
    m.cfg = config_from_json(require_key(j, "config", "manifest"));
    try {
        m.study_names =
            require_key(j, "study_names", "manifest").get<std::vector<std::string>>();
        m.objective_ids =
            require_key(j, "objective_ids", "manifest").get<std::vector<std::string>>();
        m.suite_version = require_key(j, "suite_version", "manifest").get<std::string>();
        m.n_jobs = require_key(j, "n_jobs", "manifest").get<std::size_t>();
        m.complete = require_key(j, "complete", "manifest").get<bool>();
        m.gaps = require_key(j, "gaps", "manifest").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest has a mistyped field: ") + e.what());
    }
    return m;
}

std::string trial_to_json(const TrialRecord& t) {
    json j;
    j["job_id"] = t.job_id;
    j["iter_id"] = t.iter_id;
    j["batch_index"] = t.batch_index;
    j["params"] = json::parse(params_to_json(t.params));
    j["visible"] = num_to_json(t.visible);
    j["holdout"] = num_to_json(t.holdout);
    j["suggest_ms"] = t.suggest_ms;
    j["observe_ms"] = t.observe_ms;
    j["evaluate_ms"] = t.evaluate_ms;
    return j.dump();
}

TrialRecord trial_from_json(const SearchSpace& space, const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("trial record is not valid JSON: ") + e.what());
    }
    TrialRecord t;
    try {
        t.job_id = require_key(j, "job_id", "trial record").get<std::size_t>();
        t.iter_id = require_key(j, "iter_id", "trial record").get<std::size_t>();
        t.batch_index = require_key(j, "batch_index", "trial record").get<std::size_t>();
        t.suggest_ms = require_key(j, "suggest_ms", "trial record").get<double>();
        t.observe_ms = require_key(j, "observe_ms", "trial record").get<double>();
        t.evaluate_ms = require_key(j, "evaluate_ms", "trial record").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("trial record has a mistyped field: ") + e.what());
    }
    t.visible = num_from_json(require_key(j, "visible", "trial record"), "trial visible");
    t.holdout = num_from_json(require_key(j, "holdout", "trial record"), "trial holdout");
    t.params = params_from_json(space, require_key(j, "params", "trial record").dump());
    return t;
}

std::string report_to_json(const StudyReport& r) {
    json j;
    j["optimizer_name"] = r.optimizer_name;
    j["objective_id"] = r.objective_id;
    j["repeat_idx"] = r.repeat_idx;
    j["visible_curve"] = num_array_to_json(r.visible_curve);
    j["holdout_curve"] = num_array_to_json(r.holdout_curve);
    j["norm_visible"] = num_to_json(r.norm_visible);
    j["norm_holdout"] = num_to_json(r.norm_holdout);
    j["suggest_seconds"] = r.suggest_seconds;
    j["observe_seconds"] = r.observe_seconds;
    j["evaluate_seconds"] = r.evaluate_seconds;
    return j.dump();
}

StudyReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("study report is not valid JSON: ") + e.what());
    }
    StudyReport r;
    try {
        r.optimizer_name =
            require_key(j, "optimizer_name", "study report").get<std::string>();
        r.objective_id = require_key(j, "objective_id", "study report").get<std::string>();
        r.repeat_idx = require_key(j, "repeat_idx", "study report").get<std::size_t>();
        r.suggest_seconds =
            require_key(j, "suggest_seconds", "study report").get<std::vector<double>>();
        r.observe_seconds =
            require_key(j, "observe_seconds", "study report").get<std::vector<double>>();
        r.evaluate_seconds =
            require_key(j, "evaluate_seconds", "study report").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("study report has a mistyped field: ") + e.what());
    }
    r.visible_curve = num_array_from_json(require_key(j, "visible_curve", "study report"),
                                          "visible curve");
    r.holdout_curve = num_array_from_json(require_key(j, "holdout_curve", "study report"),
                                          "holdout curve");
    r.norm_visible =
        num_from_json(require_key(j, "norm_visible", "study report"), "norm_visible");
    r.norm_holdout =
        num_from_json(require_key(j, "norm_holdout", "study report"), "norm_holdout");
    return r;
}

} // namespace bbo
