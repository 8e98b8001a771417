#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bbo/objectives.hpp"
#include "bbo/scoring.hpp"
#include "bbo/space.hpp"

namespace bbo {

/// Run-wide knobs shared by every job of a study grid.
struct StudyConfig {
    std::size_t n_step = 16;
    std::size_t n_batch = 8;
    std::size_t n_repeat = 3;
    double budget_seconds = 40.0;
    bool strict_budget = false; // hard-fail a job on budget violation
    std::uint64_t run_seed = 0;
    std::size_t workers = 1;
    std::size_t baseline_pool = 10000;
    std::size_t baseline_sims = 100;

    Budget budget() const noexcept { return Budget{n_step, n_batch}; }
};

/// All counts at least 1, budget positive. Throws ConfigError otherwise.
void validate_config(const StudyConfig& cfg);

/// One schedulable unit: a single optimizer on a single objective for one
/// repeat. derived_seed depends only on the run seed and the identifying
/// fields, never on scheduling.
struct Job {
    std::size_t job_id = 0;
    std::string optimizer_name;
    std::string objective_id;
    std::size_t repeat_idx = 0;
    std::uint64_t derived_seed = 0;
};

/// One suggestion's worth of trial log: where it was, what it scored, and
/// how long each phase of its iteration took.
struct TrialRecord {
    std::size_t job_id = 0;
    std::size_t iter_id = 0;
    std::size_t batch_index = 0;
    ParamVector params;
    double visible = 0.0;
    double holdout = 0.0;
    double suggest_ms = 0.0;
    double observe_ms = 0.0;
    double evaluate_ms = 0.0;
};

/// Singles in the given order, then "A+B" pairs with A before B in the
/// given order. The random baseline may appear as a single but is never
/// paired. Throws ConfigError on duplicate names.
std::vector<std::string> enumerate_studies(const std::vector<std::string>& names,
                                           bool include_singles, bool include_pairs);

/// Round-robin assignment: job i runs on worker i mod workers.
std::vector<std::size_t> schedule(std::size_t n_jobs, std::size_t workers);

std::uint64_t job_seed(std::uint64_t run_seed, const std::string& optimizer_name,
                       const std::string& objective_id, std::size_t repeat_idx);

/// The full study-major grid: for each study name, each objective, each
/// repeat, with job_id as the running ordinal.
std::vector<Job> make_jobs(const StudyConfig& cfg, const std::vector<std::string>& study_names,
                           const std::vector<std::string>& objective_ids);

/// Called once per completed iteration with that iteration's records, so
/// a file-backed caller can append and flush as the job progresses.
using TrialSink = std::function<void(const std::vector<TrialRecord>&)>;

/// The core loop: suggest a batch, evaluate it (visible scores go back to
/// the optimizer, holdout scores stay hidden), repeat n_step times. With
/// strict_budget set, an iteration over budget throws TimeoutError.
StudyReport run_study(const StudyConfig& cfg, const std::string& optimizer_name,
                      const ObjectiveSpec& obj, std::size_t repeat_idx,
                      const Baseline& baseline, std::size_t job_id = 0,
                      const TrialSink& sink = {});

struct BudgetViolation {
    std::size_t iter_id = 0;
    double seconds = 0.0; // suggest + observe for that iteration
};

/// One violation per iteration whose suggest+observe time exceeds the
/// budget. An infinite budget reports nothing.
std::vector<BudgetViolation> budget_check(const StudyReport& report, double budget_seconds);

struct JobFailure {
    Job job;
    std::string reason;
};

struct SearchResult {
    std::vector<std::string> study_names;
    std::vector<Job> jobs;
    std::vector<StudyReport> reports; // completed jobs, in job_id order
    std::vector<JobFailure> failures;
    std::vector<std::string> gaps; // empty exactly when the grid completed
    bool complete = false;
};

/// Enumerates studies, builds or loads baselines, runs the whole grid on
/// a worker pool, and writes the output bundle under out_dir: per-job
/// trial logs with completion markers (the resume granularity), baseline
/// files, aggregate and matrix and curve and timing CSVs, a leaderboard,
/// and a run manifest. Jobs whose completion marker already exists are
/// not rerun. Failed jobs leave gaps; the bundle is still written, with
/// the gap list in the manifest and summary.
SearchResult run_search(const StudyConfig& cfg, const std::vector<std::string>& names,
                        const std::vector<std::string>& objective_ids,
                        const std::filesystem::path& out_dir, bool include_pairs = true);

// Output-bundle layout, shared by run_search, the CLI, and the tests.
std::filesystem::path baseline_path(const std::filesystem::path& out_dir,
                                    const std::string& objective_id, Budget budget,
                                    std::uint64_t baseline_seed);
std::filesystem::path trial_log_path(const std::filesystem::path& out_dir,
                                     const std::string& stem);
std::filesystem::path done_marker_path(const std::filesystem::path& out_dir,
                                       const std::string& stem);
std::string job_stem(const Job& job);

/// Baseline seed for an objective under a run seed; both `bbo baseline`
/// and `bbo search` derive it this way, so their files interchange.
std::uint64_t baseline_seed_for(std::uint64_t run_seed, const std::string& objective_id);

/// Loads the baseline for (objective, budget, seed) from out_dir, or
/// builds and persists it when absent.
Baseline load_or_build_baseline(const ObjectiveSpec& obj, Budget budget, std::size_t pool_size,
                                std::size_t n_sim_runs, std::uint64_t baseline_seed,
                                const std::filesystem::path& out_dir);

/// Report bundle re-derivation for `bbo report`: reads the manifest and
/// every completion marker under out_dir. Missing markers come back as
/// gaps, mirroring a fresh run's SearchResult.
SearchResult load_search(const std::filesystem::path& out_dir);

/// Reads back the StudyConfig and grid definition persisted by run_search.
struct RunManifest {
    StudyConfig cfg;
    std::vector<std::string> study_names;
    std::vector<std::string> objective_ids;
    std::string suite_version;
    std::size_t n_jobs = 0;
    bool complete = false;
    std::vector<std::string> gaps;
};
RunManifest read_manifest(const std::filesystem::path& out_dir);

// Line-oriented (de)serialization for trial logs and completion markers.
// Non-finite scores ride as the strings "inf", "-inf", and "nan".
std::string trial_to_json(const TrialRecord& t);
TrialRecord trial_from_json(const SearchSpace& space, const std::string& line);
std::string report_to_json(const StudyReport& r);
StudyReport report_from_json(const std::string& text);

} // namespace bbo
