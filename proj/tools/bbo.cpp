// Command-line front end: build baselines, run one study, run the full
// exhaustive search, or print reports from an existing output bundle.
// The output directory comes from --out, else the BBO_OUT environment
// variable, else ./bbo_out.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bbo/errors.hpp"
#include "bbo/harness.hpp"
#include "bbo/objectives.hpp"
#include "bbo/optimizer.hpp"
#include "bbo/scoring.hpp"
#include "bbo/space.hpp"

namespace {

namespace fs = std::filesystem;

fs::path resolve_out_dir(const std::string& cli_value) {
    if (!cli_value.empty()) {
        return cli_value;
    }
    if (const char* env = std::getenv("BBO_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "bbo_out";
}

std::vector<std::string> resolve_objectives(const std::vector<std::string>& requested) {
    if (requested.size() == 1 && requested.front() == "all") {
        std::vector<std::string> ids;
        for (const auto& obj : bbo::suite()) {
            ids.push_back(obj.id);
        }
        return ids;
    }
    for (const auto& id : requested) {
        bbo::objective_by_id(id); // unknown ids fail here with a clear message
    }
    return requested;
}

// Cheap fail-fast pass over study names before any job runs: registry
// construction catches typos and bad ensembles without touching the grid.
void validate_study_names(const std::vector<std::string>& study_names) {
    const bbo::SearchSpace probe({bbo::ParamSpec::real("x", 0.0, 1.0)});
    for (const auto& name : study_names) {
        bbo::make_optimizer({name, {}, 0}, probe);
    }
}

std::string fmt4(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

void print_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::cout << std::left << std::setw(int(widths[c]) + 2) << row[c];
        }
        std::cout << "\n";
    }
}

int cmd_list_objectives() {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"id", "params", "warped_dim", "f_star", "sigma"});
    for (const auto& obj : bbo::suite()) {
        rows.push_back({obj.id, std::to_string(obj.space.specs().size()),
                        std::to_string(obj.space.warped_dim()), fmt4(obj.f_star),
                        fmt4(obj.sigma_cv)});
    }
    print_table(rows);
    return 0;
}

struct BaselineArgs {
    std::vector<std::string> objectives{"all"};
    std::size_t steps = 16;
    std::size_t batch = 8;
    std::size_t pool = 10000;
    std::size_t sims = 100;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_baseline(const BaselineArgs& a) {
    const fs::path out_dir = resolve_out_dir(a.out);
    const bbo::Budget budget{a.steps, a.batch};
    for (const auto& id : resolve_objectives(a.objectives)) {
        const auto& obj = bbo::objective_by_id(id);
        const std::uint64_t bseed = bbo::baseline_seed_for(a.seed, id);
        const bbo::Baseline b =
            bbo::load_or_build_baseline(obj, budget, a.pool, a.sims, bseed, out_dir);
        std::cout << id << ": rand_opt=" << b.rand_opt << " rand_mean=" << b.rand_mean
                  << " -> " << bbo::baseline_path(out_dir, id, budget, bseed).string()
                  << "\n";
    }
    return 0;
}

struct RunArgs {
    std::string optimizer;
    std::string objective;
    std::size_t steps = 16;
    std::size_t batch = 8;
    std::size_t repeat = 0;
    double budget_seconds = 40.0;
    bool strict_budget = false;
    std::size_t pool = 10000;
    std::size_t sims = 100;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_run(const RunArgs& a) {
    const fs::path out_dir = resolve_out_dir(a.out);
    fs::create_directories(out_dir / "trials");

    bbo::StudyConfig cfg;
    cfg.n_step = a.steps;
    cfg.n_batch = a.batch;
    cfg.n_repeat = a.repeat + 1;
    cfg.budget_seconds = a.budget_seconds;
    cfg.strict_budget = a.strict_budget;
    cfg.run_seed = a.seed;
    cfg.baseline_pool = a.pool;
    cfg.baseline_sims = a.sims;

    validate_study_names({a.optimizer});
    const auto& obj = bbo::objective_by_id(a.objective);
    const bbo::Baseline baseline = bbo::load_or_build_baseline(
        obj, cfg.budget(), a.pool, a.sims, bbo::baseline_seed_for(a.seed, obj.id),
        out_dir);

    const std::string stem =
        a.optimizer + "_" + a.objective + "_r" + std::to_string(a.repeat);
    std::ofstream log(bbo::trial_log_path(out_dir, stem), std::ios::trunc);
    if (!log) {
        throw bbo::StateError("cannot open trial log under '" + out_dir.string() + "'");
    }
    const bbo::TrialSink sink = [&log](const std::vector<bbo::TrialRecord>& records) {
        for (const auto& t : records) {
            log << bbo::trial_to_json(t) << '\n';
        }
        log.flush();
    };

    const bbo::StudyReport rep =
        bbo::run_study(cfg, a.optimizer, obj, a.repeat, baseline, 0, sink);
    {
        std::ofstream done(bbo::done_marker_path(out_dir, stem), std::ios::trunc);
        done << bbo::report_to_json(rep) << "\n";
    }

    const auto violations = bbo::budget_check(rep, cfg.budget_seconds);
    std::cout << a.optimizer << " on " << a.objective << " (repeat " << a.repeat
              << ")\n";
    std::cout << "  final visible cumulative min: " << rep.visible_curve.back() << "\n";
    std::cout << "  normalized visible: " << fmt4(rep.norm_visible)
              << "  normalized holdout: " << fmt4(rep.norm_holdout) << "\n";
    std::cout << "  budget violations: " << violations.size() << "\n";
    std::cout << "  trial log: " << bbo::trial_log_path(out_dir, stem).string() << "\n";
    return 0;
}

struct SearchArgs {
    std::vector<std::string> optimizers{"tpe", "gpei", "turbo", "de", "anneal"};
    bool pairs = true;
    std::vector<std::string> objectives{"all"};
    std::size_t repeats = 3;
    std::size_t workers = 0; // 0: hardware parallelism
    std::size_t steps = 16;
    std::size_t batch = 8;
    double budget_seconds = 40.0;
    bool strict_budget = false;
    std::size_t pool = 10000;
    std::size_t sims = 100;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_search(const SearchArgs& a) {
    const fs::path out_dir = resolve_out_dir(a.out);

    bbo::StudyConfig cfg;
    cfg.n_step = a.steps;
    cfg.n_batch = a.batch;
    cfg.n_repeat = a.repeats;
    cfg.budget_seconds = a.budget_seconds;
    cfg.strict_budget = a.strict_budget;
    cfg.run_seed = a.seed;
    cfg.workers = a.workers > 0 ? a.workers
                                : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    cfg.baseline_pool = a.pool;
    cfg.baseline_sims = a.sims;

    validate_study_names(bbo::enumerate_studies(a.optimizers, true, a.pairs));
    const auto objective_ids = resolve_objectives(a.objectives);

    const bbo::SearchResult res =
        bbo::run_search(cfg, a.optimizers, objective_ids, out_dir, a.pairs);

    std::ifstream summary(out_dir / "reports" / "summary.txt");
    std::cout << summary.rdbuf();
    std::cout << "bundle written to " << out_dir.string() << "\n";
    if (!res.complete) {
        std::cerr << res.gaps.size() << " job(s) failed:\n";
        for (const auto& f : res.failures) {
            std::cerr << "  job " << f.job.job_id << " (" << f.job.optimizer_name
                      << " on " << f.job.objective_id << " repeat " << f.job.repeat_idx
                      << "): " << f.reason << "\n";
        }
        return 1;
    }
    return 0;
}

struct ReportArgs {
    std::string in;
    std::string format = "table";
};

void print_csv(const std::string& title, const std::vector<std::vector<std::string>>& rows) {
    std::cout << "# " << title << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::cout << (c > 0 ? "," : "") << row[c];
        }
        std::cout << "\n";
    }
}

int cmd_report(const ReportArgs& a) {
    const fs::path in_dir = resolve_out_dir(a.in);
    const bbo::SearchResult res = bbo::load_search(in_dir);
    if (!res.complete) {
        std::cerr << "result grid under '" << in_dir.string() << "' is missing "
                  << res.gaps.size() << " cell(s):\n";
        for (const auto& gap : res.gaps) {
            std::cerr << "  " << gap << "\n";
        }
        return 1;
    }

    const bbo::AggregateResult vis = bbo::aggregate(res.reports, bbo::ScoreKind::Visible);
    const bbo::AggregateResult hold = bbo::aggregate(res.reports, bbo::ScoreKind::Holdout);

    std::vector<std::vector<std::string>> board;
    board.push_back({"optimizer", "score_visible", "score_holdout"});
    for (std::size_t i = 0; i < vis.optimizers.size(); ++i) {
        board.push_back({vis.optimizers[i],
                         fmt4(bbo::leaderboard_score(vis.mean_norm[i])),
                         fmt4(bbo::leaderboard_score(hold.mean_norm[i]))});
    }

    std::vector<std::vector<std::string>> matrix;
    {
        std::vector<std::string> header{"objective"};
        header.insert(header.end(), vis.optimizers.begin(), vis.optimizers.end());
        matrix.push_back(std::move(header));
        for (std::size_t j = 0; j < vis.objectives.size(); ++j) {
            std::vector<std::string> row{vis.objectives[j]};
            for (std::size_t i = 0; i < vis.optimizers.size(); ++i) {
                std::string cell = fmt4(vis.matrix[i][j]);
                if (vis.best_per_objective[j] == i) {
                    cell += "*";
                }
                row.push_back(std::move(cell));
            }
            matrix.push_back(std::move(row));
        }
    }

    if (a.format == "csv") {
        print_csv("leaderboard", board);
        std::cout << "\n";
        print_csv("matrix_visible (best per row starred)", matrix);
    } else {
        std::cout << "leaderboard (0-100, higher is better)\n";
        print_table(board);
        std::cout << "\nmean normalized visible score per objective (best per row "
                     "starred)\n";
        print_table(matrix);
    }

    std::ifstream summary(in_dir / "reports" / "summary.txt");
    if (summary) {
        std::cout << "\n" << summary.rdbuf();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"black-box optimization toolkit: optimizer ensembles under an "
                 "exhaustive benchmark search"};
    app.require_subcommand(0, 1);

    bool list_objectives = false;
    app.add_flag("--list-objectives", list_objectives,
                 "print the benchmark suite and exit");

    BaselineArgs bl;
    CLI::App* baseline = app.add_subcommand(
        "baseline", "build and persist random-search baselines");
    baseline->add_option("--objectives", bl.objectives, "objective ids, or 'all'")
        ->delimiter(',');
    baseline->add_option("--steps", bl.steps, "iterations per run");
    baseline->add_option("--batch", bl.batch, "suggestions per iteration");
    baseline->add_option("--pool", bl.pool, "uniform pool size");
    baseline->add_option("--sims", bl.sims, "simulated random-search runs");
    baseline->add_option("--seed", bl.seed, "run seed");
    baseline->add_option("--out", bl.out, "output directory (default: BBO_OUT or ./bbo_out)");

    RunArgs rn;
    CLI::App* run = app.add_subcommand("run", "run one optimizer on one objective");
    run->add_option("--optimizer", rn.optimizer, "optimizer name, e.g. tpe or turbo+gpei")
        ->required();
    run->add_option("--objective", rn.objective, "objective id")->required();
    run->add_option("--steps", rn.steps, "iterations");
    run->add_option("--batch", rn.batch, "suggestions per iteration");
    run->add_option("--repeat", rn.repeat, "repeat index");
    run->add_option("--budget", rn.budget_seconds, "per-iteration budget in seconds");
    run->add_flag("--strict-budget", rn.strict_budget,
                  "fail the run on a budget violation instead of warning");
    run->add_option("--pool", rn.pool, "baseline pool size");
    run->add_option("--sims", rn.sims, "baseline simulation runs");
    run->add_option("--seed", rn.seed, "run seed");
    run->add_option("--out", rn.out, "output directory (default: BBO_OUT or ./bbo_out)");

    SearchArgs se;
    CLI::App* search = app.add_subcommand(
        "search", "run every single and pair over the objective suite");
    search->add_option("--optimizers", se.optimizers, "base optimizer names")
        ->delimiter(',');
    search->add_flag("--pairs,!--no-pairs", se.pairs, "include all pairs (default on)");
    search->add_option("--objectives", se.objectives, "objective ids, or 'all'")
        ->delimiter(',');
    search->add_option("--repeats", se.repeats, "repeats per cell");
    search->add_option("--workers", se.workers,
                       "worker threads (default: hardware parallelism)");
    search->add_option("--steps", se.steps, "iterations per run");
    search->add_option("--batch", se.batch, "suggestions per iteration");
    search->add_option("--budget", se.budget_seconds, "per-iteration budget in seconds");
    search->add_flag("--strict-budget", se.strict_budget,
                     "fail jobs on budget violations instead of warning");
    search->add_option("--pool", se.pool, "baseline pool size");
    search->add_option("--sims", se.sims, "baseline simulation runs");
    search->add_option("--seed", se.seed, "run seed");
    search->add_option("--out", se.out, "output directory (default: BBO_OUT or ./bbo_out)");

    ReportArgs rp;
    CLI::App* report = app.add_subcommand("report", "print tables from an output bundle");
    report->add_option("--in", rp.in, "bundle directory (default: BBO_OUT or ./bbo_out)");
    report->add_option("--format", rp.format, "table or csv")
        ->check(CLI::IsMember({"table", "csv"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_objectives) {
            return cmd_list_objectives();
        }
        if (*baseline) {
            return cmd_baseline(bl);
        }
        if (*run) {
            return cmd_run(rn);
        }
        if (*search) {
            return cmd_search(se);
        }
        if (*report) {
            return cmd_report(rp);
        }
    } catch (const std::exception& e) {
        std::cerr << "bbo: " << e.what() << "\n";
        return 2;
    }
    std::cout << app.help();
    return 0;
}
