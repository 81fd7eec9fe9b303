#include "recsim/config_io.hpp"
#include "recsim/engine.hpp"
#include "recsim/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace recsim;

namespace {

/// Failure with a category for the machine-readable error line.
struct CliError : std::runtime_error {
    CliError(std::string kind, const std::string& what) : std::runtime_error(what), kind(std::move(kind)) {}
    std::string kind;
};

int fail(const std::string& kind, const std::string& message, const std::string& field, int code) {
    json line{{"error", kind}, {"message", message}};
    if (!field.empty()) line["field"] = field;
    std::cerr << line.dump() << '\n';
    return code;
}

void ok(json status) {
    status["status"] = "ok";
    std::cout << status.dump() << '\n';
}

ConfigEntries parse_overrides(const std::vector<std::string>& sets) {
    ConfigEntries out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("set", "--set expects key=value, got '" + s + "'");
        out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return out;
}

std::vector<MetricsReport> read_reports(const OutputLayout& out) {
    std::ifstream f(out.aggregate() / "report.csv");
    if (!f) throw CliError("io", "no aggregate/report.csv under " + out.root.string());
    return read_report_csv(f);
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw CliError("io", "cannot write " + path.string());
    f << text;
}

RenderedTable write_tables(const OutputLayout& out, const std::vector<MetricsReport>& reports) {
    RenderedTable t = render_table(reports);
    write_text(out.tables() / "table1.txt", t.text);
    write_text(out.tables() / "table1.csv", t.csv);
    return t;
}

struct Common {
    std::string config_path;
    std::string out;
    std::vector<std::string> sets;
    bool print_config = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "Output directory")->required();
    cmd->add_option("--set", c.sets, "Override one setting, key=value (repeatable)");
    cmd->add_flag("--print-config", c.print_config, "Print the resolved configuration and exit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent recourse simulator"};
    app.require_subcommand(1);

    Common run_opts;
    std::optional<std::uint64_t> run_seed;
    std::string run_iv;
    CLI::App* run_cmd = app.add_subcommand("run", "Run one configuration and keep its full event log");
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--seed", run_seed, "Random seed");
    run_cmd->add_option("--intervention", run_iv, "baseline, cns, cda, cns+cda or grr");

    Common grid_opts;
    std::optional<std::uint64_t> grid_seed;
    std::optional<int> grid_seeds;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::string profile;
    std::vector<std::string> grid_ivs;
    bool raw_logs = false;
    CLI::App* grid_cmd = app.add_subcommand("grid", "Run the q x effort x intervention grid");
    add_common(grid_cmd, grid_opts);
    grid_cmd->add_option("--seed", grid_seed, "Base seed; run i uses base + i");
    grid_cmd->add_option("--seeds", grid_seeds, "Seeds per cell (overrides the profile)");
    grid_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    grid_cmd->add_option("--profile", profile, "desk (20 seeds) or paper (100 seeds)");
    grid_cmd->add_option("--intervention", grid_ivs, "Restrict to these interventions (repeatable)");
    grid_cmd->add_flag("--raw-logs", raw_logs, "Keep full event logs for every run");

    std::string metrics_out;
    CLI::App* metrics_cmd = app.add_subcommand("metrics", "Recompute metrics from the event logs under --out");
    metrics_cmd->add_option("--out", metrics_out, "Output directory of a previous run or grid")->required();

    std::string table_out;
    CLI::App* table_cmd = app.add_subcommand("table", "Render the rETR/dTTR table from aggregate/report.csv");
    table_cmd->add_option("--out", table_out, "Output directory of a previous run or grid")->required();

    std::string plots_out;
    CLI::App* plots_cmd = app.add_subcommand("plots", "Write plot data files from a previous run or grid");
    plots_cmd->add_option("--out", plots_out, "Output directory of a previous run or grid")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), "", 2);
    }

    try {
        if (*run_cmd) {
            SimulationConfig cfg;
            if (!run_opts.config_path.empty()) {
                ExperimentGrid g;
                g.base = cfg;
                // A run accepts the same files as the grid; grid keys are ignored.
                ConfigEntries sim_only;
                for (auto& e : read_ini_file(run_opts.config_path)) {
                    if (!e.first.starts_with("grid.")) sim_only.push_back(e);
                }
                apply_grid_entries(g, sim_only);
                cfg = g.base;
            }
            for (const auto& [k, v] : parse_overrides(run_opts.sets)) apply_setting(cfg, k, v);
            if (run_seed) cfg.seed = *run_seed;
            if (!run_iv.empty()) cfg = apply_intervention(cfg, parse_intervention(run_iv));
            cfg.validate();
            if (run_opts.print_config) {
                std::cout << write_ini(config_entries(cfg));
                return 0;
            }
            const OutputLayout out{run_opts.out};
            out.create();
            const std::string label = run_label(cfg);
            const EventLog log = run(cfg);
            CellResult cr;
            cr.cell.config = cfg;
            cr.cell.q = cfg.population.q;
            cr.cell.seeds = 1;
            if (auto key = parse_cell_label(label)) cr.cell.effort = {key->effort, cfg.population.e_a, cfg.population.e_d};
            if (auto iv = intervention_of(cfg)) cr.cell.intervention = *iv;
            const fs::path dir = out.run_dir(label, cfg.seed);
            cr.runs.push_back(write_run_outputs(log, dir, label, true, true));
            std::vector<CellResult> cells{cr};
            write_aggregate(cells, out);
            const auto reports = aggregate_results(cells);
            write_tables(out, reports);
            emit_plot_data(cells, reports, out.plots());
            ok({{"command", "run"},
                {"label", label},
                {"seed", cfg.seed},
                {"config_hash", hash_hex(cfg.hash())},
                {"records", log.size()},
                {"logs", dir.string()}});
            return 0;
        }

        if (*grid_cmd) {
            ExperimentGrid grid;
            grid.seeds = profile_seeds(Profile::Desk);
            if (!grid_opts.config_path.empty()) apply_grid_entries(grid, read_ini_file(grid_opts.config_path));
            apply_grid_entries(grid, parse_overrides(grid_opts.sets));
            if (!profile.empty()) grid.seeds = profile_seeds(parse_profile(profile));
            if (grid_seeds) grid.seeds = *grid_seeds;
            if (grid_seed) grid.base.seed = *grid_seed;
            if (!grid_ivs.empty()) {
                grid.interventions.clear();
                for (const auto& name : grid_ivs) grid.interventions.push_back(parse_intervention(name));
            }
            if (raw_logs) grid.raw_logs = true;
            grid.validate();
            if (grid_opts.print_config) {
                std::cout << write_ini(grid_entries(grid));
                return 0;
            }
            const OutputLayout out{grid_opts.out};
            const GridOutcome outcome = run_grid(grid, out, workers);
            const auto reports = aggregate_results(outcome.cells);
            write_tables(out, reports);
            emit_plot_data(outcome.cells, reports, out.plots());
            ok({{"command", "grid"},
                {"cells", outcome.cells.size()},
                {"executed", outcome.runs_executed},
                {"reused", outcome.runs_reused},
                {"failed", outcome.runs_failed},
                {"out", out.root.string()}});
            return outcome.runs_failed == 0 ? 0 : 4;
        }

        if (*metrics_cmd) {
            const OutputLayout out{metrics_out};
            int recomputed = 0;
            if (fs::exists(out.logs())) {
                std::vector<fs::path> dirs;
                for (const auto& entry : fs::recursive_directory_iterator(out.logs())) {
                    if (entry.is_regular_file() && entry.path().filename() == "events.csv") {
                        dirs.push_back(entry.path().parent_path());
                    }
                }
                std::sort(dirs.begin(), dirs.end());
                for (const auto& dir : dirs) {
                    const EventLog log = load_run(dir.string());
                    const RunSummary s = summarize(log, true);
                    std::ofstream f(dir / "summary.json");
                    write_summary(s, f);
                    ++recomputed;
                }
            }
            if (recomputed == 0) {
                throw CliError("io", "no event logs under " + out.logs().string() +
                                         " (grid runs keep them only with --raw-logs)");
            }
            const auto cells = load_results(out);
            write_aggregate(cells, out);
            ok({{"command", "metrics"}, {"runs", recomputed}, {"cells", cells.size()}});
            return 0;
        }

        if (*table_cmd) {
            const OutputLayout out{table_out};
            const RenderedTable t = write_tables(out, read_reports(out));
            std::cout << t.text;
            return 0;
        }

        if (*plots_cmd) {
            const OutputLayout out{plots_out};
            const auto cells = load_results(out);
            const auto reports = fs::exists(out.aggregate() / "report.csv") ? read_reports(out) : aggregate_results(cells);
            const auto files = emit_plot_data(cells, reports, out.plots());
            json names = json::array();
            for (const auto& f : files) names.push_back(f.filename().string());
            ok({{"command", "plots"}, {"files", names}});
            return 0;
        }
    } catch (const ConfigError& e) {
        return fail("config", e.what(), e.field(), 2);
    } catch (const CliError& e) {
        return fail(e.kind, e.what(), "", 3);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), "", 1);
    }
    return 0;
}
