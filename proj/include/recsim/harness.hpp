#pragma once

#include "recsim/config_io.hpp"
#include "recsim/event_log.hpp"
#include "recsim/metrics.hpp"
#include "recsim/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace recsim {

enum class Intervention : std::uint8_t { Baseline, CNS, CDA, CNSCDA, GRR };

std::string_view to_string(Intervention i);
Intervention parse_intervention(std::string_view s);

/// Selection rule and retraining mode for an intervention; everything else is kept.
SimulationConfig apply_intervention(SimulationConfig cfg, Intervention i);
/// The intervention a config's selection/retraining pair corresponds to, if any.
std::optional<Intervention> intervention_of(const SimulationConfig& cfg);

struct EffortCondition {
    std::string name;
    double e_a = 0.0;
    double e_d = 0.0;
};

/// The three conditions: equal, advantaged twice the disadvantaged, and the reverse.
std::vector<EffortCondition> default_effort_conditions();

/// `name:e_a:e_d` entries, comma separated.
std::vector<EffortCondition> parse_effort_conditions(const std::string& text);
std::string format_effort_conditions(const std::vector<EffortCondition>& conditions);

enum class Profile : std::uint8_t { Desk, Paper };
Profile parse_profile(std::string_view s);
int profile_seeds(Profile p);

struct ExperimentGrid {
    std::vector<double> q_values{0.0, 1.0, 2.0, 3.0};
    std::vector<EffortCondition> effort_conditions = default_effort_conditions();
    std::vector<Intervention> interventions{Intervention::Baseline, Intervention::CNS, Intervention::CDA,
                                            Intervention::CNSCDA};
    int seeds = 100;
    /// GRR cells run at most this many seeds (the method is expensive).
    int grr_seeds = 10;
    /// Keep full event logs for every run (large); summaries are always kept.
    bool raw_logs = false;
    /// Seeds per cell whose per-agent success records are kept for plotting.
    int distribution_seeds = 1;
    SimulationConfig base;

    void validate() const;
};

/// One point of the grid.
struct GridCell {
    double q = 0.0;
    EffortCondition effort;
    Intervention intervention = Intervention::Baseline;
    SimulationConfig config;
    int seeds = 0;

    /// `q<q>/<effort>/<intervention>`; also the cell's directory under logs/.
    std::string label() const;
};

std::string cell_label(double q, const std::string& effort, Intervention i);

struct CellKey {
    double q = 0.0;
    std::string effort;
    std::string intervention;
};
/// Inverse of cell_label; nullopt for labels not produced by it.
std::optional<CellKey> parse_cell_label(const std::string& label);

/// Cross product in q-major, then effort, then intervention order.
std::vector<GridCell> expand(const ExperimentGrid& grid);

/// Grid file: any `[grid]` keys configure the grid; everything else is a
/// simulation setting applied to `base`. Later entries win.
void apply_grid_entries(ExperimentGrid& grid, const ConfigEntries& entries);
ConfigEntries grid_entries(const ExperimentGrid& grid);

/// Everything kept from one (cell, seed) run.
struct RunSummary {
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    RunMetrics metrics;
    std::vector<ScorerSnapshot> scorer_history;
    /// Per-agent success records (only for the first distribution_seeds seeds).
    std::vector<SuccessRecord> successes;
    int warnings = 0;
};

RunSummary summarize(const EventLog& log, bool keep_successes);

void write_summary(const RunSummary& s, std::ostream& out);
RunSummary read_summary(std::istream& in);

struct CellResult {
    GridCell cell;
    std::vector<RunSummary> runs;  // in seed order, completed runs only
    std::vector<std::string> failures;
};

struct GridOutcome {
    std::vector<CellResult> cells;
    int runs_executed = 0;
    int runs_reused = 0;
    int runs_failed = 0;
};

/// Fixed output layout under a root directory.
struct OutputLayout {
    std::filesystem::path root;
    std::filesystem::path logs() const { return root / "logs"; }
    std::filesystem::path aggregate() const { return root / "aggregate"; }
    std::filesystem::path tables() const { return root / "tables"; }
    std::filesystem::path plots() const { return root / "plots"; }
    std::filesystem::path run_dir(const std::string& label, std::uint64_t seed) const;
    void create() const;
};

/// Runs every (cell, seed) task on `workers` threads; seed = base.seed + index.
/// Runs whose directory already holds a complete manifest for the same config
/// are loaded instead of re-executed. Writes logs/ and aggregate/.
GridOutcome run_grid(const ExperimentGrid& grid, const OutputLayout& out, int workers);

/// Loads the summaries of a previous grid (cells found under logs/).
std::vector<CellResult> load_results(const OutputLayout& out);

std::vector<MetricsReport> aggregate_results(std::span<const CellResult> cells);

/// Writes aggregate/report.csv and aggregate/manifest.json.
void write_aggregate(std::span<const CellResult> cells, const OutputLayout& out);

/// Writes one run's files into `dir`: optionally the full event log, then
/// summary.json, then manifest.json (last, marking the directory complete).
RunSummary write_run_outputs(const EventLog& log, const std::filesystem::path& dir, const std::string& label,
                             bool raw_logs, bool keep_successes);

/// Label used for a stand-alone run: its cell label when the effort pair and
/// intervention match a known condition, `custom` components otherwise.
std::string run_label(const SimulationConfig& cfg);

struct RenderedTable {
    std::string text;
    std::string csv;
};

/// Table-1 layout: rows by effort condition then q, rETR and dTTR per
/// intervention, best per row marked by distance to the fair point.
RenderedTable render_table(std::span<const MetricsReport> reports);

/// Index of the value closest to `fair` among the present ones; nullopt if none.
std::optional<std::size_t> best_index(std::span<const std::optional<double>> values, double fair);

/// Writes the plot data files under plots/ and returns their paths.
std::vector<std::filesystem::path> emit_plot_data(std::span<const CellResult> cells,
                                                  std::span<const MetricsReport> reports,
                                                  const std::filesystem::path& dir);

inline constexpr const char* kEtrSeriesHeader = "config,group,timestep,mean,stderr";
inline constexpr const char* kDistributionHeader = "config,seed,agent_id,group,total_effort,time_to_recourse";
/// Header of the weight-trajectory file for two features; wider scorers add w2, w3, ...
inline constexpr const char* kWeightsHeader = "config,seed,timestep,w0,w1,bias,skipped";

}  // namespace recsim
