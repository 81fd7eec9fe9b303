#include "recsim/harness.hpp"

#include "recsim/engine.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace recsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kInterventionNames[] = {"baseline", "cns", "cda", "cns+cda", "grr"};
constexpr Group kBothGroups[] = {Group::Advantaged, Group::Disadvantaged};

std::string short_real(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : format_real(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
    }
    return out;
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

std::string stat_text(const AggregateStat* s, bool want_stderr = false) {
    if (s == nullptr || s->missing()) return "NA";
    return format_real(want_stderr ? s->std_error : s->mean);
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
}

// ---- summary JSON ----------------------------------------------------------

json maybe(const MaybeReal& v) { return v ? json(*v) : json(nullptr); }
MaybeReal maybe(const json& j) { return j.is_null() ? MaybeReal{} : MaybeReal(j.get<double>()); }

json pair_json(const GroupPair& p) { return json::array({maybe(p.advantaged), maybe(p.disadvantaged)}); }
GroupPair pair_from(const json& j) { return {maybe(j.at(0)), maybe(j.at(1))}; }

json point_json(const MetricPoint& p) {
    return {{"etr", pair_json(p.etr)},
            {"ttr", pair_json(p.ttr)},
            {"wasted", pair_json(p.wasted)},
            {"retr", maybe(p.retr)},
            {"dttr", maybe(p.dttr)},
            {"successes", p.successes}};
}

MetricPoint point_from(const json& j) {
    MetricPoint p;
    p.etr = pair_from(j.at("etr"));
    p.ttr = pair_from(j.at("ttr"));
    p.wasted = pair_from(j.at("wasted"));
    p.retr = maybe(j.at("retr"));
    p.dttr = maybe(j.at("dttr"));
    p.successes = j.at("successes").get<std::array<int, 2>>();
    return p;
}

json points_json(const std::vector<MetricPoint>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back(point_json(p));
    return a;
}

std::vector<MetricPoint> points_from(const json& j) {
    std::vector<MetricPoint> out;
    for (const auto& p : j) out.push_back(point_from(p));
    return out;
}

std::uint64_t parse_hash(const std::string& hex) { return std::stoull(hex, nullptr, 16); }

json manifest_for(const EventLog& log, const std::string& label, bool raw_logs) {
    std::ostringstream m;
    write_manifest(log, m);
    json j = json::parse(m.str());
    j["label"] = label;
    j["summary"] = "summary.json";
    j["raw_logs"] = raw_logs;
    j["complete"] = true;
    return j;
}

/// A run directory is reusable when its manifest is complete and matches the config.
std::optional<RunSummary> try_reuse(const fs::path& dir, const SimulationConfig& cfg, bool need_raw) {
    std::ifstream mf(dir / "manifest.json");
    std::ifstream sf(dir / "summary.json");
    if (!mf || !sf) return std::nullopt;
    try {
        const json m = json::parse(mf);
        if (!m.value("complete", false) || m.at("config_hash").get<std::string>() != hash_hex(cfg.hash())) {
            return std::nullopt;
        }
        if (need_raw && !fs::exists(dir / "events.csv")) return std::nullopt;
        return read_summary(sf);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<std::string> ordered_interventions(const std::set<std::string>& present) {
    std::vector<std::string> out;
    for (auto name : kInterventionNames) {
        if (present.contains(std::string(name))) out.emplace_back(name);
    }
    for (const auto& name : present) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    return out;
}

}  // namespace

// ---- interventions, conditions, profiles -----------------------------------

std::string_view to_string(Intervention i) { return kInterventionNames[static_cast<int>(i)]; }

Intervention parse_intervention(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kInterventionNames); ++i) {
        if (kInterventionNames[i] == s) return static_cast<Intervention>(i);
    }
    throw ConfigError("intervention", "unknown intervention '" + std::string(s) + "'");
}

SimulationConfig apply_intervention(SimulationConfig cfg, Intervention i) {
    const bool cns = i == Intervention::CNS || i == Intervention::CNSCDA;
    cfg.selection = cns ? SelectionRule::CNS : SelectionRule::TopK;
    switch (i) {
        case Intervention::Baseline:
        case Intervention::CNS: cfg.retraining = Retraining::None; break;
        case Intervention::CDA:
        case Intervention::CNSCDA: cfg.retraining = Retraining::CDA; break;
        case Intervention::GRR: cfg.retraining = Retraining::GRR; break;
    }
    return cfg;
}

std::optional<Intervention> intervention_of(const SimulationConfig& cfg) {
    const bool cns = cfg.selection == SelectionRule::CNS;
    switch (cfg.retraining) {
        case Retraining::None: return cns ? Intervention::CNS : Intervention::Baseline;
        case Retraining::CDA: return cns ? Intervention::CNSCDA : Intervention::CDA;
        case Retraining::GRR: return cns ? std::nullopt : std::optional(Intervention::GRR);
    }
    return std::nullopt;
}

std::vector<EffortCondition> default_effort_conditions() {
    const double e = PopulationSpec{}.e_a;
    return {{"equal", e, e}, {"a_gt_d", e, e / 2.0}, {"a_lt_d", e / 2.0, e}};
}

std::vector<EffortCondition> parse_effort_conditions(const std::string& text) {
    std::vector<EffortCondition> out;
    for (const auto& item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 3 || !valid_name(parts[0])) {
            throw ConfigError("grid.effort_conditions", "grid.effort_conditions: expected name:e_a:e_d, got '" + item + "'");
        }
        out.push_back({parts[0], parse_real(parts[1], "grid.effort_conditions"),
                       parse_real(parts[2], "grid.effort_conditions")});
    }
    return out;
}

std::string format_effort_conditions(const std::vector<EffortCondition>& conditions) {
    std::string out;
    for (const auto& c : conditions) {
        if (!out.empty()) out += ',';
        out += c.name + ':' + short_real(c.e_a) + ':' + short_real(c.e_d);
    }
    return out;
}

Profile parse_profile(std::string_view s) {
    if (s == "desk") return Profile::Desk;
    if (s == "paper") return Profile::Paper;
    throw ConfigError("profile", "unknown profile '" + std::string(s) + "' (expected desk or paper)");
}

int profile_seeds(Profile p) { return p == Profile::Desk ? 20 : 100; }

void ExperimentGrid::validate() const {
    if (q_values.empty()) throw ConfigError("grid.q_values", "grid.q_values must not be empty");
    for (double q : q_values) {
        if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("grid.q_values", "q values must be non-negative");
    }
    if (effort_conditions.empty()) {
        throw ConfigError("grid.effort_conditions", "grid.effort_conditions must not be empty");
    }
    std::set<std::string> names;
    for (const auto& c : effort_conditions) {
        if (!valid_name(c.name) || !names.insert(c.name).second) {
            throw ConfigError("grid.effort_conditions", "effort condition names must be unique identifiers");
        }
    }
    if (interventions.empty()) throw ConfigError("grid.interventions", "grid.interventions must not be empty");
    std::set<Intervention> seen(interventions.begin(), interventions.end());
    if (seen.size() != interventions.size()) {
        throw ConfigError("grid.interventions", "grid.interventions must not repeat");
    }
    if (seeds < 1) throw ConfigError("grid.seeds", "seeds must be positive");
    if (grr_seeds < 1) throw ConfigError("grid.grr_seeds", "grr_seeds must be positive");
    if (distribution_seeds < 0) {
        throw ConfigError("grid.distribution_seeds", "distribution_seeds must be non-negative");
    }
    base.validate();
}

// ---- cells ------------------------------------------------------------------

std::string cell_label(double q, const std::string& effort, Intervention i) {
    return "q" + short_real(q) + "/" + effort + "/" + std::string(to_string(i));
}

std::string GridCell::label() const { return cell_label(q, effort.name, intervention); }

std::optional<CellKey> parse_cell_label(const std::string& label) {
    const auto parts = split(label, '/');
    if (parts.size() != 3 || parts[0].size() < 2 || parts[0][0] != 'q' || parts[1].empty() || parts[2].empty()) {
        return std::nullopt;
    }
    try {
        return CellKey{parse_real(parts[0].substr(1), "q"), parts[1], parts[2]};
    } catch (const ConfigError&) {
        return std::nullopt;
    }
}

std::vector<GridCell> expand(const ExperimentGrid& grid) {
    grid.validate();
    std::vector<GridCell> cells;
    for (double q : grid.q_values) {
        for (const auto& effort : grid.effort_conditions) {
            for (Intervention iv : grid.interventions) {
                GridCell c;
                c.q = q;
                c.effort = effort;
                c.intervention = iv;
                c.config = apply_intervention(grid.base, iv);
                c.config.population.q = q;
                c.config.population.e_a = effort.e_a;
                c.config.population.e_d = effort.e_d;
                c.config.validate();
                c.seeds = iv == Intervention::GRR ? std::min(grid.seeds, grid.grr_seeds) : grid.seeds;
                cells.push_back(std::move(c));
            }
        }
    }
    return cells;
}

void apply_grid_entries(ExperimentGrid& grid, const ConfigEntries& entries) {
    for (const auto& [key, value] : entries) {
        if (!key.starts_with("grid.")) {
            apply_setting(grid.base, key, value);
            continue;
        }
        if (key == "grid.q_values") {
            grid.q_values = parse_real_list(value, key);
        } else if (key == "grid.effort_conditions") {
            grid.effort_conditions = parse_effort_conditions(value);
        } else if (key == "grid.interventions") {
            grid.interventions.clear();
            for (const auto& name : split(value, ',')) grid.interventions.push_back(parse_intervention(name));
        } else if (key == "grid.seeds") {
            grid.seeds = static_cast<int>(parse_integer(value, key));
        } else if (key == "grid.grr_seeds") {
            grid.grr_seeds = static_cast<int>(parse_integer(value, key));
        } else if (key == "grid.raw_logs") {
            grid.raw_logs = parse_bool(value, key);
        } else if (key == "grid.distribution_seeds") {
            grid.distribution_seeds = static_cast<int>(parse_integer(value, key));
        } else {
            throw ConfigError(key, "unknown setting '" + key + "'");
        }
    }
}

ConfigEntries grid_entries(const ExperimentGrid& grid) {
    ConfigEntries out = config_entries(grid.base);
    std::string qs;
    for (double q : grid.q_values) qs += (qs.empty() ? "" : ",") + short_real(q);
    std::string ivs;
    for (Intervention i : grid.interventions) ivs += (ivs.empty() ? "" : ",") + std::string(to_string(i));
    out.emplace_back("grid.q_values", qs);
    out.emplace_back("grid.effort_conditions", format_effort_conditions(grid.effort_conditions));
    out.emplace_back("grid.interventions", ivs);
    out.emplace_back("grid.seeds", std::to_string(grid.seeds));
    out.emplace_back("grid.grr_seeds", std::to_string(grid.grr_seeds));
    out.emplace_back("grid.raw_logs", grid.raw_logs ? "true" : "false");
    out.emplace_back("grid.distribution_seeds", std::to_string(grid.distribution_seeds));
    return out;
}

std::string run_label(const SimulationConfig& cfg) {
    std::string effort = "custom";
    for (const auto& c : default_effort_conditions()) {
        if (c.e_a == cfg.population.e_a && c.e_d == cfg.population.e_d) effort = c.name;
    }
    const auto iv = intervention_of(cfg);
    const std::string ivname = iv ? std::string(to_string(*iv)) : "custom";
    return "q" + short_real(cfg.population.q) + "/" + effort + "/" + ivname;
}

// ---- summaries ----------------------------------------------------------------

RunSummary summarize(const EventLog& log, bool keep_successes) {
    RunSummary s;
    s.seed = log.seed();
    s.config_hash = log.config_hash();
    s.metrics = compute_run_metrics(log);
    s.scorer_history.assign(log.scorer_history().begin(), log.scorer_history().end());
    s.warnings = static_cast<int>(log.warnings().size());
    if (keep_successes) {
        const LogIndex index(log);
        for (Group g : kBothGroups) {
            auto part = successful_set(index, g, log.config().horizon);
            s.successes.insert(s.successes.end(), part.begin(), part.end());
        }
        std::sort(s.successes.begin(), s.successes.end(),
                  [](const SuccessRecord& a, const SuccessRecord& b) { return a.agent_id < b.agent_id; });
    }
    return s;
}

void write_summary(const RunSummary& s, std::ostream& out) {
    const RunMetrics& m = s.metrics;
    json dp = json::array();
    for (const auto& v : m.dp) dp.push_back(maybe(v));
    json scorers = json::array();
    for (const auto& h : s.scorer_history) {
        scorers.push_back({{"timestep", h.timestep},
                           {"weights", h.weights},
                           {"bias", h.bias},
                           {"retrain_skipped", h.retrain_skipped}});
    }
    json successes = json::array();
    for (const auto& r : s.successes) {
        successes.push_back(json::array({r.agent_id, std::string(to_string(r.group)), r.o_minus, r.o_plus, r.delta,
                                         r.total_cost}));
    }
    json j{{"seed", s.seed},
           {"config_hash", hash_hex(s.config_hash)},
           {"warnings", s.warnings},
           {"metrics",
            {{"horizon", m.horizon},
             {"per_step", points_json(m.per_step)},
             {"running", points_json(m.running)},
             {"dp", dp},
             {"cumulative", point_json(m.cumulative)},
             {"dp_mean", maybe(m.dp_mean)}}},
           {"scorer_history", scorers},
           {"successes", successes}};
    out << j.dump() << '\n';
}

RunSummary read_summary(std::istream& in) {
    const json j = json::parse(in);
    RunSummary s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.config_hash = parse_hash(j.at("config_hash").get<std::string>());
    s.warnings = j.at("warnings").get<int>();
    const json& m = j.at("metrics");
    s.metrics.horizon = m.at("horizon").get<int>();
    s.metrics.per_step = points_from(m.at("per_step"));
    s.metrics.running = points_from(m.at("running"));
    for (const auto& v : m.at("dp")) s.metrics.dp.push_back(maybe(v));
    s.metrics.cumulative = point_from(m.at("cumulative"));
    s.metrics.dp_mean = maybe(m.at("dp_mean"));
    for (const auto& h : j.at("scorer_history")) {
        s.scorer_history.push_back({h.at("timestep").get<Timestep>(), h.at("weights").get<std::vector<double>>(),
                                    h.at("bias").get<double>(), h.at("retrain_skipped").get<bool>()});
    }
    for (const auto& r : j.at("successes")) {
        s.successes.push_back({r.at(0).get<AgentId>(), parse_group(r.at(1).get<std::string>()), r.at(2).get<Timestep>(),
                               r.at(3).get<Timestep>(), r.at(4).get<int>(), r.at(5).get<double>()});
    }
    return s;
}

// ---- running the grid -----------------------------------------------------------

fs::path OutputLayout::run_dir(const std::string& label, std::uint64_t seed) const {
    return logs() / fs::path(label) / ("seed_" + std::to_string(seed));
}

void OutputLayout::create() const {
    for (const auto& d : {logs(), aggregate(), tables(), plots()}) fs::create_directories(d);
}

RunSummary write_run_outputs(const EventLog& log, const fs::path& dir, const std::string& label, bool raw_logs,
                             bool keep_successes) {
    fs::create_directories(dir);
    fs::remove(dir / "manifest.json");
    if (raw_logs) {
        std::ofstream ev(dir / "events.csv");
        write_events_csv(log, ev);
        std::ofstream jl(dir / "events.jsonl");
        write_events_jsonl(log, jl);
        std::ofstream ag(dir / "agents.csv");
        write_agents_csv(log, ag);
    }
    RunSummary summary = summarize(log, keep_successes);
    {
        std::ofstream sf(dir / "summary.json");
        write_summary(summary, sf);
    }
    write_file(dir / "manifest.json", manifest_for(log, label, raw_logs).dump(2) + "\n");
    return summary;
}

GridOutcome run_grid(const ExperimentGrid& grid, const OutputLayout& out, int workers) {
    const std::vector<GridCell> cells = expand(grid);
    out.create();

    struct Task {
        std::size_t cell;
        int index;
    };
    std::vector<Task> tasks;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (int i = 0; i < cells[c].seeds; ++i) tasks.push_back({c, i});
    }

    struct Slot {
        std::optional<RunSummary> summary;
        std::string error;
        bool reused = false;
    };
    std::vector<Slot> slots(tasks.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const GridCell& cell = cells[tasks[t].cell];
            SimulationConfig cfg = cell.config;
            cfg.seed = grid.base.seed + static_cast<std::uint64_t>(tasks[t].index);
            const fs::path dir = out.run_dir(cell.label(), cfg.seed);
            Slot& slot = slots[t];
            try {
                if (auto reused = try_reuse(dir, cfg, grid.raw_logs)) {
                    slot.summary = std::move(reused);
                    slot.reused = true;
                    continue;
                }
                const EventLog log = run(cfg);
                slot.summary = write_run_outputs(log, dir, cell.label(), grid.raw_logs,
                                                 tasks[t].index < grid.distribution_seeds);
            } catch (const std::exception& e) {
                slot.error = "seed " + std::to_string(cfg.seed) + ": " + e.what();
            }
        }
    };

    const int n = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    GridOutcome outcome;
    for (const auto& cell : cells) outcome.cells.push_back({cell, {}, {}});
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        CellResult& cr = outcome.cells[tasks[t].cell];
        Slot& slot = slots[t];
        if (slot.summary) {
            cr.runs.push_back(std::move(*slot.summary));
            ++(slot.reused ? outcome.runs_reused : outcome.runs_executed);
        } else {
            cr.failures.push_back(slot.error);
            ++outcome.runs_failed;
        }
    }
    write_aggregate(outcome.cells, out);
    return outcome;
}

std::vector<CellResult> load_results(const OutputLayout& out) {
    std::map<std::string, CellResult> by_label;
    if (!fs::exists(out.logs())) return {};
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::recursive_directory_iterator(out.logs())) {
        if (entry.is_regular_file() && entry.path().filename() == "summary.json") dirs.push_back(entry.path().parent_path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        std::ifstream mf(dir / "manifest.json");
        if (!mf) continue;
        const json m = json::parse(mf);
        if (!m.value("complete", false)) continue;
        const std::string label = m.value("label", fs::relative(dir.parent_path(), out.logs()).generic_string());
        std::ifstream sf(dir / "summary.json");
        RunSummary s = read_summary(sf);

        auto [it, fresh] = by_label.try_emplace(label);
        CellResult& cr = it->second;
        if (fresh) {
            SimulationConfig cfg;
            for (const auto& [k, v] : m.at("config").items()) apply_setting(cfg, k, v.get<std::string>());
            cr.cell.config = cfg;
            cr.cell.q = cfg.population.q;
            cr.cell.effort = {"custom", cfg.population.e_a, cfg.population.e_d};
            if (auto key = parse_cell_label(label)) {
                cr.cell.effort.name = key->effort;
                if (auto iv = intervention_of(cfg)) cr.cell.intervention = *iv;
            }
        }
        cr.cell.config.seed = std::min(cr.cell.config.seed, s.seed);
        cr.runs.push_back(std::move(s));
    }
    std::vector<CellResult> out_cells;
    for (auto& [label, cr] : by_label) {
        std::sort(cr.runs.begin(), cr.runs.end(), [](const RunSummary& a, const RunSummary& b) { return a.seed < b.seed; });
        cr.cell.seeds = static_cast<int>(cr.runs.size());
        out_cells.push_back(std::move(cr));
    }
    // Grid order: q, then effort name order as first seen, then intervention.
    std::stable_sort(out_cells.begin(), out_cells.end(), [](const CellResult& a, const CellResult& b) {
        if (a.cell.q != b.cell.q) return a.cell.q < b.cell.q;
        return a.cell.intervention < b.cell.intervention;
    });
    return out_cells;
}

std::vector<MetricsReport> aggregate_results(std::span<const CellResult> cells) {
    std::vector<MetricsReport> reports;
    for (const auto& cr : cells) {
        std::vector<RunMetrics> runs;
        for (const auto& r : cr.runs) runs.push_back(r.metrics);
        const std::string label = parse_cell_label(cr.cell.label()) && cr.cell.effort.name != "custom"
                                      ? cr.cell.label()
                                      : run_label(cr.cell.config);
        reports.push_back(aggregate_runs(label, cr.cell.config.hash(), runs));
    }
    return reports;
}

void write_aggregate(std::span<const CellResult> cells, const OutputLayout& out) {
    const auto reports = aggregate_results(cells);
    std::ostringstream csv;
    write_report_csv(reports, csv);
    write_file(out.aggregate() / "report.csv", csv.str());

    json jcells = json::array();
    json warnings = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const CellResult& cr = cells[i];
        json cfg = json::object();
        for (const auto& [k, v] : config_entries(cr.cell.config)) cfg[k] = v;
        json seeds = json::array();
        for (const auto& r : cr.runs) seeds.push_back(r.seed);
        jcells.push_back({{"label", reports[i].label},
                          {"config_hash", hash_hex(reports[i].config_hash)},
                          {"config", cfg},
                          {"seeds", seeds},
                          {"failures", cr.failures}});
        for (const auto& f : cr.failures) warnings.push_back(reports[i].label + ": " + f);
    }
    // Values that were recalibrated away from the untuned starting point, so
    // every table can be traced to them.
    const SimulationConfig defaults;
    json calibration{{"population.sigma", format_real(defaults.population.sigma)},
                     {"effort_scale", format_real(defaults.effort_scale)},
                     {"population.e_a", format_real(defaults.population.e_a)},
                     {"population.e_d", format_real(defaults.population.e_d)},
                     {"effort_conditions", format_effort_conditions(default_effort_conditions())}};
    const json manifest{{"build_id", build_id()},
                        {"report", "report.csv"},
                        {"calibration", calibration},
                        {"cells", jcells},
                        {"warnings", warnings}};
    write_file(out.aggregate() / "manifest.json", manifest.dump(2) + "\n");
}

// ---- tables -----------------------------------------------------------------------

std::optional<std::size_t> best_index(std::span<const std::optional<double>> values, double fair) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) continue;
        if (!best || std::abs(*values[i] - fair) < std::abs(*values[*best] - fair)) best = i;
    }
    return best;
}

RenderedTable render_table(std::span<const MetricsReport> reports) {
    struct Row {
        std::string effort;
        double q = 0.0;
        std::map<std::string, const MetricsReport*> by_iv;
    };
    std::vector<std::string> effort_order;
    std::set<std::string> iv_names;
    std::map<std::pair<std::string, double>, Row> rows;
    int seed_count = 0;
    for (const auto& rep : reports) {
        CellKey key{0.0, rep.label, "baseline"};
        if (auto parsed = parse_cell_label(rep.label)) key = *parsed;
        if (std::find(effort_order.begin(), effort_order.end(), key.effort) == effort_order.end()) {
            effort_order.push_back(key.effort);
        }
        iv_names.insert(key.intervention);
        Row& row = rows[{key.effort, key.q}];
        row.effort = key.effort;
        row.q = key.q;
        row.by_iv[key.intervention] = &rep;
        seed_count = std::max(seed_count, rep.seed_count);
    }
    const auto ivs = ordered_interventions(iv_names);

    std::ostringstream text;
    std::ostringstream csv;
    csv << "effort,q,intervention,retr_mean,retr_stderr,dttr_mean,dttr_stderr,retr_best,dttr_best\n";

    auto cell_width = [](const std::string& s) { return std::max<std::size_t>(s.size(), 18); };
    text << std::left << std::setw(10) << "effort" << std::setw(5) << "q";
    for (const char* metric : {"rETR", "dTTR"}) {
        for (const auto& iv : ivs) {
            const std::string head = std::string(metric) + " " + iv;
            text << std::setw(static_cast<int>(cell_width(head)) + 2) << head;
        }
    }
    text << '\n';

    for (const auto& effort : effort_order) {
        std::vector<const Row*> ordered;
        for (const auto& [key, row] : rows) {
            if (key.first == effort) ordered.push_back(&row);
        }
        for (const Row* row : ordered) {
            std::vector<std::optional<double>> retr(ivs.size()), dttr(ivs.size());
            std::vector<const AggregateStat*> rs(ivs.size(), nullptr), ds(ivs.size(), nullptr);
            for (std::size_t i = 0; i < ivs.size(); ++i) {
                const auto it = row->by_iv.find(ivs[i]);
                if (it == row->by_iv.end()) continue;
                rs[i] = it->second->find("retr");
                ds[i] = it->second->find("dttr");
                if (rs[i] && !rs[i]->missing()) retr[i] = rs[i]->mean;
                if (ds[i] && !ds[i]->missing()) dttr[i] = ds[i]->mean;
            }
            const auto best_r = best_index(retr, 1.0);
            const auto best_d = best_index(dttr, 0.0);

            text << std::left << std::setw(10) << row->effort << std::setw(5) << short_real(row->q);
            auto put = [&](const AggregateStat* s, bool best, const std::string& head) {
                std::ostringstream c;
                if (s == nullptr || s->missing()) {
                    c << "-";
                } else {
                    c << std::fixed << std::setprecision(3) << s->mean << " ± " << s->std_error << (best ? " *" : "");
                }
                // The ± sign is two bytes wide in UTF-8 but one column on screen.
                const int pad = static_cast<int>(cell_width(head)) + 2 + (c.str().find("±") != std::string::npos ? 1 : 0);
                text << std::setw(pad) << c.str();
            };
            for (std::size_t i = 0; i < ivs.size(); ++i) put(rs[i], best_r == i, "rETR " + ivs[i]);
            for (std::size_t i = 0; i < ivs.size(); ++i) put(ds[i], best_d == i, "dTTR " + ivs[i]);
            text << '\n';

            for (std::size_t i = 0; i < ivs.size(); ++i) {
                if (!row->by_iv.contains(ivs[i])) continue;
                csv << row->effort << ',' << short_real(row->q) << ',' << ivs[i] << ',' << stat_text(rs[i]) << ','
                    << stat_text(rs[i], true) << ',' << stat_text(ds[i]) << ',' << stat_text(ds[i], true) << ','
                    << (best_r == i ? "true" : "false") << ',' << (best_d == i ? "true" : "false") << '\n';
            }
        }
    }
    text << "\nCumulative from the first step to the horizon; mean ± standard error over " << seed_count
         << " seeds.\n"
         << "* best in row: rETR closest to 1 and dTTR closest to 0. Values below 1 (or 0) are disparities\n"
         << "  in the other direction, so distance from the fair point is used rather than the smallest value.\n";
    return {text.str(), csv.str()};
}

// ---- plot data -------------------------------------------------------------------

std::vector<fs::path> emit_plot_data(std::span<const CellResult> cells, std::span<const MetricsReport> reports,
                                     const fs::path& dir) {
    std::vector<fs::path> written;
    auto series = [&](const std::string& file, const std::string& metric) {
        std::ostringstream out;
        out << kEtrSeriesHeader << '\n';
        for (const auto& rep : reports) {
            const auto m = rep.values.find(metric);
            if (m == rep.values.end()) continue;
            for (Group g : kBothGroups) {
                const auto gs = m->second.find(std::string(to_string(g)));
                if (gs == m->second.end()) continue;
                for (const auto& [t, stat] : gs->second) {
                    out << rep.label << ',' << to_string(g) << ',' << t << ',' << stat_text(&stat) << ','
                        << stat_text(&stat, true) << '\n';
                }
            }
        }
        write_file(dir / file, out.str());
        written.push_back(dir / file);
    };
    series("etr_series.csv", "etr_running");
    series("etr_series_step.csv", "etr_step");

    std::ostringstream dist;
    dist << kDistributionHeader << '\n';
    for (const auto& cr : cells) {
        for (const auto& run : cr.runs) {
            for (const auto& s : run.successes) {
                dist << cr.cell.label() << ',' << run.seed << ',' << s.agent_id << ',' << to_string(s.group) << ','
                     << format_real(s.total_cost) << ',' << s.delta << '\n';
            }
        }
    }
    write_file(dir / "agent_distributions.csv", dist.str());
    written.push_back(dir / "agent_distributions.csv");

    int dimension = 2;
    for (const auto& cr : cells) {
        if (cr.cell.config.retraining == Retraining::GRR) {
            dimension = cr.cell.config.dimension;
            break;
        }
    }
    std::ostringstream weights;
    weights << "config,seed,timestep";
    for (int i = 0; i < dimension; ++i) weights << ",w" << i;
    weights << ",bias,skipped\n";
    for (const auto& cr : cells) {
        if (cr.cell.config.retraining != Retraining::GRR) continue;
        for (const auto& run : cr.runs) {
            for (const auto& h : run.scorer_history) {
                weights << cr.cell.label() << ',' << run.seed << ',' << h.timestep;
                for (double w : h.weights) weights << ',' << format_real(w);
                weights << ',' << format_real(h.bias) << ',' << (h.retrain_skipped ? "true" : "false") << '\n';
            }
        }
    }
    write_file(dir / "grr_weights.csv", weights.str());
    written.push_back(dir / "grr_weights.csv");
    return written;
}

}  // namespace recsim
