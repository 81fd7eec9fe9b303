#include "recsim/event_log.hpp"

#include "recsim/config_io.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#ifndef RECSIM_BUILD_ID
#define RECSIM_BUILD_ID "dev"
#endif

namespace recsim {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void write_features(std::ostream& out, const Features& f, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i) {
        out << ',';
        if (i < f.size()) out << format_real(f[i]);
    }
}

json record_to_json(const EventRecord& r) {
    json j{{"timestep", r.timestep},
           {"agent_id", r.agent_id},
           {"group", to_string(r.group)},
           {"features_before", r.features_before},
           {"features_after", r.features_after},
           {"score", r.score},
           {"outcome", to_string(r.outcome)},
           {"threshold", r.threshold},
           {"moved_cost", r.moved_cost}};
    j["recommendation"] = r.recommendation ? json(*r.recommendation) : json(nullptr);
    return j;
}

EventRecord record_from_json(const json& j) {
    EventRecord r;
    r.timestep = j.at("timestep").get<Timestep>();
    r.agent_id = j.at("agent_id").get<AgentId>();
    r.group = parse_group(j.at("group").get<std::string>());
    r.features_before = j.at("features_before").get<Features>();
    r.features_after = j.at("features_after").get<Features>();
    r.score = j.at("score").get<double>();
    r.outcome = parse_outcome(j.at("outcome").get<std::string>());
    r.threshold = j.at("threshold").get<double>();
    r.moved_cost = j.at("moved_cost").get<double>();
    if (!j.at("recommendation").is_null()) r.recommendation = j.at("recommendation").get<Features>();
    return r;
}

}  // namespace

const char* build_id() { return RECSIM_BUILD_ID; }

EventLog::EventLog(SimulationConfig config)
    : config_(std::move(config)), config_hash_(config_.hash()) {}

void EventLog::register_agent(const Agent& entry_state) { roster_.push_back(entry_state); }
void EventLog::append(EventRecord record) { records_.push_back(std::move(record)); }
void EventLog::append_scorer(ScorerSnapshot snapshot) { scorer_history_.push_back(std::move(snapshot)); }
void EventLog::warn(std::string message) { warnings_.push_back(std::move(message)); }

Timestep EventLog::last_timestep() const { return records_.empty() ? -1 : records_.back().timestep; }

EventLog new_event_log(const SimulationConfig& config) {
    config.validate();
    return EventLog(config);
}

std::map<AgentId, Agent> replay(const EventLog& log) {
    std::map<AgentId, Agent> agents;
    for (const Agent& a : log.roster()) agents.emplace(a.id, a);
    for (const EventRecord& r : log.records()) {
        auto it = agents.find(r.agent_id);
        if (it == agents.end()) throw std::runtime_error("replay: record for unknown agent " + std::to_string(r.agent_id));
        Agent& a = it->second;
        if (r.outcome == Outcome::Positive) {
            a.exit_time = r.timestep;
            continue;
        }
        if (!a.first_negative_time) a.first_negative_time = r.timestep;
        a.features = r.features_after;
        a.cumulative_cost += r.moved_cost;
    }
    return agents;
}

void write_events_csv(const EventLog& log, std::ostream& out) {
    const auto dim = static_cast<std::size_t>(log.config().dimension);
    if (dim == 2) {
        out << kEventCsvHeader << '\n';
    } else {
        out << "timestep,agent_id,group";
        for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
        out << ",score,outcome,threshold";
        for (std::size_t i = 0; i < dim; ++i) out << ",rec" << i;
        out << ",moved_cost\n";
    }
    for (const EventRecord& r : log.records()) {
        out << r.timestep << ',' << r.agent_id << ',' << to_string(r.group);
        write_features(out, r.features_before, dim);
        out << ',' << format_real(r.score) << ',' << to_string(r.outcome) << ','
            << format_real(r.threshold);
        write_features(out, r.recommendation.value_or(Features{}), dim);
        out << ',' << format_real(r.moved_cost) << '\n';
    }
}

void write_events_jsonl(const EventLog& log, std::ostream& out) {
    for (const EventRecord& r : log.records()) out << record_to_json(r).dump() << '\n';
}

void write_agents_csv(const EventLog& log, std::ostream& out) {
    out << "agent_id,group,entry_time,effort_mean,features\n";
    for (const Agent& a : log.roster()) {
        out << a.id << ',' << to_string(a.group) << ',' << a.entry_time << ','
            << format_real(a.effort_mean) << ',';
        for (std::size_t i = 0; i < a.features.size(); ++i) {
            if (i) out << ' ';
            out << format_real(a.features[i]);
        }
        out << '\n';
    }
}

void write_manifest(const EventLog& log, std::ostream& out) {
    json cfg = json::object();
    for (const auto& [k, v] : config_entries(log.config())) cfg[k] = v;
    json scorers = json::array();
    for (const auto& s : log.scorer_history()) {
        scorers.push_back({{"timestep", s.timestep},
                           {"weights", s.weights},
                           {"bias", s.bias},
                           {"retrain_skipped", s.retrain_skipped}});
    }
    json m{{"config", cfg},
           {"config_hash", hash_hex(log.config_hash())},
           {"seed", log.seed()},
           {"build_id", build_id()},
           {"records", log.size()},
           {"agents", log.roster().size()},
           {"scorer_history", scorers},
           {"warnings", log.warnings()}};
    out << m.dump(2) << '\n';
}

std::vector<EventRecord> read_events_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("events csv: missing header");
    const auto header = split_csv_line(line);
    std::size_t dim = 0;
    while (3 + dim < header.size() && header[3 + dim].starts_with("f")) ++dim;
    const std::size_t expected = 3 + dim + 3 + dim + 1;
    if (header.size() != expected) throw std::runtime_error("events csv: unexpected header");

    std::vector<EventRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != expected) throw std::runtime_error("events csv: malformed row: " + line);
        EventRecord r;
        std::size_t c = 0;
        r.timestep = static_cast<Timestep>(parse_integer(cells[c++], "timestep"));
        r.agent_id = parse_integer(cells[c++], "agent_id");
        r.group = parse_group(cells[c++]);
        for (std::size_t i = 0; i < dim; ++i) r.features_before.push_back(parse_real(cells[c++], "f"));
        r.score = parse_real(cells[c++], "score");
        r.outcome = parse_outcome(cells[c++]);
        r.threshold = parse_real(cells[c++], "threshold");
        if (!cells[c].empty()) {
            Features rec;
            for (std::size_t i = 0; i < dim; ++i) rec.push_back(parse_real(cells[c + i], "rec"));
            r.recommendation = std::move(rec);
        }
        c += dim;
        r.moved_cost = parse_real(cells[c], "moved_cost");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<EventRecord> read_events_jsonl(std::istream& in) {
    std::vector<EventRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(record_from_json(json::parse(line)));
    }
    return out;
}

void save_run(const EventLog& log, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream f(fs::path(dir) / "events.csv");
        write_events_csv(log, f);
    }
    {
        std::ofstream f(fs::path(dir) / "events.jsonl");
        write_events_jsonl(log, f);
    }
    {
        std::ofstream f(fs::path(dir) / "agents.csv");
        write_agents_csv(log, f);
    }
    // Manifest last: its presence marks the directory complete.
    std::ofstream f(fs::path(dir) / "manifest.json");
    write_manifest(log, f);
}

EventLog load_run(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw std::runtime_error("no manifest.json in " + dir);
    const json m = json::parse(mf);

    SimulationConfig cfg;
    for (const auto& [k, v] : m.at("config").items()) apply_setting(cfg, k, v.get<std::string>());
    EventLog log(cfg);

    std::ifstream af(fs::path(dir) / "agents.csv");
    std::string line;
    std::getline(af, line);
    while (std::getline(af, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 5) throw std::runtime_error("agents csv: malformed row: " + line);
        Agent a;
        a.id = parse_integer(cells[0], "agent_id");
        a.group = parse_group(cells[1]);
        a.entry_time = static_cast<Timestep>(parse_integer(cells[2], "entry_time"));
        a.effort_mean = parse_real(cells[3], "effort_mean");
        std::stringstream fs_(cells[4]);
        std::string v;
        while (fs_ >> v) a.features.push_back(parse_real(v, "features"));
        log.register_agent(a);
    }

    std::vector<EventRecord> records;
    if (std::ifstream jf(fs::path(dir) / "events.jsonl"); jf) {
        records = read_events_jsonl(jf);
    } else {
        std::ifstream cf(fs::path(dir) / "events.csv");
        if (!cf) throw std::runtime_error("no events file in " + dir);
        records = read_events_csv(cf);
    }
    for (auto& r : records) log.append(std::move(r));

    for (const auto& s : m.at("scorer_history")) {
        log.append_scorer({s.at("timestep").get<Timestep>(), s.at("weights").get<std::vector<double>>(),
                           s.at("bias").get<double>(), s.at("retrain_skipped").get<bool>()});
    }
    for (const auto& w : m.at("warnings")) log.warn(w.get<std::string>());
    return log;
}

}  // namespace recsim
