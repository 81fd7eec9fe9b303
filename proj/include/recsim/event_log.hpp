#pragma once

#include "recsim/types.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace recsim {

/// One agent at one timestep. `features_after` is the post-adaptation position
/// (equal to `features_before` for winners); it is carried in the JSON-lines
/// form but not in the fixed-header CSV.
struct EventRecord {
    Timestep timestep = 0;
    AgentId agent_id = 0;
    Group group = Group::Advantaged;
    Features features_before;
    Features features_after;
    double score = 0.0;
    Outcome outcome = Outcome::Negative;
    double threshold = 0.0;
    std::optional<Features> recommendation;
    double moved_cost = 0.0;

    bool operator==(const EventRecord&) const = default;
};

struct ScorerSnapshot {
    Timestep timestep = 0;
    std::vector<double> weights;
    double bias = 0.0;
    /// Retraining skipped this step (single-class training set or missing group negatives).
    bool retrain_skipped = false;
};

/// Append-only record of a run. Holds the entry state of every agent so the
/// log alone is enough to rebuild all final agent states.
class EventLog {
public:
    EventLog() = default;
    explicit EventLog(SimulationConfig config);

    void register_agent(const Agent& entry_state);
    void append(EventRecord record);
    void append_scorer(ScorerSnapshot snapshot);
    void warn(std::string message);

    const SimulationConfig& config() const { return config_; }
    std::uint64_t config_hash() const { return config_hash_; }
    std::uint64_t seed() const { return config_.seed; }

    std::span<const EventRecord> records() const { return records_; }
    std::span<const Agent> roster() const { return roster_; }
    std::span<const ScorerSnapshot> scorer_history() const { return scorer_history_; }
    std::span<const std::string> warnings() const { return warnings_; }

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    /// Last timestep with any record, or -1.
    Timestep last_timestep() const;

private:
    SimulationConfig config_;
    std::uint64_t config_hash_ = 0;
    std::vector<Agent> roster_;
    std::vector<EventRecord> records_;
    std::vector<ScorerSnapshot> scorer_history_;
    std::vector<std::string> warnings_;
};

/// Validates the config, then returns an empty log tagged with its hash.
EventLog new_event_log(const SimulationConfig& config);

/// Rebuilds every agent's final state from the roster plus the records.
std::map<AgentId, Agent> replay(const EventLog& log);

const char* build_id();

inline constexpr const char* kEventCsvHeader =
    "timestep,agent_id,group,f0,f1,score,outcome,threshold,rec0,rec1,moved_cost";

void write_events_csv(const EventLog& log, std::ostream& out);
void write_events_jsonl(const EventLog& log, std::ostream& out);
void write_agents_csv(const EventLog& log, std::ostream& out);
/// JSON manifest: resolved config, hash, seed, build id, scorer history, warnings.
void write_manifest(const EventLog& log, std::ostream& out);

std::vector<EventRecord> read_events_csv(std::istream& in);
std::vector<EventRecord> read_events_jsonl(std::istream& in);

/// Loads a run directory written by `save_run` (manifest + events.csv + agents.csv).
EventLog load_run(const std::string& dir);
void save_run(const EventLog& log, const std::string& dir);

}  // namespace recsim
