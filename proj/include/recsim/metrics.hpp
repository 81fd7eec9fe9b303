#pragma once

#include "recsim/event_log.hpp"
#include "recsim/types.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace recsim {

/// A missing value ("no data") is an empty optional, never zero.
using MaybeReal = std::optional<double>;

struct SuccessRecord {
    AgentId agent_id = 0;
    Group group = Group::Advantaged;
    Timestep o_minus = 0;
    Timestep o_plus = 0;
    int delta = 0;
    double total_cost = 0.0;
};

/// Per-agent view of a log, built in one pass. Costs are accumulated in
/// timestep order, so every sum below matches a naive rescan bit for bit.
class LogIndex {
public:
    explicit LogIndex(std::span<const EventRecord> records);
    explicit LogIndex(const EventLog& log) : LogIndex(log.records()) {}

    struct Track {
        AgentId id = 0;
        Group group = Group::Advantaged;
        std::optional<Timestep> first_negative;
        std::optional<Timestep> positive_at;
        std::vector<Timestep> move_times;
        /// prefix_cost[i] = moved_cost summed over the first i rows.
        std::vector<double> prefix_cost;
    };

    /// Tracks in ascending agent id.
    std::span<const Track> tracks() const { return tracks_; }
    const Track* find(AgentId id) const;

    /// Rows with timestep == t, by outcome and group.
    int actives(Timestep t, Group g) const;
    int positives(Timestep t, Group g) const;
    Timestep last_timestep() const { return last_timestep_; }

    static double effort_before(const Track& track, Timestep t);

private:
    std::vector<Track> tracks_;
    std::map<Timestep, std::array<std::array<int, 2>, 2>> counts_;  // [t][group][positive?]
    Timestep last_timestep_ = -1;
};

/// Agents of `group` with a positive outcome at some step <= t that follows a
/// negative one, in ascending id. `exactly_at` restricts to o_plus == t.
std::vector<SuccessRecord> successful_set(const LogIndex& index, Group group, Timestep t,
                                          bool exactly_at = false);
std::vector<SuccessRecord> successful_set(const EventLog& log, Group group, Timestep t);

/// Sum of moved_cost over the agent's rows with timestep < t.
double effort_of(const EventLog& log, AgentId agent, Timestep t);

MaybeReal mean_cost(std::span<const SuccessRecord> s);
MaybeReal mean_delta(std::span<const SuccessRecord> s);

MaybeReal etr(const EventLog& log, Group group, Timestep t);
MaybeReal retr(const EventLog& log, Timestep t);
MaybeReal ttr(const EventLog& log, Group group, Timestep t);
MaybeReal dttr(const EventLog& log, Timestep t);

/// (positives_d / actives_d) / (positives_a / actives_a) at step t.
MaybeReal demographic_parity(const LogIndex& index, Timestep t);
MaybeReal demographic_parity(const EventLog& log, Timestep t);

/// Mean effort (rows < t) of agents with a negative and no positive by t.
MaybeReal wasted_effort(const LogIndex& index, Group group, Timestep t);
MaybeReal wasted_effort(const EventLog& log, Group group, Timestep t);

MaybeReal ratio(MaybeReal numerator, MaybeReal denominator);
MaybeReal difference(MaybeReal minuend, MaybeReal subtrahend);

struct GroupPair {
    MaybeReal advantaged;
    MaybeReal disadvantaged;
    MaybeReal& operator[](Group g) { return g == Group::Advantaged ? advantaged : disadvantaged; }
    const MaybeReal& operator[](Group g) const { return g == Group::Advantaged ? advantaged : disadvantaged; }
};

/// Metrics at one evaluation point.
struct MetricPoint {
    GroupPair etr;
    GroupPair ttr;
    GroupPair wasted;
    MaybeReal retr;
    MaybeReal dttr;
    std::array<int, 2> successes{0, 0};
};

/// Everything the reports need from one run.
struct RunMetrics {
    int horizon = 0;
    /// Successes exactly at t (per-step reading).
    std::vector<MetricPoint> per_step;
    /// Successes at any step <= t (running cumulative reading).
    std::vector<MetricPoint> running;
    std::vector<MaybeReal> dp;
    /// Cumulative from the first step to the horizon.
    MetricPoint cumulative;
    /// Mean of the available per-step DP values.
    MaybeReal dp_mean;
};

RunMetrics compute_run_metrics(const EventLog& log);

/// Mean and standard error over the non-missing values.
struct AggregateStat {
    double mean = 0.0;
    double std_error = 0.0;
    int n = 0;
    bool missing() const { return n == 0; }
};

AggregateStat aggregate(std::span<const MaybeReal> values);

/// Seed-aggregated report for one grid cell.
struct MetricsReport {
    std::string label;
    std::uint64_t config_hash = 0;
    int seed_count = 0;
    /// metric name -> group ("all" for ratios) -> timestep (-1 = cumulative) -> stat
    std::map<std::string, std::map<std::string, std::map<int, AggregateStat>>> values;

    const AggregateStat* find(const std::string& metric, const std::string& group = "all",
                              int timestep = -1) const;
};

MetricsReport aggregate_runs(const std::string& label, std::uint64_t config_hash,
                             std::span<const RunMetrics> runs);

/// Long-format CSV: config,seed_count,metric,group,timestep,mean,stderr.
void write_report_csv(std::span<const MetricsReport> reports, std::ostream& out);
std::vector<MetricsReport> read_report_csv(std::istream& in);

/// 80%-rule band for rETR.
bool retr_within_tolerance(double value);

struct Proposition1Comparison {
    double retr_first = 0.0;
    double retr_second = 0.0;
    double retr_ratio = 0.0;
    /// (e_d/e_a of first) / (e_d/e_a of second)
    double effort_ratio = 0.0;
    /// rETR orders the two configurations the same way e_d/e_a does.
    bool ordering_consistent = false;
};

/// Compares rETR across two configurations that differ only in (e_a, e_d).
/// Throws std::invalid_argument if anything else differs or rETR is missing.
Proposition1Comparison proposition1_diagnostic(const SimulationConfig& first, MaybeReal retr_first,
                                               const SimulationConfig& second, MaybeReal retr_second);

}  // namespace recsim
