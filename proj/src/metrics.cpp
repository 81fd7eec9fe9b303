#include "recsim/metrics.hpp"

#include "recsim/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace recsim {

namespace {

constexpr Group kGroups[] = {Group::Advantaged, Group::Disadvantaged};

constexpr std::size_t gi(Group g) { return static_cast<std::size_t>(g); }

std::string cell_text(const AggregateStat& s, double v) {
    return s.missing() ? std::string("NA") : format_real(v);
}

}  // namespace

LogIndex::LogIndex(std::span<const EventRecord> records) {
    std::unordered_map<AgentId, std::size_t> slot;
    for (const EventRecord& r : records) {
        auto [it, inserted] = slot.try_emplace(r.agent_id, tracks_.size());
        if (inserted) {
            Track t;
            t.id = r.agent_id;
            t.group = r.group;
            t.prefix_cost.push_back(0.0);
            tracks_.push_back(std::move(t));
        }
        Track& track = tracks_[it->second];
        if (r.outcome == Outcome::Negative) {
            if (!track.first_negative) track.first_negative = r.timestep;
        } else if (!track.positive_at) {
            track.positive_at = r.timestep;
        }
        track.move_times.push_back(r.timestep);
        track.prefix_cost.push_back(track.prefix_cost.back() + r.moved_cost);

        auto& c = counts_[r.timestep];
        ++c[gi(r.group)][r.outcome == Outcome::Positive ? 1 : 0];
        last_timestep_ = std::max(last_timestep_, r.timestep);
    }
    std::sort(tracks_.begin(), tracks_.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
}

const LogIndex::Track* LogIndex::find(AgentId id) const {
    auto it = std::lower_bound(tracks_.begin(), tracks_.end(), id,
                               [](const Track& t, AgentId v) { return t.id < v; });
    return it != tracks_.end() && it->id == id ? &*it : nullptr;
}

int LogIndex::actives(Timestep t, Group g) const {
    auto it = counts_.find(t);
    if (it == counts_.end()) return 0;
    const auto& c = it->second[gi(g)];
    return c[0] + c[1];
}

int LogIndex::positives(Timestep t, Group g) const {
    auto it = counts_.find(t);
    return it == counts_.end() ? 0 : it->second[gi(g)][1];
}

double LogIndex::effort_before(const Track& track, Timestep t) {
    const auto n = std::lower_bound(track.move_times.begin(), track.move_times.end(), t) -
                   track.move_times.begin();
    return track.prefix_cost[static_cast<std::size_t>(n)];
}

std::vector<SuccessRecord> successful_set(const LogIndex& index, Group group, Timestep t, bool exactly_at) {
    std::vector<SuccessRecord> out;
    for (const auto& track : index.tracks()) {
        if (track.group != group || !track.positive_at || !track.first_negative) continue;
        const Timestep plus = *track.positive_at;
        const Timestep minus = *track.first_negative;
        if (minus >= plus) continue;
        if (exactly_at ? plus != t : plus > t) continue;
        out.push_back({track.id, group, minus, plus, plus - minus, LogIndex::effort_before(track, plus)});
    }
    return out;
}

std::vector<SuccessRecord> successful_set(const EventLog& log, Group group, Timestep t) {
    return successful_set(LogIndex(log), group, t);
}

double effort_of(const EventLog& log, AgentId agent, Timestep t) {
    const LogIndex index(log);
    const auto* track = index.find(agent);
    if (!track) throw std::invalid_argument("effort_of: unknown agent " + std::to_string(agent));
    return LogIndex::effort_before(*track, t);
}

MaybeReal mean_cost(std::span<const SuccessRecord> s) {
    if (s.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& r : s) sum += r.total_cost;
    return sum / static_cast<double>(s.size());
}

MaybeReal mean_delta(std::span<const SuccessRecord> s) {
    if (s.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& r : s) sum += r.delta;
    return sum / static_cast<double>(s.size());
}

MaybeReal ratio(MaybeReal num, MaybeReal den) {
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
}

MaybeReal difference(MaybeReal a, MaybeReal b) {
    if (!a || !b) return std::nullopt;
    return *a - *b;
}

MaybeReal etr(const EventLog& log, Group group, Timestep t) {
    return mean_cost(successful_set(log, group, t));
}

MaybeReal retr(const EventLog& log, Timestep t) {
    const LogIndex index(log);
    return ratio(mean_cost(successful_set(index, Group::Disadvantaged, t)),
                 mean_cost(successful_set(index, Group::Advantaged, t)));
}

MaybeReal ttr(const EventLog& log, Group group, Timestep t) {
    return mean_delta(successful_set(log, group, t));
}

MaybeReal dttr(const EventLog& log, Timestep t) {
    const LogIndex index(log);
    return difference(mean_delta(successful_set(index, Group::Disadvantaged, t)),
                      mean_delta(successful_set(index, Group::Advantaged, t)));
}

MaybeReal demographic_parity(const LogIndex& index, Timestep t) {
    const int act_a = index.actives(t, Group::Advantaged);
    const int act_d = index.actives(t, Group::Disadvantaged);
    if (act_a == 0 || act_d == 0) return std::nullopt;
    const double rate_a = static_cast<double>(index.positives(t, Group::Advantaged)) / act_a;
    const double rate_d = static_cast<double>(index.positives(t, Group::Disadvantaged)) / act_d;
    if (rate_a == 0.0) return std::nullopt;
    return rate_d / rate_a;
}

MaybeReal demographic_parity(const EventLog& log, Timestep t) { return demographic_parity(LogIndex(log), t); }

MaybeReal wasted_effort(const LogIndex& index, Group group, Timestep t) {
    double sum = 0.0;
    int n = 0;
    for (const auto& track : index.tracks()) {
        if (track.group != group || !track.first_negative || *track.first_negative > t) continue;
        if (track.positive_at && *track.positive_at <= t) continue;
        sum += LogIndex::effort_before(track, t);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

MaybeReal wasted_effort(const EventLog& log, Group group, Timestep t) {
    return wasted_effort(LogIndex(log), group, t);
}

namespace {

MetricPoint evaluate(const LogIndex& index, Timestep t, bool exactly_at) {
    MetricPoint p;
    for (Group g : kGroups) {
        const auto s = successful_set(index, g, t, exactly_at);
        p.etr[g] = mean_cost(s);
        p.ttr[g] = mean_delta(s);
        p.successes[static_cast<std::size_t>(g)] = static_cast<int>(s.size());
        p.wasted[g] = wasted_effort(index, g, t);
    }
    p.retr = ratio(p.etr.disadvantaged, p.etr.advantaged);
    p.dttr = difference(p.ttr.disadvantaged, p.ttr.advantaged);
    return p;
}

}  // namespace

RunMetrics compute_run_metrics(const EventLog& log) {
    const LogIndex index(log);
    RunMetrics m;
    m.horizon = log.config().horizon;
    for (Timestep t = 0; t < m.horizon; ++t) {
        m.per_step.push_back(evaluate(index, t, true));
        m.running.push_back(evaluate(index, t, false));
        m.dp.push_back(demographic_parity(index, t));
    }
    m.cumulative = evaluate(index, m.horizon, false);
    const AggregateStat dp = aggregate(m.dp);
    if (!dp.missing()) m.dp_mean = dp.mean;
    return m;
}

AggregateStat aggregate(std::span<const MaybeReal> values) {
    AggregateStat s;
    double sum = 0.0;
    for (const auto& v : values) {
        if (!v) continue;
        sum += *v;
        ++s.n;
    }
    if (s.n == 0) return s;
    s.mean = sum / s.n;
    if (s.n > 1) {
        double ss = 0.0;
        for (const auto& v : values) {
            if (v) ss += (*v - s.mean) * (*v - s.mean);
        }
        s.std_error = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

const AggregateStat* MetricsReport::find(const std::string& metric, const std::string& group,
                                         int timestep) const {
    auto m = values.find(metric);
    if (m == values.end()) return nullptr;
    auto g = m->second.find(group);
    if (g == m->second.end()) return nullptr;
    auto t = g->second.find(timestep);
    return t == g->second.end() ? nullptr : &t->second;
}

MetricsReport aggregate_runs(const std::string& label, std::uint64_t config_hash,
                             std::span<const RunMetrics> runs) {
    MetricsReport report;
    report.label = label;
    report.config_hash = config_hash;
    report.seed_count = static_cast<int>(runs.size());

    auto put = [&](const std::string& metric, const std::string& group, int t, auto&& pick) {
        std::vector<MaybeReal> vals;
        vals.reserve(runs.size());
        for (const RunMetrics& r : runs) vals.push_back(pick(r));
        report.values[metric][group][t] = aggregate(vals);
    };
    auto put_point = [&](const std::string& suffix, int t, auto&& point_of) {
        for (Group g : kGroups) {
            const std::string gname(to_string(g));
            put("etr" + suffix, gname, t, [&](const RunMetrics& r) { return point_of(r).etr[g]; });
            put("ttr" + suffix, gname, t, [&](const RunMetrics& r) { return point_of(r).ttr[g]; });
            put("wasted_effort" + suffix, gname, t, [&](const RunMetrics& r) { return point_of(r).wasted[g]; });
            put("successes" + suffix, gname, t, [&](const RunMetrics& r) {
                return MaybeReal(point_of(r).successes[static_cast<std::size_t>(g)]);
            });
        }
        put("retr" + suffix, "all", t, [&](const RunMetrics& r) { return point_of(r).retr; });
        put("dttr" + suffix, "all", t, [&](const RunMetrics& r) { return point_of(r).dttr; });
    };

    put_point("", -1, [](const RunMetrics& r) -> const MetricPoint& { return r.cumulative; });
    put("dp", "all", -1, [](const RunMetrics& r) { return r.dp_mean; });

    const int horizon = runs.empty() ? 0 : runs.front().horizon;
    for (int t = 0; t < horizon; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        put_point("_step", t, [ut](const RunMetrics& r) -> const MetricPoint& { return r.per_step.at(ut); });
        put_point("_running", t, [ut](const RunMetrics& r) -> const MetricPoint& { return r.running.at(ut); });
        put("dp", "all", t, [ut](const RunMetrics& r) { return r.dp.at(ut); });
    }
    return report;
}

void write_report_csv(std::span<const MetricsReport> reports, std::ostream& out) {
    out << "config,seed_count,metric,group,timestep,mean,stderr\n";
    for (const auto& rep : reports) {
        for (const auto& [metric, groups] : rep.values) {
            for (const auto& [group, steps] : groups) {
                for (const auto& [t, stat] : steps) {
                    out << rep.label << ',' << rep.seed_count << ',' << metric << ',' << group << ','
                        << (t < 0 ? std::string("cumulative") : std::to_string(t)) << ','
                        << cell_text(stat, stat.mean) << ',' << cell_text(stat, stat.std_error) << '\n';
                }
            }
        }
    }
}

std::vector<MetricsReport> read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "config,seed_count,metric,group,timestep,mean,stderr") {
        throw std::runtime_error("report csv: unexpected header");
    }
    std::vector<MetricsReport> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> c;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) c.push_back(cell);
        if (c.size() != 7) throw std::runtime_error("report csv: malformed row: " + line);
        if (out.empty() || out.back().label != c[0]) {
            out.emplace_back();
            out.back().label = c[0];
            out.back().seed_count = static_cast<int>(parse_integer(c[1], "seed_count"));
        }
        AggregateStat s;
        if (c[5] != "NA") {
            s.mean = parse_real(c[5], "mean");
            s.std_error = parse_real(c[6], "stderr");
            s.n = out.back().seed_count;
        }
        const int t = c[4] == "cumulative" ? -1 : static_cast<int>(parse_integer(c[4], "timestep"));
        out.back().values[c[2]][c[3]][t] = s;
    }
    return out;
}

bool retr_within_tolerance(double value) { return value >= 0.8 && value <= 1.2; }

Proposition1Comparison proposition1_diagnostic(const SimulationConfig& first, MaybeReal retr_first,
                                               const SimulationConfig& second, MaybeReal retr_second) {
    SimulationConfig a = first, b = second;
    a.population.e_a = b.population.e_a = 0.0;
    a.population.e_d = b.population.e_d = 0.0;
    a.seed = b.seed = 0;
    if (a.canonical_text() != b.canonical_text()) {
        throw std::invalid_argument("proposition1_diagnostic: configurations differ beyond (e_a, e_d)");
    }
    if (!retr_first || !retr_second) throw std::invalid_argument("proposition1_diagnostic: missing rETR");
    if (first.population.e_a <= 0.0 || second.population.e_a <= 0.0) {
        throw std::invalid_argument("proposition1_diagnostic: e_a must be positive");
    }

    Proposition1Comparison c;
    c.retr_first = *retr_first;
    c.retr_second = *retr_second;
    c.retr_ratio = *retr_first / *retr_second;
    const double ratio_first = first.population.e_d / first.population.e_a;
    const double ratio_second = second.population.e_d / second.population.e_a;
    c.effort_ratio = ratio_first / ratio_second;
    c.ordering_consistent = (ratio_first < ratio_second && c.retr_first < c.retr_second) ||
                            (ratio_first > ratio_second && c.retr_first > c.retr_second) ||
                            (ratio_first == ratio_second);
    return c;
}

}  // namespace recsim
