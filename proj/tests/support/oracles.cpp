#include "oracles.hpp"

#include "recsim/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace recsim::testing {

double normal_pdf(double x, double mean, double stddev) {
    const double z = (x - mean) / stddev;
    return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mean, double stddev) {
    return 0.5 * std::erfc(-(x - mean) / (stddev * std::numbers::sqrt2));
}

double folded_normal_mean_integral(double mean, double stddev) {
    const double lo = std::min(mean - 12.0 * stddev, 0.0);
    const double hi = std::max(mean + 12.0 * stddev, 0.0);
    // Split at the kink of |z| so each panel integrates a smooth function.
    auto f = [&](double z) { return std::abs(z) * normal_pdf(z, mean, stddev); };
    return simpson(f, lo, 0.0) + simpson(f, 0.0, hi);
}

double clamped_normal_mean_integral(double mean, double stddev) {
    // Mass below 0 contributes 0, mass above 1 contributes 1.
    const double inside = simpson([&](double x) { return x * normal_pdf(x, mean, stddev); }, 0.0, 1.0);
    return inside + (1.0 - normal_cdf(1.0, mean, stddev));
}

GridOracleResult grid_recourse_oracle(const LinearScorer& scorer, std::span<const double> x, double threshold,
                                      double resolution) {
    const int n = static_cast<int>(std::lround(1.0 / resolution));
    const double w1 = scorer.weights.at(1);
    GridOracleResult best;
    auto feasible = [&](int i, int j) {
        const double p[2] = {i * resolution, j * resolution};
        return scorer.score(p) >= threshold;
    };
    auto consider = [&](int i, int j) {
        const double p0 = i * resolution, p1 = j * resolution;
        const double c = std::hypot(p0 - x[0], p1 - x[1]);
        if (!best.feasible || c < best.cost) best = {true, c, p0, p1};
    };
    const int target_j = std::clamp(static_cast<int>(std::lround(x[1] / resolution)), 0, n);
    for (int i = 0; i <= n; ++i) {
        // Feasible rows of this column form an interval [lo, hi] because the
        // score is monotone in the second coordinate.
        int lo = 0, hi = n;
        if (w1 > 0.0) {
            if (!feasible(i, n)) continue;
            const double need = (threshold - scorer.bias - scorer.weights[0] * i * resolution) / w1;
            lo = std::clamp(static_cast<int>(std::ceil(need / resolution)), 0, n);
            while (lo > 0 && feasible(i, lo - 1)) --lo;
            while (!feasible(i, lo)) ++lo;
        } else if (w1 < 0.0) {
            if (!feasible(i, 0)) continue;
            const double need = (threshold - scorer.bias - scorer.weights[0] * i * resolution) / w1;
            hi = std::clamp(static_cast<int>(std::floor(need / resolution)), 0, n);
            while (hi < n && feasible(i, hi + 1)) ++hi;
            while (!feasible(i, hi)) --hi;
        } else if (!feasible(i, 0)) {
            continue;
        }
        consider(i, std::clamp(target_j, lo, hi));
    }
    return best;
}

namespace {

struct NaiveAgent {
    std::optional<Timestep> first_negative;
    std::optional<Timestep> positive_at;
    Group group = Group::Advantaged;
};

std::map<AgentId, NaiveAgent> naive_agents(std::span<const EventRecord> records) {
    std::map<AgentId, NaiveAgent> out;
    for (const EventRecord& r : records) {
        NaiveAgent& a = out[r.agent_id];
        a.group = r.group;
        auto& slot = r.outcome == Outcome::Negative ? a.first_negative : a.positive_at;
        if (!slot || r.timestep < *slot) slot = r.timestep;
    }
    return out;
}

double naive_effort(std::span<const EventRecord> records, AgentId id, Timestep t) {
    double sum = 0.0;
    for (const EventRecord& r : records) {
        if (r.agent_id == id && r.timestep < t) sum += r.moved_cost;
    }
    return sum;
}

MaybeReal naive_mean(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

MetricPoint naive_point(std::span<const EventRecord> records, const std::map<AgentId, NaiveAgent>& agents,
                        Timestep t, bool exactly_at) {
    MetricPoint p;
    for (Group g : {Group::Advantaged, Group::Disadvantaged}) {
        const auto s = naive_successes(records, g, t, exactly_at);
        std::vector<double> costs, deltas, wasted;
        for (const auto& r : s) {
            costs.push_back(r.total_cost);
            deltas.push_back(r.delta);
        }
        for (const auto& [id, a] : agents) {
            if (a.group != g || !a.first_negative || *a.first_negative > t) continue;
            if (a.positive_at && *a.positive_at <= t) continue;
            wasted.push_back(naive_effort(records, id, t));
        }
        p.etr[g] = naive_mean(costs);
        p.ttr[g] = naive_mean(deltas);
        p.wasted[g] = naive_mean(wasted);
        p.successes[static_cast<std::size_t>(g)] = static_cast<int>(s.size());
    }
    if (p.etr.disadvantaged && p.etr.advantaged && *p.etr.advantaged != 0.0) {
        p.retr = *p.etr.disadvantaged / *p.etr.advantaged;
    }
    if (p.ttr.disadvantaged && p.ttr.advantaged) p.dttr = *p.ttr.disadvantaged - *p.ttr.advantaged;
    return p;
}

}  // namespace

std::vector<SuccessRecord> naive_successes(std::span<const EventRecord> records, Group group, Timestep t,
                                           bool exactly_at) {
    std::vector<SuccessRecord> out;
    for (const auto& [id, a] : naive_agents(records)) {
        if (a.group != group || !a.first_negative || !a.positive_at) continue;
        if (*a.first_negative >= *a.positive_at) continue;
        if (exactly_at ? *a.positive_at != t : *a.positive_at > t) continue;
        out.push_back({id, group, *a.first_negative, *a.positive_at, *a.positive_at - *a.first_negative,
                       naive_effort(records, id, *a.positive_at)});
    }
    return out;
}

RunMetrics naive_run_metrics(std::span<const EventRecord> records, int horizon) {
    const auto agents = naive_agents(records);
    RunMetrics m;
    m.horizon = horizon;
    std::vector<double> dps;
    for (Timestep t = 0; t < horizon; ++t) {
        m.per_step.push_back(naive_point(records, agents, t, true));
        m.running.push_back(naive_point(records, agents, t, false));
        int act[2] = {0, 0}, pos[2] = {0, 0};
        for (const EventRecord& r : records) {
            if (r.timestep != t) continue;
            ++act[static_cast<int>(r.group)];
            if (r.outcome == Outcome::Positive) ++pos[static_cast<int>(r.group)];
        }
        MaybeReal dp;
        if (act[0] > 0 && act[1] > 0 && pos[0] > 0) {
            dp = (static_cast<double>(pos[1]) / act[1]) / (static_cast<double>(pos[0]) / act[0]);
            dps.push_back(*dp);
        }
        m.dp.push_back(dp);
    }
    m.cumulative = naive_point(records, agents, horizon, false);
    m.dp_mean = naive_mean(dps);
    return m;
}

double feature_diff_effort(std::span<const EventRecord> records, AgentId agent, Timestep t) {
    std::vector<const EventRecord*> rows;
    for (const EventRecord& r : records) {
        if (r.agent_id == agent) rows.push_back(&r);
    }
    std::sort(rows.begin(), rows.end(),
              [](const EventRecord* a, const EventRecord* b) { return a->timestep < b->timestep; });
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i]->timestep >= t) break;
        sum += cost(rows[i]->features_before, rows[i + 1]->features_before);
    }
    // The last movement is only visible as the post-adaptation position.
    if (!rows.empty() && rows.back()->timestep < t) {
        sum += cost(rows.back()->features_before, rows.back()->features_after);
    }
    return sum;
}

EventLog random_log(const RandomLogSpec& spec, Engine& rng) {
    SimulationConfig cfg;
    cfg.horizon = spec.horizon;
    cfg.initial_population = spec.agents;
    cfg.arrivals_per_step = 0;
    cfg.k = 1;
    EventLog log = new_event_log(cfg);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> entry(0, std::max(spec.horizon - 1, 0));
    std::bernoulli_distribution coin(0.5);

    std::vector<Agent> agents(static_cast<std::size_t>(spec.agents));
    for (int i = 0; i < spec.agents; ++i) {
        Agent& a = agents[static_cast<std::size_t>(i)];
        a.id = i;
        a.group = coin(rng) ? Group::Advantaged : Group::Disadvantaged;
        a.features = {unit(rng), unit(rng)};
        a.entry_time = entry(rng);
        log.register_agent(a);
    }
    std::vector<bool> done(agents.size(), false);
    for (Timestep t = 0; t < spec.horizon; ++t) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            if (!done[i] && agents[i].entry_time <= t) order.push_back(i);
        }
        std::shuffle(order.begin(), order.end(), rng);
        const double threshold = unit(rng);
        for (std::size_t i : order) {
            Agent& a = agents[i];
            EventRecord r;
            r.timestep = t;
            r.agent_id = a.id;
            r.group = a.group;
            r.features_before = a.features;
            r.score = 0.5 * a.features[0] + 0.5 * a.features[1];
            r.threshold = threshold;
            if (unit(rng) < spec.win_probability) {
                r.outcome = Outcome::Positive;
                r.features_after = a.features;
                done[i] = true;
            } else {
                r.outcome = Outcome::Negative;
                r.recommendation = Features{unit(rng), unit(rng)};
                if (unit(rng) >= spec.idle_probability) a.features = {unit(rng), unit(rng)};
                r.features_after = a.features;
                r.moved_cost = cost(r.features_before, r.features_after);
            }
            log.append(std::move(r));
        }
    }
    return log;
}

namespace {

LinearScorer scorer_at(const EventLog& log, Timestep t) {
    LinearScorer s{log.config().scorer_weights, log.config().scorer_bias};
    for (const ScorerSnapshot& snap : log.scorer_history()) {
        if (snap.timestep <= t) s = {snap.weights, snap.bias};
    }
    return s;
}

bool in_unit_box(const Features& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

}  // namespace

std::vector<std::string> check_invariants(const EventLog& log) {
    std::vector<std::string> bad;
    auto fail = [&](const std::string& what) {
        if (bad.size() < 20) bad.push_back(what);
    };
    const SimulationConfig& cfg = log.config();

    std::map<AgentId, const Agent*> roster;
    std::map<Timestep, int> arrivals;
    for (const Agent& a : log.roster()) {
        roster[a.id] = &a;
        ++arrivals[a.entry_time];
    }
    if (arrivals[0] != cfg.initial_population) fail("initial population size differs from the config");

    std::map<Timestep, int> rows, positives;
    std::map<AgentId, const EventRecord*> last_row;
    std::map<AgentId, double> cost_sum;
    std::set<AgentId> won;
    for (const EventRecord& r : log.records()) {
        const std::string where = "t=" + std::to_string(r.timestep) + " agent " + std::to_string(r.agent_id) + ": ";
        ++rows[r.timestep];
        if (!roster.count(r.agent_id)) fail(where + "not in the roster");
        if (won.count(r.agent_id)) fail(where + "row after a positive outcome");
        if (r.outcome == Outcome::Positive) {
            ++positives[r.timestep];
            won.insert(r.agent_id);
        }
        if (!std::isfinite(r.threshold) || r.threshold < -1e-12 || r.threshold > 1.0 + 1e-12) {
            fail(where + "threshold outside [0,1]");
        }
        if (!in_unit_box(r.features_before) || !in_unit_box(r.features_after)) fail(where + "features outside [0,1]");
        if (r.moved_cost < 0.0) fail(where + "negative moved_cost");
        if (std::abs(r.moved_cost - cost(r.features_before, r.features_after)) > 1e-12) {
            fail(where + "moved_cost differs from the displacement");
        }
        const LinearScorer scorer = scorer_at(log, r.timestep);
        if (r.score != scorer.score(r.features_before)) fail(where + "logged score differs from the scorer");
        if (r.outcome == Outcome::Positive && r.score < r.threshold) fail(where + "winner below the threshold");
        if (r.outcome == Outcome::Negative && cfg.selection == SelectionRule::TopK && r.score > r.threshold) {
            fail(where + "top-k loser above the threshold");
        }
        if (r.recommendation && cfg.recourse_target == RecourseTarget::Global &&
            scorer.score(*r.recommendation) < r.threshold - 1e-9) {
            fail(where + "recommendation below the threshold");
        }
        auto prev = last_row.find(r.agent_id);
        const Features& expected = prev == last_row.end() ? roster[r.agent_id]->features : prev->second->features_after;
        if (r.features_before != expected) fail(where + "features jump between rows");
        if (prev != last_row.end() && prev->second->timestep + 1 != r.timestep) fail(where + "missing step");
        last_row[r.agent_id] = &r;
        cost_sum[r.agent_id] += r.moved_cost;
    }

    for (const auto& [t, n] : rows) {
        const int expect = std::min(cfg.k, n);
        if (positives[t] != expect) {
            fail("t=" + std::to_string(t) + ": " + std::to_string(positives[t]) + " positives, expected " +
                 std::to_string(expect));
        }
        if (rows.count(t + 1) && rows[t + 1] != n - positives[t] + arrivals[t + 1]) {
            fail("t=" + std::to_string(t + 1) + ": active count breaks conservation");
        }
    }

    const auto replayed = replay(log);
    for (const auto& [id, last] : last_row) {
        const Agent& a = replayed.at(id);
        if (a.features != last->features_after) fail("agent " + std::to_string(id) + ": replayed features differ");
        if (std::abs(a.cumulative_cost - cost_sum[id]) > 1e-12) {
            fail("agent " + std::to_string(id) + ": replayed cost differs");
        }
        const bool exited = last->outcome == Outcome::Positive;
        if (exited != a.exit_time.has_value() || (exited && *a.exit_time != last->timestep)) {
            fail("agent " + std::to_string(id) + ": replayed exit time differs");
        }
    }
    return bad;
}

std::string events_csv_text(const EventLog& log) {
    std::ostringstream out;
    write_events_csv(log, out);
    return out.str();
}

}  // namespace recsim::testing
