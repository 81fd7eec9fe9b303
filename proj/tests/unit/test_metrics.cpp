#include "recsim/engine.hpp"
#include "recsim/metrics.hpp"

#include "../support/oracles.hpp"
#include "doctest.h"

#include <sstream>

using namespace recsim;
using namespace recsim::testing;

namespace {

/// Log builder for hand-written scenarios.
struct Script {
    EventLog log = new_event_log(SimulationConfig{});

    Script& agent(AgentId id, Group g) {
        Agent a;
        a.id = id;
        a.group = g;
        a.features = {0.5, 0.5};
        log.register_agent(a);
        return *this;
    }
    Script& row(Timestep t, AgentId id, Group g, Outcome o, double moved = 0.0) {
        EventRecord r;
        r.timestep = t;
        r.agent_id = id;
        r.group = g;
        r.outcome = o;
        r.moved_cost = moved;
        r.features_before = r.features_after = {0.5, 0.5};
        log.append(r);
        return *this;
    }
};

constexpr Group A = Group::Advantaged;
constexpr Group D = Group::Disadvantaged;
constexpr Outcome P = Outcome::Positive;
constexpr Outcome N = Outcome::Negative;

bool same(const MaybeReal& a, const MaybeReal& b) { return a.has_value() == b.has_value() && (!a || *a == *b); }

bool same(const MetricPoint& a, const MetricPoint& b) {
    for (Group g : {A, D}) {
        if (!same(a.etr[g], b.etr[g]) || !same(a.ttr[g], b.ttr[g]) || !same(a.wasted[g], b.wasted[g])) return false;
    }
    return same(a.retr, b.retr) && same(a.dttr, b.dttr) && a.successes == b.successes;
}

}  // namespace

TEST_CASE("successful set membership") {
    Script s;
    s.agent(0, A).agent(1, A).agent(2, D);
    s.row(0, 0, A, N, 0.2).row(0, 1, A, P).row(0, 2, D, N, 0.9);
    s.row(1, 0, A, P).row(1, 2, D, N, 0.0);
    for (int t = 2; t <= 4; ++t) s.row(t, 2, D, N, 0.0);

    const auto a = successful_set(s.log, A, 4);
    REQUIRE(a.size() == 1);  // agent 1 won without a prior negative
    CHECK(a[0].agent_id == 0);
    CHECK(a[0].o_minus == 0);
    CHECK(a[0].o_plus == 1);
    CHECK(a[0].delta == 1);
    CHECK(a[0].total_cost == 0.2);
    CHECK(successful_set(s.log, D, 4).empty());
    CHECK(wasted_effort(s.log, D, 5) == doctest::Approx(0.9));
    CHECK_FALSE(wasted_effort(s.log, A, 5).has_value());
}

TEST_CASE("effort is additive and rejects unknown agents") {
    Script s;
    s.agent(0, A).agent(1, D);
    s.row(0, 0, A, N, 0.2).row(0, 1, D, N).row(1, 0, A, N, 0.3).row(1, 1, D, N);
    CHECK(effort_of(s.log, 0, 2) == doctest::Approx(0.5));
    CHECK(effort_of(s.log, 0, 1) == doctest::Approx(0.2));
    CHECK(effort_of(s.log, 1, 2) == 0.0);
    CHECK_THROWS_AS(effort_of(s.log, 99, 2), std::invalid_argument);
}

TEST_CASE("ratios and differences from singletons") {
    Script s;
    s.agent(0, A).agent(1, D);
    s.row(0, 0, A, N, 0.5).row(0, 1, D, N, 0.5).row(1, 0, A, P).row(1, 1, D, P);
    CHECK(*retr(s.log, 1) == 1.0);
    CHECK(*dttr(s.log, 1) == 0.0);
    CHECK(*etr(s.log, A, 1) == 0.5);
    CHECK(*ttr(s.log, D, 1) == 1.0);
    CHECK_FALSE(retr(s.log, 0).has_value());  // nobody has succeeded yet: no data, not zero
}

TEST_CASE("demographic parity") {
    Script s;
    for (int i = 0; i < 500; ++i) s.agent(i, A).row(0, i, A, i < 100 ? P : N);
    for (int i = 500; i < 1000; ++i) s.agent(i, D).row(0, i, D, N);
    CHECK(*demographic_parity(s.log, 0) == 0.0);

    Script none;
    none.agent(0, A).agent(1, D).row(0, 0, A, N).row(0, 1, D, P);
    CHECK_FALSE(demographic_parity(none.log, 0).has_value());
}

TEST_CASE("missing values are skipped in aggregation") {
    const std::vector<MaybeReal> v{1.0, std::nullopt, 3.0};
    const AggregateStat s = aggregate(v);
    CHECK(s.n == 2);
    CHECK(s.mean == 2.0);
    CHECK(s.std_error == doctest::Approx(1.0));
    CHECK(aggregate(std::vector<MaybeReal>{std::nullopt}).missing());
}

TEST_CASE("metrics equal the naive oracle on 100 random logs") {
    Engine rng(1234);
    for (int i = 0; i < 100; ++i) {
        RandomLogSpec spec;
        spec.agents = 5 + i % 40;
        spec.horizon = 1 + i % 9;
        const EventLog log = random_log(spec, rng);
        const RunMetrics fast = compute_run_metrics(log);
        const RunMetrics slow = naive_run_metrics(log.records(), spec.horizon);
        REQUIRE(fast.per_step.size() == slow.per_step.size());
        for (std::size_t t = 0; t < fast.per_step.size(); ++t) {
            CHECK(same(fast.per_step[t], slow.per_step[t]));
            CHECK(same(fast.running[t], slow.running[t]));
            CHECK(same(fast.dp[t], slow.dp[t]));
        }
        CHECK(same(fast.cumulative, slow.cumulative));
        CHECK(same(fast.dp_mean, slow.dp_mean));
        const LogIndex index(log);
        for (Group g : {A, D}) {
            for (Timestep t = 0; t <= spec.horizon; ++t) {
                const auto a = successful_set(index, g, t);
                const auto b = naive_successes(log.records(), g, t, false);
                REQUIRE(a.size() == b.size());
                for (std::size_t j = 0; j < a.size(); ++j) {
                    CHECK(a[j].agent_id == b[j].agent_id);
                    CHECK(a[j].total_cost == b[j].total_cost);
                    CHECK(a[j].delta == b[j].delta);
                }
            }
        }
    }
}

TEST_CASE("effort equals the feature-diff oracle") {
    Engine rng(99);
    for (int i = 0; i < 20; ++i) {
        const EventLog log = random_log(RandomLogSpec{}, rng);
        for (const Agent& a : log.roster()) {
            for (Timestep t = 0; t <= 6; ++t) {
                CHECK(effort_of(log, a.id, t) == doctest::Approx(feature_diff_effort(log.records(), a.id, t)).epsilon(1e-12));
            }
        }
    }
    SimulationConfig cfg;
    cfg.horizon = 5;
    cfg.seed = 4;
    const EventLog sim = run(cfg);
    for (AgentId id = 0; id < 1000; id += 37) {
        CHECK(effort_of(sim, id, 5) == doctest::Approx(feature_diff_effort(sim.records(), id, 5)).epsilon(1e-12));
    }
}

TEST_CASE("cumulative values are success-weighted combinations of per-step values") {
    SimulationConfig cfg;
    cfg.seed = 8;
    cfg.population.q = 2.0;
    const RunMetrics m = compute_run_metrics(run(cfg));
    for (Group g : {A, D}) {
        double cost_sum = 0.0, delta_sum = 0.0;
        int n = 0;
        for (const MetricPoint& p : m.per_step) {
            const int k = p.successes[static_cast<std::size_t>(g)];
            if (k == 0) continue;
            cost_sum += *p.etr[g] * k;
            delta_sum += *p.ttr[g] * k;
            n += k;
        }
        REQUIRE(n == m.cumulative.successes[static_cast<std::size_t>(g)]);
        CHECK(cost_sum / n == doctest::Approx(*m.cumulative.etr[g]).epsilon(1e-12));
        CHECK(delta_sum / n == doctest::Approx(*m.cumulative.ttr[g]).epsilon(1e-12));
    }
}

TEST_CASE("report CSV round-trips") {
    Engine rng(5);
    std::vector<RunMetrics> runs;
    for (int i = 0; i < 3; ++i) runs.push_back(compute_run_metrics(random_log(RandomLogSpec{}, rng)));
    const std::vector<MetricsReport> reports{aggregate_runs("q0/equal/baseline", 7, runs)};
    std::stringstream first;
    write_report_csv(reports, first);
    CHECK(first.str().rfind("config,seed_count,metric,group,timestep,mean,stderr\n", 0) == 0);
    const auto back = read_report_csv(first);
    REQUIRE(back.size() == 1);
    CHECK(back[0].seed_count == 3);
    std::stringstream second;
    write_report_csv(back, second);
    CHECK(second.str() == first.str());
    const AggregateStat* r = back[0].find("retr");
    REQUIRE(r != nullptr);
    CHECK(back[0].find("dp", "all", -1) != nullptr);
    CHECK(back[0].find("etr_step", "disadvantaged", 0) != nullptr);
    CHECK(back[0].find("nope") == nullptr);

    std::stringstream bad("wrong,header\n");
    CHECK_THROWS(read_report_csv(bad));
}

TEST_CASE("proposition 1 diagnostic") {
    SimulationConfig lo, hi;
    lo.population.e_a = 2.0;
    lo.population.e_d = 1.0;
    hi.population.e_a = 1.0;
    hi.population.e_d = 2.0;
    const auto c = proposition1_diagnostic(lo, 0.9, hi, 1.1);
    CHECK(c.ordering_consistent);
    CHECK(c.effort_ratio == doctest::Approx(0.25));
    CHECK(c.retr_ratio == doctest::Approx(0.9 / 1.1));
    CHECK_FALSE(proposition1_diagnostic(lo, 1.2, hi, 1.1).ordering_consistent);

    SimulationConfig other = hi;
    other.population.q = 1.0;
    CHECK_THROWS_AS(proposition1_diagnostic(lo, 0.9, other, 1.1), std::invalid_argument);
    CHECK_THROWS_AS(proposition1_diagnostic(lo, std::nullopt, hi, 1.1), std::invalid_argument);
}

TEST_CASE("80% rule band") {
    CHECK(retr_within_tolerance(0.8));
    CHECK(retr_within_tolerance(1.2));
    CHECK_FALSE(retr_within_tolerance(1.21));
    CHECK_FALSE(retr_within_tolerance(0.79));
}
