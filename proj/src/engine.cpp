#include "recsim/engine.hpp"

#include "recsim/population.hpp"
#include "recsim/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace recsim {

WorldState::WorldState(const SimulationConfig& cfg)
    : config(cfg),
      scorer{cfg.scorer_weights, cfg.scorer_bias},
      classifier{cfg.scorer_weights, cfg.scorer_bias},
      log(new_event_log(cfg)),
      rng(cfg.seed) {}

WorldState initialize_world(const SimulationConfig& config) {
    WorldState state(config);
    const auto& cfg = state.config;
    state.active = sample_population(cfg.population, cfg.initial_population,
                                     advantaged_share(cfg.initial_population), cfg.dimension,
                                     state.rng.stream(StreamPurpose::PopulationInit), 0, state.next_id);
    for (const Agent& a : state.active) state.log.register_agent(a);
    return state;
}

namespace {

void retrain(WorldState& s) {
    RetrainResult result;
    switch (s.config.retraining) {
        case Retraining::None: return;
        case Retraining::CDA:
            result = retrain_cda(s.last_labelled, s.last_counterfactuals, s.classifier, s.config.cda);
            break;
        case Retraining::GRR:
            result = retrain_grr(s.last_labelled, s.classifier, s.config.grr);
            break;
    }
    if (!result.skipped) s.classifier_fitted = true;
    s.classifier = std::move(result.classifier);
    const bool rescore = s.config.retraining != Retraining::CDA || s.config.cda.rescore;
    if (rescore) s.scorer = std::move(result.scorer);
    if (result.skipped) s.log.warn("t=" + std::to_string(s.t) + ": retraining skipped (degenerate training set)");
    s.log.append_scorer({s.t, s.scorer.weights, s.scorer.bias, result.skipped});
}

struct RecourseGoal {
    LinearScorer scorer;
    double threshold = 0.0;
};

RecourseGoal recourse_goal(const WorldState& s, const SelectionResult& selection, Group group) {
    switch (s.config.recourse_target) {
        case RecourseTarget::Global: break;
        case RecourseTarget::Group: {
            const double own = selection.group_threshold[group_index(group)];
            if (!std::isnan(own)) return {s.scorer, own};
            break;
        }
        case RecourseTarget::Boundary:
            if (s.classifier_fitted) return {s.classifier.as_scorer(), s.classifier.boundary_score()};
            break;
    }
    return {s.scorer, selection.threshold};
}

}  // namespace

void step(WorldState& s) {
    const auto& cfg = s.config;
    if (s.t >= cfg.horizon) throw std::logic_error("step: horizon already reached");

    if (s.t > 0) {
        ArrivalBatch batch = sample_arrivals(cfg.population, cfg.arrivals_per_step, cfg.dimension,
                                             s.rng.stream(StreamPurpose::Arrivals), s.t, s.next_id);
        for (Agent& a : batch.agents) {
            s.log.register_agent(a);
            s.active.push_back(std::move(a));
        }
        if (cfg.retraining != Retraining::None) retrain(s);
    } else if (cfg.retraining != Retraining::None) {
        s.log.append_scorer({0, s.scorer.weights, s.scorer.bias, false});
    }

    if (s.active.empty()) {
        ++s.t;
        return;
    }

    const std::vector<Candidate> candidates = score_all(s.scorer, s.active);
    const SelectionResult selection = cfg.selection == SelectionRule::CNS
                                          ? select_cns(candidates, cfg.k)
                                          : select_top_k(candidates, cfg.k);
    const double threshold = selection.threshold;

    s.last_labelled.clear();
    s.last_counterfactuals.clear();
    Engine& effort_rng = s.rng.stream(StreamPurpose::Effort);

    std::vector<Agent> still_active;
    still_active.reserve(s.active.size());
    for (std::size_t i = 0; i < s.active.size(); ++i) {
        Agent& agent = s.active[i];
        EventRecord rec;
        rec.timestep = s.t;
        rec.agent_id = agent.id;
        rec.group = agent.group;
        rec.features_before = agent.features;
        rec.score = candidates[i].score;
        rec.threshold = threshold;

        const bool won = selection.contains(agent.id);
        s.last_labelled.push_back({agent.features, won, agent.group});

        if (won) {
            rec.outcome = Outcome::Positive;
            rec.features_after = agent.features;
            agent.exit_time = s.t;
            s.log.append(std::move(rec));
            s.exited.push_back(std::move(agent));
            continue;
        }

        rec.outcome = Outcome::Negative;
        if (!agent.first_negative_time) agent.first_negative_time = s.t;
        // One draw per loser keeps the effort stream aligned across configurations.
        const double effort = sample_effort(agent.effort_mean, cfg.effort_scale, effort_rng);
        const RecourseGoal goal = recourse_goal(s, selection, agent.group);
        try {
            const Recommendation r = recommend(goal.scorer, agent.features, goal.threshold, agent.id, s.t);
            rec.recommendation = r.target;
            rec.moved_cost = adapt(agent, r, effort, cfg.adaptation);
            if (r.cost_to_target > 0.0) s.last_counterfactuals.push_back({r.target, true, agent.group});
        } catch (const InfeasibleRecourse& e) {
            s.log.warn("t=" + std::to_string(s.t) + " agent " + std::to_string(agent.id) + ": " + e.what());
        }
        rec.features_after = agent.features;
        s.log.append(std::move(rec));
        still_active.push_back(std::move(agent));
    }
    s.active = std::move(still_active);
    ++s.t;
}

EventLog run(const SimulationConfig& config) {
    WorldState state = initialize_world(config);
    while (state.t < state.config.horizon) step(state);
    return std::move(state.log);
}

}  // namespace recsim
