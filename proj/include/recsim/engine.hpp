#pragma once

#include "recsim/decision.hpp"
#include "recsim/event_log.hpp"
#include "recsim/rng.hpp"
#include "recsim/types.hpp"

#include <vector>

namespace recsim {

/// Everything one run owns. Active agents are kept in ascending id order.
struct WorldState {
    SimulationConfig config;
    Timestep t = 0;
    std::vector<Agent> active;
    std::vector<Agent> exited;
    LinearScorer scorer;
    LinearClassifier classifier;
    /// Set once a retrained classifier exists; only then is its boundary a
    /// meaningful recourse target.
    bool classifier_fitted = false;
    EventLog log;
    RngStreams rng;
    AgentId next_id = 0;

    // Labels and counterfactuals from the previous step, consumed by retraining.
    std::vector<TrainingExample> last_labelled;
    std::vector<TrainingExample> last_counterfactuals;

    explicit WorldState(const SimulationConfig& cfg);
};

/// Validates the config and samples the initial population (entry_time 0).
WorldState initialize_world(const SimulationConfig& config);

/// One pass of the loop: arrivals (t > 0), retraining, scoring, selection,
/// exits, recommendations, adaptation, logging, t += 1.
void step(WorldState& state);

EventLog run(const SimulationConfig& config);

}  // namespace recsim
