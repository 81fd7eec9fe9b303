#pragma once

#include "recsim/rng.hpp"
#include "recsim/types.hpp"

#include <vector>

namespace recsim {

struct ArrivalBatch {
    Timestep timestep = 0;
    std::vector<Agent> agents;
};

/// Mean and standard deviation of one feature coordinate for a group's
/// high- or lower-performing component.
struct ComponentParams {
    double mean = 0.0;
    double stddev = 1.0;
};

ComponentParams component_params(const PopulationSpec& spec, Group group, bool high_performer);

/// One unclamped feature vector: the high-performer component is chosen with
/// probability high_fraction, then every coordinate is drawn i.i.d.
Features draw_raw_features(const PopulationSpec& spec, Group group, int dimension, Engine& rng);

void clamp_unit_box(Features& x);

/// n agents, exactly `n_advantaged` of them advantaged, in a shuffled order.
/// Ids are taken from `next_id`, which is advanced.
std::vector<Agent> sample_population(const PopulationSpec& spec, int n, int n_advantaged,
                                     int dimension, Engine& rng, Timestep t, AgentId& next_id);

/// Even split; an odd agent goes to the disadvantaged group.
ArrivalBatch sample_arrivals(const PopulationSpec& spec, int count, int dimension, Engine& rng,
                             Timestep t, AgentId& next_id);

}  // namespace recsim
