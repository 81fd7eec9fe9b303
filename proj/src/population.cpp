#include "recsim/population.hpp"

#include <algorithm>

namespace recsim {

ComponentParams component_params(const PopulationSpec& spec, Group group, bool high_performer) {
    const bool disadvantaged = group == Group::Disadvantaged;
    const double wide = spec.sigma * spec.variance_ratio;
    if (high_performer) return {spec.mu_high, spec.sigma};

    switch (spec.generator_case) {
        case GeneratorCase::EqualVarDiffMeans:
            return {disadvantaged ? spec.mu_d : derive_mu_a(spec), spec.sigma};
        case GeneratorCase::DiffVarEqualMeans:
            return {spec.mu_d, disadvantaged ? wide : spec.sigma};
        case GeneratorCase::DiffVarDiffMeans:
            return {disadvantaged ? spec.mu_d : derive_mu_a(spec), disadvantaged ? wide : spec.sigma};
    }
    return {spec.mu_d, spec.sigma};
}

Features draw_raw_features(const PopulationSpec& spec, Group group, int dimension, Engine& rng) {
    std::bernoulli_distribution is_high(spec.high_fraction);
    const ComponentParams c = component_params(spec, group, is_high(rng));
    std::normal_distribution<double> coord(c.mean, c.stddev);
    Features x(static_cast<std::size_t>(dimension));
    for (double& v : x) v = coord(rng);
    return x;
}

void clamp_unit_box(Features& x) {
    for (double& v : x) v = std::clamp(v, 0.0, 1.0);
}

std::vector<Agent> sample_population(const PopulationSpec& spec, int n, int n_advantaged,
                                     int dimension, Engine& rng, Timestep t, AgentId& next_id) {
    std::vector<Agent> out;
    if (n <= 0) return out;
    out.reserve(static_cast<std::size_t>(n));

    // Group labels in shuffled order: ids break selection ties, so they must
    // not encode group membership.
    std::vector<Group> labels(static_cast<std::size_t>(n), Group::Disadvantaged);
    std::fill_n(labels.begin(), std::clamp(n_advantaged, 0, n), Group::Advantaged);
    std::shuffle(labels.begin(), labels.end(), rng);

    for (int i = 0; i < n; ++i) {
        Agent a;
        a.id = next_id++;
        a.group = labels[static_cast<std::size_t>(i)];
        a.features = draw_raw_features(spec, a.group, dimension, rng);
        clamp_unit_box(a.features);
        a.effort_mean = a.group == Group::Advantaged ? spec.e_a : spec.e_d;
        a.entry_time = t;
        out.push_back(std::move(a));
    }
    return out;
}

ArrivalBatch sample_arrivals(const PopulationSpec& spec, int count, int dimension, Engine& rng,
                             Timestep t, AgentId& next_id) {
    return {t, sample_population(spec, count, advantaged_share(count), dimension, rng, t, next_id)};
}

}  // namespace recsim
