#pragma once

#include "recsim/rng.hpp"
#include "recsim/scorer.hpp"
#include "recsim/types.hpp"

#include <span>
#include <stdexcept>

namespace recsim {

struct Recommendation {
    AgentId agent_id = 0;
    Features target;
    double cost_to_target = 0.0;
    Timestep issued_at = 0;
    double threshold_used = 0.0;
};

/// The threshold cannot be reached anywhere in the unit box.
class InfeasibleRecourse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Euclidean distance. Throws std::invalid_argument on dimension mismatch.
double cost(std::span<const double> from, std::span<const double> to);

/// Nearest point of {y in [0,1]^d : f(y) >= threshold} to x.
///
/// For a linear scorer the KKT conditions give y = clamp(x + lambda*w) with
/// lambda >= 0 the smallest value putting y on the hyperplane; f(clamp(x + lambda*w))
/// is piecewise linear and non-decreasing in lambda, so lambda is found by
/// walking the sorted clamp breakpoints. Without any clamping this is the plain
/// orthogonal projection x + ((threshold - f(x)) / |w|^2) w. An agent already at
/// or above the threshold gets x itself at zero cost.
Recommendation recommend(const LinearScorer& scorer, std::span<const double> x, double threshold,
                         AgentId agent_id = 0, Timestep issued_at = 0);

/// |z| with z ~ N(effort_mean * scale, scale^2).
double sample_effort(double effort_mean, double scale, Engine& rng);

/// Moves `agent` toward `rec.target` by `effort` (capped at the target in
/// CapAtRecommendation mode), clamps to the unit box, adds the displacement to
/// cumulative_cost and returns it.
double adapt(Agent& agent, const Recommendation& rec, double effort, Adaptation mode);

}  // namespace recsim
