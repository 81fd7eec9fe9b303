#include "recsim/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace recsim {

double cost(std::span<const double> from, std::span<const double> to) {
    if (from.size() != to.size()) throw std::invalid_argument("cost: dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        const double d = to[i] - from[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

Recommendation recommend(const LinearScorer& scorer, std::span<const double> x, double threshold,
                         AgentId agent_id, Timestep issued_at) {
    Recommendation rec;
    rec.agent_id = agent_id;
    rec.issued_at = issued_at;
    rec.threshold_used = threshold;

    const double current = scorer.score(x);
    if (current >= threshold) {
        rec.target.assign(x.begin(), x.end());
        return rec;
    }
    if (scorer.box_max() < threshold) {
        throw InfeasibleRecourse("threshold " + std::to_string(threshold) +
                                 " exceeds the best reachable score " + std::to_string(scorer.box_max()));
    }

    const auto& w = scorer.weights;
    struct Breakpoint {
        double lambda;
        std::size_t coord;
    };
    std::vector<Breakpoint> breaks;
    double slope = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double bound = w[i] > 0.0 ? 1.0 : 0.0;
        breaks.push_back({std::max((bound - x[i]) / w[i], 0.0), i});
        slope += w[i] * w[i];
    }
    std::sort(breaks.begin(), breaks.end(), [](const Breakpoint& a, const Breakpoint& b) {
        return a.lambda < b.lambda || (a.lambda == b.lambda && a.coord < b.coord);
    });

    double lambda = 0.0;
    double value = current;
    bool solved = false;
    for (const Breakpoint& bp : breaks) {
        if (slope > 0.0 && value + slope * (bp.lambda - lambda) >= threshold) {
            lambda += (threshold - value) / slope;
            solved = true;
            break;
        }
        value += slope * (bp.lambda - lambda);
        lambda = bp.lambda;
        slope -= w[bp.coord] * w[bp.coord];
    }
    if (!solved) {
        // Every coordinate saturated: only the optimal corner is left.
        lambda = breaks.empty() ? 0.0 : breaks.back().lambda;
    }

    rec.target.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) rec.target[i] = std::clamp(x[i] + lambda * w[i], 0.0, 1.0);
    rec.cost_to_target = cost(x, rec.target);
    return rec;
}

double sample_effort(double effort_mean, double scale, Engine& rng) {
    if (scale <= 0.0) return 0.0;
    std::normal_distribution<double> z(effort_mean * scale, scale);
    return std::abs(z(rng));
}

double adapt(Agent& agent, const Recommendation& rec, double effort, Adaptation mode) {
    const double distance = cost(agent.features, rec.target);
    if (distance == 0.0 || effort <= 0.0) return 0.0;

    const Features before = agent.features;
    if (mode == Adaptation::CapAtRecommendation && effort >= distance) {
        agent.features = rec.target;
    } else {
        const double step = effort / distance;
        for (std::size_t i = 0; i < agent.features.size(); ++i) {
            const double moved = before[i] + step * (rec.target[i] - before[i]);
            agent.features[i] = std::clamp(moved, 0.0, 1.0);
        }
    }
    const double moved_cost = cost(before, agent.features);
    agent.cumulative_cost += moved_cost;
    return moved_cost;
}

}  // namespace recsim
