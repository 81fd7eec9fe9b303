#pragma once

#include <span>
#include <vector>

namespace recsim {

/// f(x) = w.x + b.
struct LinearScorer {
    std::vector<double> weights{0.5, 0.5};
    double bias = 0.0;

    double score(std::span<const double> x) const;
    double weight_norm_sq() const;

    /// Highest score reachable inside the unit box.
    double box_max() const;

    /// Same ordering, rescaled so sum|w_i| = 1 and the image of [0,1]^d is
    /// exactly [0,1] (bias absorbs the negative weights).
    LinearScorer normalized() const;

    bool operator==(const LinearScorer&) const = default;
};

}  // namespace recsim
