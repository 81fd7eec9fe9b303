#include "recsim/scorer.hpp"

#include <cmath>
#include <stdexcept>

namespace recsim {

double LinearScorer::score(std::span<const double> x) const {
    if (x.size() != weights.size()) throw std::invalid_argument("score: dimension mismatch");
    double s = bias;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
    return s;
}

double LinearScorer::weight_norm_sq() const {
    double n = 0.0;
    for (double w : weights) n += w * w;
    return n;
}

double LinearScorer::box_max() const {
    double s = bias;
    for (double w : weights) s += std::max(w, 0.0);
    return s;
}

LinearScorer LinearScorer::normalized() const {
    double l1 = 0.0;
    for (double w : weights) l1 += std::abs(w);
    if (l1 == 0.0) throw std::invalid_argument("normalized: all-zero weights");
    LinearScorer out;
    out.weights.resize(weights.size());
    out.bias = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.weights[i] = weights[i] / l1;
        if (out.weights[i] < 0.0) out.bias -= out.weights[i];
    }
    return out;
}

}  // namespace recsim
