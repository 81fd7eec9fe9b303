#pragma once

#include "recsim/scorer.hpp"
#include "recsim/types.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace recsim {

/// One scored, active agent as seen by the selection rules.
struct Candidate {
    AgentId id = 0;
    Group group = Group::Advantaged;
    double score = 0.0;
    /// First negative outcome, if any; earlier means waiting longer.
    std::optional<Timestep> waiting_since;
};

struct SelectionResult {
    /// Selected ids in rank order.
    std::vector<AgentId> selected;
    /// Minimum selected score; NaN when nothing was selected.
    double threshold = 0.0;
    std::array<int, 2> per_group{0, 0};
    /// Minimum selected score within each group; NaN for a group with no seat.
    std::array<double, 2> group_threshold{0.0, 0.0};

    bool contains(AgentId id) const;
};

inline std::size_t group_index(Group g) { return static_cast<std::size_t>(g); }

/// Strict weak order used everywhere a ranking is needed: higher score first,
/// then longer waiting (agents that never lost rank after those that did),
/// then lower id.
bool ranks_before(const Candidate& a, const Candidate& b);

std::vector<Candidate> score_all(const LinearScorer& scorer, std::span<const Agent> agents);

SelectionResult select_top_k(std::span<const Candidate> candidates, int k);

/// Largest-remainder apportionment of `seats` proportional to `sizes`.
/// Equal remainders go to the larger group, then to the disadvantaged group.
std::array<int, 2> apportion(int seats, std::array<int, 2> sizes);

/// Fills each group's quota with its best candidates; seats a group cannot
/// fill are refilled from the global ranking of everyone left, up to
/// min(k, candidates).
SelectionResult select_with_quotas(std::span<const Candidate> candidates, std::array<int, 2> quotas,
                                   int k);

/// Circumstance-normalised selection: quotas proportional to active group sizes.
SelectionResult select_cns(std::span<const Candidate> candidates, int k);

// ---------------------------------------------------------------------------
// Retraining

struct TrainingExample {
    Features x;
    bool positive = false;
    Group group = Group::Advantaged;
};

/// Raw linear classifier: positive iff w.x + b >= 0.
struct LinearClassifier {
    std::vector<double> weights;
    double bias = 0.0;

    double margin(std::span<const double> x) const;
    /// Scorer with the same ranking, normalised to the unit-box codomain.
    LinearScorer as_scorer() const;
    /// Score, under as_scorer(), of the points where margin(x) == 0.
    double boundary_score() const;
};

double training_accuracy(const LinearClassifier& clf, std::span<const TrainingExample> data);

/// Mean logistic loss + (l2/2)|w|^2 minimised by Newton's method.
LinearClassifier fit_logistic_newton(std::span<const TrainingExample> data, double l2, int iterations);

struct GroupDistanceRegularizer {
    double lambda = 0.0;
};

/// Plain gradient descent on mean logistic loss plus
/// lambda * (mean signed distance of advantaged negatives - same for disadvantaged)^2.
/// The regulariser is dropped when either group has no negatives.
LinearClassifier fit_gradient_descent(std::span<const TrainingExample> data, LinearClassifier init,
                                      GroupDistanceRegularizer reg, double learning_rate, int epochs);

struct RetrainResult {
    LinearClassifier classifier;
    LinearScorer scorer;
    bool skipped = false;
};

/// Counterfactual data augmentation: `labelled` plus one positive example per
/// recommendation point. A single-class set keeps `previous`.
RetrainResult retrain_cda(std::span<const TrainingExample> labelled,
                          std::span<const TrainingExample> counterfactuals,
                          const LinearClassifier& previous, const CdaOptions& options);

/// Group recourse regularisation, warm-started from `previous`.
RetrainResult retrain_grr(std::span<const TrainingExample> labelled, const LinearClassifier& previous,
                          const GrrOptions& options);

}  // namespace recsim
