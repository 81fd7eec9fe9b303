#include "recsim/decision.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace recsim {

bool SelectionResult::contains(AgentId id) const {
    return std::find(selected.begin(), selected.end(), id) != selected.end();
}

bool ranks_before(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.waiting_since != b.waiting_since) {
        if (!a.waiting_since) return false;
        if (!b.waiting_since) return true;
        return *a.waiting_since < *b.waiting_since;
    }
    return a.id < b.id;
}

std::vector<Candidate> score_all(const LinearScorer& scorer, std::span<const Agent> agents) {
    std::vector<Candidate> out;
    out.reserve(agents.size());
    for (const Agent& a : agents) out.push_back({a.id, a.group, scorer.score(a.features), a.first_negative_time});
    return out;
}

namespace {

SelectionResult finish(std::vector<const Candidate*> chosen) {
    std::sort(chosen.begin(), chosen.end(),
              [](const Candidate* a, const Candidate* b) { return ranks_before(*a, *b); });
    SelectionResult r;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.threshold = nan;
    r.group_threshold = {nan, nan};
    for (const Candidate* c : chosen) {
        r.selected.push_back(c->id);
        const std::size_t g = group_index(c->group);
        double& gt = r.group_threshold[g];
        gt = ++r.per_group[g] == 1 ? c->score : std::min(gt, c->score);
        r.threshold = r.selected.size() == 1 ? c->score : std::min(r.threshold, c->score);
    }
    return r;
}

std::vector<const Candidate*> ranked(std::span<const Candidate> candidates) {
    std::vector<const Candidate*> order;
    order.reserve(candidates.size());
    for (const Candidate& c : candidates) order.push_back(&c);
    std::sort(order.begin(), order.end(),
              [](const Candidate* a, const Candidate* b) { return ranks_before(*a, *b); });
    return order;
}

}  // namespace

SelectionResult select_top_k(std::span<const Candidate> candidates, int k) {
    auto order = ranked(candidates);
    order.resize(std::min(order.size(), static_cast<std::size_t>(std::max(k, 0))));
    return finish(std::move(order));
}

std::array<int, 2> apportion(int seats, std::array<int, 2> sizes) {
    const long total = static_cast<long>(sizes[0]) + sizes[1];
    if (total == 0 || seats <= 0) return {0, 0};
    std::array<int, 2> quota{};
    std::array<long, 2> remainder{};
    int assigned = 0;
    for (std::size_t g = 0; g < 2; ++g) {
        const long num = static_cast<long>(seats) * sizes[g];
        quota[g] = static_cast<int>(num / total);
        remainder[g] = num % total;
        assigned += quota[g];
    }
    // Two groups: at most one seat is left over.
    if (assigned < seats) {
        std::size_t winner = 1;
        if (remainder[0] != remainder[1]) winner = remainder[0] > remainder[1] ? 0 : 1;
        else if (sizes[0] != sizes[1]) winner = sizes[0] > sizes[1] ? 0 : 1;
        ++quota[winner];
    }
    return quota;
}

SelectionResult select_with_quotas(std::span<const Candidate> candidates, std::array<int, 2> quotas,
                                   int k) {
    const auto order = ranked(candidates);
    const std::size_t seats = std::min(order.size(), static_cast<std::size_t>(std::max(k, 0)));

    std::vector<const Candidate*> chosen;
    std::vector<bool> taken(order.size(), false);
    std::array<int, 2> filled{0, 0};
    for (std::size_t i = 0; i < order.size() && chosen.size() < seats; ++i) {
        const std::size_t g = group_index(order[i]->group);
        if (filled[g] < quotas[g]) {
            ++filled[g];
            taken[i] = true;
            chosen.push_back(order[i]);
        }
    }
    for (std::size_t i = 0; i < order.size() && chosen.size() < seats; ++i) {
        if (!taken[i]) chosen.push_back(order[i]);
    }
    return finish(std::move(chosen));
}

SelectionResult select_cns(std::span<const Candidate> candidates, int k) {
    std::array<int, 2> sizes{0, 0};
    for (const Candidate& c : candidates) ++sizes[group_index(c.group)];
    const int seats = std::min(k, sizes[0] + sizes[1]);
    return select_with_quotas(candidates, apportion(seats, sizes), k);
}

// ---------------------------------------------------------------------------

double LinearClassifier::margin(std::span<const double> x) const {
    double m = bias;
    for (std::size_t i = 0; i < x.size(); ++i) m += weights[i] * x[i];
    return m;
}

LinearScorer LinearClassifier::as_scorer() const {
    return LinearScorer{weights, bias}.normalized();
}

double LinearClassifier::boundary_score() const {
    double l1 = 0.0;
    for (double w : weights) l1 += std::abs(w);
    if (l1 == 0.0) throw std::invalid_argument("boundary_score: all-zero weights");
    return -bias / l1 + as_scorer().bias;
}

double training_accuracy(const LinearClassifier& clf, std::span<const TrainingExample> data) {
    if (data.empty()) return 1.0;
    std::size_t correct = 0;
    for (const auto& e : data) correct += (clf.margin(e.x) >= 0.0) == e.positive;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

double sigmoid(double z) {
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

bool has_both_classes(std::span<const TrainingExample> data) {
    bool pos = false, neg = false;
    for (const auto& e : data) (e.positive ? pos : neg) = true;
    return pos && neg;
}

}  // namespace

LinearClassifier fit_logistic_newton(std::span<const TrainingExample> data, double l2, int iterations) {
    if (data.empty()) throw std::invalid_argument("fit_logistic_newton: empty training set");
    const Eigen::Index d = static_cast<Eigen::Index>(data.front().x.size());
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());

    Eigen::MatrixXd X(n, d + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& e = data[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = e.x[static_cast<std::size_t>(j)];
        X(i, d) = 1.0;
        y(i) = e.positive ? 1.0 : 0.0;
    }

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    Eigen::MatrixXd ridge = Eigen::MatrixXd::Identity(d + 1, d + 1) * l2;
    ridge(d, d) = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd p = (X * theta).unaryExpr([](double z) { return sigmoid(z); });
        const Eigen::VectorXd grad = X.transpose() * (p - y) / static_cast<double>(n) + ridge * theta;
        const Eigen::VectorXd wts = (p.array() * (1.0 - p.array())).matrix();
        Eigen::MatrixXd hess = X.transpose() * wts.asDiagonal() * X / static_cast<double>(n) + ridge;
        // Keeps the intercept direction invertible on degenerate inputs.
        hess.diagonal().array() += 1e-12;
        const Eigen::VectorXd delta = hess.ldlt().solve(grad);
        theta -= delta;
        if (delta.lpNorm<Eigen::Infinity>() < 1e-12) break;
    }

    LinearClassifier clf;
    clf.weights.assign(theta.data(), theta.data() + d);
    clf.bias = theta(d);
    return clf;
}

LinearClassifier fit_gradient_descent(std::span<const TrainingExample> data, LinearClassifier init,
                                      GroupDistanceRegularizer reg, double learning_rate, int epochs) {
    if (data.empty()) return init;
    const std::size_t d = init.weights.size();
    const double n = static_cast<double>(data.size());

    std::array<double, 2> neg_count{0.0, 0.0};
    for (const auto& e : data) {
        if (!e.positive) neg_count[group_index(e.group)] += 1.0;
    }
    const bool regularize = reg.lambda > 0.0 && neg_count[0] > 0.0 && neg_count[1] > 0.0;

    LinearClassifier clf = std::move(init);
    std::vector<double> gw(d);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        for (const auto& e : data) {
            const double r = sigmoid(clf.margin(e.x)) - (e.positive ? 1.0 : 0.0);
            for (std::size_t j = 0; j < d; ++j) gw[j] += r * e.x[j] / n;
            gb += r / n;
        }

        if (regularize) {
            double norm_sq = 0.0;
            for (double w : clf.weights) norm_sq += w * w;
            const double norm = std::sqrt(norm_sq);
            if (norm > 0.0) {
                // Mean signed distance per group, and its gradient w.r.t. (w, b).
                std::array<double, 2> mean_margin{0.0, 0.0};
                std::array<std::vector<double>, 2> mean_x{std::vector<double>(d, 0.0),
                                                          std::vector<double>(d, 0.0)};
                for (const auto& e : data) {
                    if (e.positive) continue;
                    const std::size_t g = group_index(e.group);
                    mean_margin[g] += clf.margin(e.x) / neg_count[g];
                    for (std::size_t j = 0; j < d; ++j) mean_x[g][j] += e.x[j] / neg_count[g];
                }
                const double gap = (mean_margin[0] - mean_margin[1]) / norm;
                const double scale = 2.0 * reg.lambda * gap;
                for (std::size_t j = 0; j < d; ++j) {
                    const double dgap = (mean_x[0][j] - mean_x[1][j]) / norm -
                                        (mean_margin[0] - mean_margin[1]) * clf.weights[j] / (norm_sq * norm);
                    gw[j] += scale * dgap;
                }
                // Bias cancels in the difference of mean distances.
            }
        }

        for (std::size_t j = 0; j < d; ++j) clf.weights[j] -= learning_rate * gw[j];
        clf.bias -= learning_rate * gb;
    }
    return clf;
}

RetrainResult retrain_cda(std::span<const TrainingExample> labelled,
                          std::span<const TrainingExample> counterfactuals,
                          const LinearClassifier& previous, const CdaOptions& options) {
    std::vector<TrainingExample> data(labelled.begin(), labelled.end());
    for (TrainingExample cf : counterfactuals) {
        cf.positive = true;
        data.push_back(std::move(cf));
    }
    if (counterfactuals.empty() || !has_both_classes(data)) {
        return {previous, previous.as_scorer(), true};
    }
    LinearClassifier clf = fit_logistic_newton(data, options.l2, options.newton_iterations);
    bool all_zero = std::all_of(clf.weights.begin(), clf.weights.end(), [](double w) { return w == 0.0; });
    if (all_zero) return {previous, previous.as_scorer(), true};
    return {clf, clf.as_scorer(), false};
}

RetrainResult retrain_grr(std::span<const TrainingExample> labelled, const LinearClassifier& previous,
                          const GrrOptions& options) {
    if (!has_both_classes(labelled)) return {previous, previous.as_scorer(), true};
    LinearClassifier clf = fit_gradient_descent(labelled, previous, {options.lambda},
                                                options.learning_rate, options.epochs);
    bool all_zero = std::all_of(clf.weights.begin(), clf.weights.end(), [](double w) { return w == 0.0; });
    if (all_zero) return {previous, previous.as_scorer(), true};
    return {clf, clf.as_scorer(), false};
}

}  // namespace recsim
