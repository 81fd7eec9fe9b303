#include "recsim/recourse.hpp"

#include "../support/oracles.hpp"
#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace recsim;
using recsim::testing::folded_normal_mean_integral;
using recsim::testing::grid_recourse_oracle;

namespace {

struct Instance {
    LinearScorer scorer;
    Features x;
    double threshold;
};

/// Random scorer with mixed-sign weights and a reachable threshold above f(x).
Instance random_instance(Engine& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0), w(-1.0, 1.0);
    for (;;) {
        Instance in{{{w(rng), w(rng)}, w(rng) * 0.5}, {u(rng), u(rng)}, 0.0};
        if (std::abs(in.scorer.weights[0]) + std::abs(in.scorer.weights[1]) < 0.05) continue;
        const double f = in.scorer.score(in.x);
        const double top = in.scorer.box_max();
        if (top - f < 1e-6) continue;
        in.threshold = f + u(rng) * (top - f);
        return in;
    }
}

}  // namespace

TEST_CASE("cost is the Euclidean distance") {
    const Features o{0.0, 0.0}, a{0.4, 0.4}, b{0.7, 0.7};
    CHECK(cost(o, o) == 0.0);
    CHECK(cost(a, b) == doctest::Approx(0.3 * std::numbers::sqrt2).epsilon(1e-12));
    CHECK(cost(a, b) == cost(b, a));
    CHECK_THROWS_AS(cost(a, Features{1.0}), std::invalid_argument);
}

TEST_CASE("cost is symmetric on random pairs") {
    Engine rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Features a{u(rng), u(rng)}, b{u(rng), u(rng)};
        CHECK(cost(a, b) == cost(b, a));
    }
}

TEST_CASE("orthogonal projection onto the threshold line") {
    const Recommendation r = recommend(LinearScorer{{0.5, 0.5}, 0.0}, Features{0.4, 0.4}, 0.7, 9, 3);
    CHECK(r.target[0] == doctest::Approx(0.7));
    CHECK(r.target[1] == doctest::Approx(0.7));
    CHECK(r.cost_to_target == doctest::Approx(0.424264).epsilon(1e-6));
    CHECK(r.agent_id == 9);
    CHECK(r.issued_at == 3);
    CHECK(r.threshold_used == 0.7);
}

TEST_CASE("cost vanishes at the boundary") {
    const LinearScorer s{{0.5, 0.5}, 0.0};
    double prev = 1.0;
    for (double eps : {1e-1, 1e-3, 1e-6, 1e-9}) {
        const Recommendation r = recommend(s, Features{0.3, 0.3}, 0.3 + eps);
        CHECK(r.cost_to_target < prev);
        prev = r.cost_to_target;
    }
    CHECK(prev < 1e-8);
}

TEST_CASE("boxed projection when the plain projection leaves the box") {
    // x sits on the upper edge of coordinate 0; the projection must move only along coordinate 1.
    const Recommendation r = recommend(LinearScorer{{0.5, 0.5}, 0.0}, Features{1.0, 0.2}, 0.8);
    CHECK(r.target[0] == 1.0);
    CHECK(r.target[1] == doctest::Approx(0.6));
    CHECK(r.cost_to_target == doctest::Approx(0.4));
}

TEST_CASE("unreachable thresholds are reported") {
    CHECK_THROWS_AS(recommend(LinearScorer{{0.5, 0.5}, 0.0}, Features{0.2, 0.2}, 1.01), InfeasibleRecourse);
}

TEST_CASE("an agent at or above the threshold is its own target") {
    const Recommendation r = recommend(LinearScorer{{0.5, 0.5}, 0.0}, Features{0.8, 0.8}, 0.7);
    CHECK(r.target == Features{0.8, 0.8});
    CHECK(r.cost_to_target == 0.0);
}

TEST_CASE("recommendations are valid on 1000 random instances") {
    Engine rng(100);
    for (int i = 0; i < 1000; ++i) {
        const Instance in = random_instance(rng);
        const Recommendation r = recommend(in.scorer, in.x, in.threshold);
        CHECK(in.scorer.score(r.target) >= in.threshold - 1e-9);
        for (double v : r.target) CHECK((v >= 0.0 && v <= 1.0));
        CHECK(r.cost_to_target == doctest::Approx(cost(in.x, r.target)).epsilon(1e-12));
    }
}

TEST_CASE("recommendations are minimal against the grid oracle") {
    Engine rng(200);
    for (int i = 0; i < 1000; ++i) {
        const Instance in = random_instance(rng);
        const Recommendation r = recommend(in.scorer, in.x, in.threshold);
        const auto oracle = grid_recourse_oracle(in.scorer, in.x, in.threshold);
        if (!oracle.feasible) continue;  // reachable only off the lattice
        CHECK(r.cost_to_target <= oracle.cost + 2e-3);
    }
}

TEST_CASE("folded-normal effort") {
    SUBCASE("oracle agrees with the closed form") {
        CHECK(folded_normal_mean_integral(0.0, 1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));
    }
    SUBCASE("e = 0 gives the half-normal mean") {
        Engine rng(7);
        double sum = 0.0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) sum += sample_effort(0.0, 1.0, rng);
        CHECK(std::abs(sum / n - 0.7979) < 0.003);
        const double scale = 0.03;
        sum = 0.0;
        for (int i = 0; i < n; ++i) sum += sample_effort(0.0, scale, rng);
        const double expect = std::sqrt(2.0 / std::numbers::pi) * scale;
        CHECK(std::abs(sum / n - expect) < 0.01 * expect);
    }
    SUBCASE("large e makes folding negligible") {
        Engine rng(8);
        double sum = 0.0;
        const int n = 200'000;
        for (int i = 0; i < n; ++i) sum += sample_effort(10.0, 1.0, rng);
        CHECK(std::abs(sum / n - 10.0) < 0.05);
    }
    SUBCASE("mean tracks the integration oracle at the calibrated location") {
        Engine rng(9);
        double sum = 0.0;
        const int n = 400'000;
        for (int i = 0; i < n; ++i) {
            const double e = sample_effort(1.0, 0.5, rng);
            CHECK_GE(e, 0.0);
            sum += e;
        }
        CHECK(sum / n == doctest::Approx(folded_normal_mean_integral(0.5, 0.5)).epsilon(0.01));
    }
}

TEST_CASE("adaptation in cap mode") {
    const LinearScorer s{{0.5, 0.5}, 0.0};
    Agent a;
    a.features = {0.0, 0.0};
    Recommendation r;
    r.target = {0.7, 0.7};
    r.cost_to_target = cost(a.features, r.target);

    SUBCASE("partial step along the unit direction") {
        const double moved = adapt(a, r, 0.2, Adaptation::CapAtRecommendation);
        CHECK(moved == doctest::Approx(0.2));
        CHECK(a.features[0] == doctest::Approx(0.141421).epsilon(1e-5));
        CHECK(a.features[1] == doctest::Approx(0.141421).epsilon(1e-5));
        CHECK(a.cumulative_cost == doctest::Approx(0.2));
    }
    SUBCASE("enough effort lands exactly on the target") {
        const double moved = adapt(a, r, 5.0, Adaptation::CapAtRecommendation);
        CHECK(moved == doctest::Approx(r.cost_to_target));
        CHECK(a.features == r.target);
        CHECK(s.score(a.features) >= 0.7 - 1e-12);
    }
    SUBCASE("zero effort does nothing") {
        CHECK(adapt(a, r, 0.0, Adaptation::CapAtRecommendation) == 0.0);
        CHECK(a.features == Features{0.0, 0.0});
    }
    SUBCASE("zero-length direction does nothing") {
        Recommendation here;
        here.target = a.features;
        CHECK(adapt(a, here, 1.0, Adaptation::CapAtRecommendation) == 0.0);
    }
}

TEST_CASE("adaptation in overshoot mode passes the target") {
    Agent a;
    a.features = {0.1, 0.1};
    Recommendation r;
    r.target = {0.2, 0.2};
    r.cost_to_target = cost(a.features, r.target);
    const double moved = adapt(a, r, 0.5, Adaptation::Overshoot);
    CHECK(moved == doctest::Approx(0.5));
    CHECK(a.features[0] > 0.2);
}

TEST_CASE("cap mode never increases the distance to the target") {
    Engine rng(300);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        Agent a;
        a.features = {u(rng), u(rng)};
        Recommendation r;
        r.target = {u(rng), u(rng)};
        r.cost_to_target = cost(a.features, r.target);
        const Features before = a.features;
        adapt(a, r, u(rng) * 0.5, Adaptation::CapAtRecommendation);
        CHECK(cost(a.features, r.target) <= cost(before, r.target) + 1e-15);
    }
}
