#include "recsim/types.hpp"

#include "recsim/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace recsim {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::string_view (&names)[N], const char* what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<E>(i);
    }
    throw ConfigError(what, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::string_view kGroupNames[] = {"advantaged", "disadvantaged"};
constexpr std::string_view kOutcomeNames[] = {"positive", "negative"};
constexpr std::string_view kSelectionNames[] = {"topk", "cns"};
constexpr std::string_view kRetrainingNames[] = {"none", "cda", "grr"};
constexpr std::string_view kAdaptationNames[] = {"cap", "overshoot"};
constexpr std::string_view kGeneratorNames[] = {"equal_var_diff_means", "diff_var_equal_means",
                                                "diff_var_diff_means"};
constexpr std::string_view kRecourseTargetNames[] = {"global", "group", "boundary"};

void require(bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

}  // namespace

std::string_view to_string(Group g) { return kGroupNames[static_cast<int>(g)]; }
std::string_view to_string(Outcome o) { return kOutcomeNames[static_cast<int>(o)]; }
std::string_view to_string(SelectionRule s) { return kSelectionNames[static_cast<int>(s)]; }
std::string_view to_string(Retraining r) { return kRetrainingNames[static_cast<int>(r)]; }
std::string_view to_string(Adaptation a) { return kAdaptationNames[static_cast<int>(a)]; }
std::string_view to_string(GeneratorCase c) { return kGeneratorNames[static_cast<int>(c)]; }
std::string_view to_string(RecourseTarget r) { return kRecourseTargetNames[static_cast<int>(r)]; }

Group parse_group(std::string_view s) { return parse_enum<Group>(s, kGroupNames, "group"); }
Outcome parse_outcome(std::string_view s) { return parse_enum<Outcome>(s, kOutcomeNames, "outcome"); }
SelectionRule parse_selection(std::string_view s) {
    return parse_enum<SelectionRule>(s, kSelectionNames, "selection");
}
Retraining parse_retraining(std::string_view s) {
    return parse_enum<Retraining>(s, kRetrainingNames, "retraining");
}
Adaptation parse_adaptation(std::string_view s) {
    return parse_enum<Adaptation>(s, kAdaptationNames, "adaptation");
}
GeneratorCase parse_generator_case(std::string_view s) {
    return parse_enum<GeneratorCase>(s, kGeneratorNames, "population.generator_case");
}

RecourseTarget parse_recourse_target(std::string_view s) {
    return parse_enum<RecourseTarget>(s, kRecourseTargetNames, "recourse_target");
}

double derive_mu_a(const PopulationSpec& spec) { return spec.mu_d + spec.q * spec.sigma; }

void PopulationSpec::validate() const {
    require(std::isfinite(mu_high), "population.mu_high", "mu_high must be finite");
    require(std::isfinite(mu_d), "population.mu_d", "mu_d must be finite");
    require(sigma > 0.0 && std::isfinite(sigma), "population.sigma", "sigma must be positive");
    require(q >= 0.0 && std::isfinite(q), "population.q", "q must be non-negative");
    require(high_fraction >= 0.0 && high_fraction <= 1.0, "population.high_fraction",
            "high_fraction must lie in [0,1]");
    require(e_a >= 0.0 && std::isfinite(e_a), "population.e_a", "e_a must be non-negative");
    require(e_d >= 0.0 && std::isfinite(e_d), "population.e_d", "e_d must be non-negative");
    require(variance_ratio > 0.0 && std::isfinite(variance_ratio), "population.variance_ratio",
            "variance_ratio must be positive");
    if (generator_case == GeneratorCase::EqualVarDiffMeans) {
        require(derive_mu_a(*this) < mu_high, "population.q",
                "mu_d + q*sigma must stay below mu_high");
    }
}

void SimulationConfig::validate() const {
    require(horizon >= 0, "horizon", "horizon must be non-negative");
    require(k > 0, "k", "k must be positive");
    require(initial_population > 0, "initial_population", "initial_population must be positive");
    require(k <= initial_population, "k", "k must not exceed initial_population");
    require(arrivals_per_step >= 0, "arrivals_per_step", "arrivals_per_step must be non-negative");
    require(dimension >= 1, "dimension", "dimension must be positive");
    require(effort_scale >= 0.0 && std::isfinite(effort_scale), "effort_scale",
            "effort_scale must be non-negative");
    require(static_cast<int>(scorer_weights.size()) == dimension, "scorer_weights",
            "scorer_weights must have one entry per feature");
    bool any_nonzero = false;
    for (double w : scorer_weights) {
        require(std::isfinite(w), "scorer_weights", "scorer_weights must be finite");
        any_nonzero = any_nonzero || w != 0.0;
    }
    require(any_nonzero, "scorer_weights", "scorer_weights must not all be zero");
    require(std::isfinite(scorer_bias), "scorer_bias", "scorer_bias must be finite");
    require(grr.lambda >= 0.0, "grr.lambda", "grr.lambda must be non-negative");
    require(grr.learning_rate > 0.0, "grr.learning_rate", "grr.learning_rate must be positive");
    require(grr.epochs >= 0, "grr.epochs", "grr.epochs must be non-negative");
    require(cda.l2 > 0.0, "cda.l2", "cda.l2 must be positive");
    require(cda.newton_iterations > 0, "cda.newton_iterations",
            "cda.newton_iterations must be positive");
    population.validate();
}

std::string SimulationConfig::canonical_text() const {
    std::ostringstream out;
    for (const auto& [key, value] : config_entries(*this)) {
        out << key << " = " << value << '\n';
    }
    return out.str();
}

std::uint64_t SimulationConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace recsim
