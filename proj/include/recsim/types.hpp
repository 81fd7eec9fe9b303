#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace recsim {

using AgentId = std::int64_t;
using Timestep = int;
using Features = std::vector<double>;

enum class Group : std::uint8_t { Advantaged, Disadvantaged };
enum class Outcome : std::uint8_t { Positive, Negative };
enum class SelectionRule : std::uint8_t { TopK, CNS };
enum class Retraining : std::uint8_t { None, CDA, GRR };
enum class Adaptation : std::uint8_t { CapAtRecommendation, Overshoot };
enum class GeneratorCase : std::uint8_t { EqualVarDiffMeans, DiffVarEqualMeans, DiffVarDiffMeans };
/// Score a rejected agent is pointed at: the overall cutoff; the cutoff of the
/// agent's own group (overall cutoff if the group got no seat); or the
/// retrained classifier's decision boundary (overall cutoff until one exists).
enum class RecourseTarget : std::uint8_t { Global, Group, Boundary };

std::string_view to_string(Group g);
std::string_view to_string(Outcome o);
std::string_view to_string(SelectionRule s);
std::string_view to_string(Retraining r);
std::string_view to_string(Adaptation a);
std::string_view to_string(GeneratorCase c);
std::string_view to_string(RecourseTarget r);

Group parse_group(std::string_view s);
Outcome parse_outcome(std::string_view s);
SelectionRule parse_selection(std::string_view s);
Retraining parse_retraining(std::string_view s);
Adaptation parse_adaptation(std::string_view s);
GeneratorCase parse_generator_case(std::string_view s);
RecourseTarget parse_recourse_target(std::string_view s);

/// Raised for any invalid configuration value; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct Agent {
    AgentId id = 0;
    Group group = Group::Advantaged;
    Features features;
    double effort_mean = 0.0;
    Timestep entry_time = 0;
    std::optional<Timestep> first_negative_time;
    std::optional<Timestep> exit_time;
    double cumulative_cost = 0.0;

    bool operator==(const Agent&) const = default;
};

/// Bimodal feature generator: high performers ~ N(mu_high, sigma^2) in both
/// groups, lower performers centred on mu_a (advantaged) or mu_d.
struct PopulationSpec {
    double mu_high = 0.7;
    double mu_d = 0.3;
    double sigma = 0.065;
    double q = 0.0;
    double high_fraction = 0.5;
    /// Folded-normal effort location, in units of effort_scale.
    double e_a = 2.0;
    double e_d = 2.0;
    GeneratorCase generator_case = GeneratorCase::EqualVarDiffMeans;
    /// Disadvantaged/advantaged standard-deviation ratio for the DiffVar cases.
    double variance_ratio = 2.0;

    void validate() const;
};

/// mu_a = mu_d + q * sigma. Never stored.
double derive_mu_a(const PopulationSpec& spec);

struct GrrOptions {
    double lambda = 1.0;
    double learning_rate = 0.05;
    int epochs = 200;
};

struct CdaOptions {
    double l2 = 1e-3;
    int newton_iterations = 50;
    /// Rank with the retrained classifier (true) or keep ranking with the
    /// configured scorer and use the classifier only for recourse (false).
    bool rescore = true;
};

struct SimulationConfig {
    int horizon = 20;
    int k = 100;
    int initial_population = 1000;
    int arrivals_per_step = 100;
    std::uint64_t seed = 0;
    int dimension = 2;
    SelectionRule selection = SelectionRule::TopK;
    Retraining retraining = Retraining::None;
    Adaptation adaptation = Adaptation::CapAtRecommendation;
    /// Effort per step is |N(e, 1)| * effort_scale.
    double effort_scale = 0.03;
    RecourseTarget recourse_target = RecourseTarget::Global;
    std::vector<double> scorer_weights{0.5, 0.5};
    double scorer_bias = 0.0;
    PopulationSpec population;
    GrrOptions grr;
    CdaOptions cda;

    void validate() const;

    /// Canonical `key = value` lines, one per field, in a fixed order.
    std::string canonical_text() const;

    /// 64-bit FNV-1a of canonical_text().
    std::uint64_t hash() const;
};

std::string hash_hex(std::uint64_t h);

/// Advantaged count for a batch of n: floor(n/2); the odd agent is disadvantaged.
constexpr int advantaged_share(int n) { return n / 2; }

}  // namespace recsim
