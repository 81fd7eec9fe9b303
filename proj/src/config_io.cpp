#include "recsim/config_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace recsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string join_reals(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_real(v[i]);
    }
    return out;
}

ConfigEntries flatten(const boost::property_tree::ptree& tree) {
    ConfigEntries out;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            out.emplace_back(name, trim(node.data()));
            continue;
        }
        const std::string prefix = name == "simulation" ? "" : name + ".";
        for (const auto& [key, leaf] : node) out.emplace_back(prefix + key, trim(leaf.data()));
    }
    return out;
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(field, field + ": expected a number, got '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw ConfigError(field, field + ": expected true or false, got '" + text + "'");
}

long long parse_integer(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(field, field + ": expected an integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(item, field));
    return out;
}

ConfigEntries config_entries(const SimulationConfig& c) {
    const auto& p = c.population;
    return {
        {"horizon", std::to_string(c.horizon)},
        {"k", std::to_string(c.k)},
        {"initial_population", std::to_string(c.initial_population)},
        {"arrivals_per_step", std::to_string(c.arrivals_per_step)},
        {"seed", std::to_string(c.seed)},
        {"dimension", std::to_string(c.dimension)},
        {"selection", std::string(to_string(c.selection))},
        {"retraining", std::string(to_string(c.retraining))},
        {"adaptation", std::string(to_string(c.adaptation))},
        {"effort_scale", format_real(c.effort_scale)},
        {"recourse_target", std::string(to_string(c.recourse_target))},
        {"scorer_weights", join_reals(c.scorer_weights)},
        {"scorer_bias", format_real(c.scorer_bias)},
        {"population.mu_high", format_real(p.mu_high)},
        {"population.mu_d", format_real(p.mu_d)},
        {"population.sigma", format_real(p.sigma)},
        {"population.q", format_real(p.q)},
        {"population.high_fraction", format_real(p.high_fraction)},
        {"population.e_a", format_real(p.e_a)},
        {"population.e_d", format_real(p.e_d)},
        {"population.generator_case", std::string(to_string(p.generator_case))},
        {"population.variance_ratio", format_real(p.variance_ratio)},
        {"grr.lambda", format_real(c.grr.lambda)},
        {"grr.learning_rate", format_real(c.grr.learning_rate)},
        {"grr.epochs", std::to_string(c.grr.epochs)},
        {"cda.l2", format_real(c.cda.l2)},
        {"cda.newton_iterations", std::to_string(c.cda.newton_iterations)},
        {"cda.rescore", c.cda.rescore ? "true" : "false"},
    };
}

void apply_setting(SimulationConfig& c, const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    auto& p = c.population;
    auto as_int = [&] { return static_cast<int>(parse_integer(v, key)); };
    auto as_real = [&] { return parse_real(v, key); };

    if (key == "horizon") c.horizon = as_int();
    else if (key == "k") c.k = as_int();
    else if (key == "initial_population") c.initial_population = as_int();
    else if (key == "arrivals_per_step") c.arrivals_per_step = as_int();
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_integer(v, key));
    else if (key == "dimension") c.dimension = as_int();
    else if (key == "selection") c.selection = parse_selection(v);
    else if (key == "retraining") c.retraining = parse_retraining(v);
    else if (key == "adaptation") c.adaptation = parse_adaptation(v);
    else if (key == "effort_scale") c.effort_scale = as_real();
    else if (key == "recourse_target") c.recourse_target = parse_recourse_target(v);
    else if (key == "scorer_weights") c.scorer_weights = parse_real_list(v, key);
    else if (key == "scorer_bias") c.scorer_bias = as_real();
    else if (key == "population.mu_high") p.mu_high = as_real();
    else if (key == "population.mu_d") p.mu_d = as_real();
    else if (key == "population.sigma") p.sigma = as_real();
    else if (key == "population.q") p.q = as_real();
    else if (key == "population.high_fraction") p.high_fraction = as_real();
    else if (key == "population.e_a") p.e_a = as_real();
    else if (key == "population.e_d") p.e_d = as_real();
    else if (key == "population.generator_case") p.generator_case = parse_generator_case(v);
    else if (key == "population.variance_ratio") p.variance_ratio = as_real();
    else if (key == "grr.lambda") c.grr.lambda = as_real();
    else if (key == "grr.learning_rate") c.grr.learning_rate = as_real();
    else if (key == "grr.epochs") c.grr.epochs = as_int();
    else if (key == "cda.l2") c.cda.l2 = as_real();
    else if (key == "cda.newton_iterations") c.cda.newton_iterations = as_int();
    else if (key == "cda.rescore") c.cda.rescore = parse_bool(v, key);
    else throw ConfigError(key, "unknown configuration key '" + key + "'");
}

ConfigEntries read_ini_text(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config", std::string("malformed config: ") + e.message() + " (line " +
                                        std::to_string(e.line()) + ")");
    }
    return flatten(tree);
}

ConfigEntries read_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return read_ini_text(buf.str());
}

std::string write_ini(const ConfigEntries& entries) {
    std::map<std::string, ConfigEntries> sections;
    std::vector<std::string> order;
    for (const auto& [key, value] : entries) {
        const auto dot = key.find('.');
        const std::string section = dot == std::string::npos ? "simulation" : key.substr(0, dot);
        const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
        if (!sections.count(section)) order.push_back(section);
        sections[section].emplace_back(leaf, value);
    }
    std::ostringstream out;
    for (const auto& name : order) {
        if (&name != &order.front()) out << '\n';
        out << '[' << name << "]\n";
        for (const auto& [leaf, value] : sections[name]) out << leaf << " = " << value << '\n';
    }
    return out.str();
}

}  // namespace recsim
