#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "riskmon/duality.hpp"
#include "riskmon/snell.hpp"

namespace riskmon {

// File schemas.
//
// Tree:    {"horizon": T, "nodes": [{"id": "...", "parent": "..."|null, "p": prob}, ...]}
//          "p" is the reference probability of the edge from the parent; the
//          root omits it (or sets null).
// Payoff:  {"<node id>": value, ...} covering every node.
// Measure: {"transitions": {"<node id>": [probs...], ...}}; nodes not listed
//          fall back to the reference transition.
// Risk:    {"kind": "expectation"|"entropic"|"worstcase"|"penalized", ...}
//          replicated across all levels, or {"steps": [<spec>, ...]} with
//          exactly T entries.

TreeSpec parse_tree_spec(const nlohmann::json& j);
nlohmann::json tree_spec_to_json(const ScenarioTree& tree);

AdaptedProcess parse_payoff(const nlohmann::json& j, const ScenarioTree& tree);
nlohmann::json payoff_to_json(const ScenarioTree& tree, const AdaptedProcess& h);

TreeMeasure parse_measure(const nlohmann::json& j, const ScenarioTree& tree);
OneStepSpec parse_one_step_spec(const nlohmann::json& j, const ScenarioTree& tree);
DynamicRiskMeasure parse_risk(const nlohmann::json& j, const ScenarioTree& tree);

nlohmann::json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Formats with 12 significant digits (the report number contract).
std::string format_number(double v);

std::string envelope_report_csv(const ScenarioTree& tree, const AdaptedProcess& h,
                                const AdaptedProcess& u, const StoppingRegion& tau);
nlohmann::json envelope_report_json(const ScenarioTree& tree, const AdaptedProcess& h,
                                    const AdaptedProcess& u, const StoppingRegion& tau);

std::string penalty_report_csv(const ScenarioTree& tree, const PenaltyEvaluation& eval,
                               const std::vector<std::optional<double>>& oracle = {});

struct BinomialGenSpec {
    int horizon = 1;
    double initial = 100.0;
    double up = 1.2;
    double down = 0.8;
    double strike = 100.0;
    std::string kind = "put"; // put | call
    double up_probability = 0.5;
};

struct GeneratedInstance {
    TreeSpec tree;
    std::vector<std::pair<std::string, double>> payoff; // node id -> intrinsic value
};

/// Non-recombining binomial tree with American-style intrinsic payoff.
GeneratedInstance generate_binomial(const BinomialGenSpec& spec);

} // namespace riskmon
