#pragma once

#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "riskmon/tree.hpp"

namespace riskmon {

// One-step conditional risk mappings. Each variant evaluates, at a non-leaf
// node, the risk of a payoff given by its values on the node's children.

struct ExpectationStep {
    TreeMeasure measure; // rho(X|n) = E_measure[-X | n]
};

struct EntropicStep {
    double gamma; // > 0
    TreeMeasure base; // rho(X|n) = (1/gamma) ln sum_c p_c exp(-gamma X_c)
};

struct WorstCaseStep {
    // Per non-leaf node: finite list of transition vectors.
    // rho(X|n) = max over listed q of sum_c q_c (-X_c)
    std::vector<std::vector<std::vector<double>>> priors;
};

struct PenalizedEntry {
    std::vector<double> q;
    double beta = 0.0;
};

struct PenalizedStep {
    // rho(X|n) = max over entries of { sum_c q_c (-X_c) - beta }
    std::vector<std::vector<PenalizedEntry>> entries;
};

using OneStepSpec = std::variant<ExpectationStep, EntropicStep, WorstCaseStep, PenalizedStep>;

class OneStepRisk {
public:
    OneStepRisk(const ScenarioTree& tree, OneStepSpec spec);

    const ScenarioTree& tree() const noexcept { return *tree_; }
    const OneStepSpec& spec() const noexcept { return spec_; }

    double eval(NodeId node, std::span<const double> child_values) const;

    /// Penalized specs are shifted at ingestion so min beta = 0 per node
    /// (normalization rho(0) = 0); the applied shift is recorded here.
    /// Zero for all other variants.
    double normalization_shift(NodeId node) const;

private:
    const ScenarioTree* tree_;
    OneStepSpec spec_;
    std::vector<double> shift_;
};

/// Time-consistent dynamical risk measure: one-step maps for t = 0..T-1
/// composed backward (recursiveness holds by construction).
class DynamicRiskMeasure {
public:
    DynamicRiskMeasure(const ScenarioTree& tree, std::vector<OneStepRisk> steps);

    /// Replicate one spec across all T levels.
    static DynamicRiskMeasure uniform(const ScenarioTree& tree, const OneStepSpec& spec);

    const ScenarioTree& tree() const noexcept { return *tree_; }
    const OneStepRisk& step(int t) const { return steps_.at(t); }

    /// rho_t(X) for X given at depth s, t <= s. Full-size result; only
    /// depth-t entries are meaningful.
    AdaptedProcess eval(const AdaptedProcess& x, int s, int t) const;

private:
    const ScenarioTree* tree_;
    std::vector<OneStepRisk> steps_;
};

struct AxiomCheck {
    double worst_violation = 0.0;
    bool pass = true;
    std::string witness; // description of the worst sampled instance
};

struct AxiomReport {
    std::map<std::string, AxiomCheck> axioms;
    bool all_pass(double tol = 1e-9) const;
};

/// Randomized verification of the conditional risk-measure axioms for the
/// dynamical measure built by replicating `spec` across all levels:
/// cash invariance, monotonicity, conditional convexity, normalization,
/// localization.
AxiomReport check_axioms(const OneStepSpec& spec, const ScenarioTree& tree,
                         int sample_count, std::uint64_t seed);

} // namespace riskmon
