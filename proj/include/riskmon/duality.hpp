#pragma once

#include <optional>
#include <span>
#include <vector>

#include "riskmon/risk.hpp"

namespace riskmon {

/// Minimal penalty of a one-step map at a node, evaluated at a transition
/// vector q: alpha_min(q) = sup_X { <q, -X> - rho(X|node) }. Closed forms
/// per variant; std::nullopt encodes +infinity.
std::optional<double> minimal_penalty_one_step(const OneStepRisk& risk, NodeId node,
                                               std::span<const double> q);

/// Direct numerical sup over X on the grid [-bound, bound]^children.
/// Always a lower bound for the minimal penalty.
double minimal_penalty_oracle(const OneStepRisk& risk, NodeId node, std::span<const double> q,
                              double bound, int grid_steps,
                              std::uint64_t budget = 10'000'000);

/// Per-atom minimal penalty of a measure Q at level t, with the zero-mass
/// convention: atoms of zero Q-mass report +infinity.
struct PenaltyEvaluation {
    int t = 0;
    std::vector<std::optional<double>> values; // indexed by NodeId; only depth-t entries meaningful
};
PenaltyEvaluation minimal_penalty(const OneStepRisk& risk, const TreeMeasure& q, int t);

struct RepresentationEntry {
    double primal = 0.0; // rho(X|node)
    double dual = 0.0;   // max over family of <q,-X> - alpha_min(q)
    double gap = 0.0;    // primal - dual (>= -1e-9 by weak duality)
};

/// Numerical check of the robust representation at one node: for each test
/// payoff, the best dual value over the given family of transition vectors.
std::vector<RepresentationEntry> verify_representation(
    const OneStepRisk& risk, NodeId node, const std::vector<std::vector<double>>& test_payoffs,
    const std::vector<std::vector<double>>& dual_family);

/// Acceptance-set membership per depth-t atom: rho_t(X) <= tol.
std::vector<bool> acceptance_member(const DynamicRiskMeasure& phi, const AdaptedProcess& x, int s,
                                    int t, double tol = 1e-9);

/// Conditional q-norm of a nonnegative leaf variable: (E_R[Z^q | F_t])^(1/q)
/// per depth-t atom. Full-size result, meaningful at depth t.
AdaptedProcess conditional_norm(const ScenarioTree& tree, const AdaptedProcess& z, double q, int t);

/// Coercivity gap of a penalty value assignment for a locally equivalent
/// measure: E_R[alpha] - a - b * E_R[(1/E_R[Z|F_t]) * E_R^(1/q)[Z^q | F_t]].
/// alpha holds depth-t atom values. Nonnegative gap means the (a,b) bound
/// holds for this measure.
double coercivity_gap(const ScenarioTree& tree, const TreeMeasure& measure,
                      const AdaptedProcess& alpha, int t, double a, double b, double q);

/// min sum lambda_i costs_i s.t. sum lambda_i points_i = target, lambda in
/// the simplex; std::nullopt iff target is outside the convex hull. Exact
/// basic-solution enumeration (dimensions here are tiny).
std::optional<double> min_cost_convex_combination(const std::vector<std::vector<double>>& points,
                                                  const std::vector<double>& costs,
                                                  const std::vector<double>& target);

} // namespace riskmon
