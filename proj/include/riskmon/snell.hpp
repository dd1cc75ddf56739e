#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskmon/risk.hpp"

namespace riskmon {

/// A stopping time of the filtration, encoded as an antichain of nodes that
/// covers every path from depth start_depth down to the horizon.
struct StoppingRegion {
    std::vector<NodeId> stop_nodes;
    int start_depth = 0;
};

/// Throws InconsistentInputs unless the region is a covering antichain at
/// depths >= start_depth.
void validate_region(const ScenarioTree& tree, const StoppingRegion& region);

/// Stopping depth per leaf: depth of the unique stop node on each leaf's
/// root path. Full-size vector, meaningful at leaves.
std::vector<int> stop_depth_per_leaf(const ScenarioTree& tree, const StoppingRegion& region);

/// Upper Snell envelope of a nonnegative payoff process:
/// U_T = H_T, U_t = H_t v rho_t(-U_{t+1}). Defined at every node.
AdaptedProcess upper_snell(const DynamicRiskMeasure& phi, const AdaptedProcess& h, int threads = 1);

/// Minimal stopping time of maximal risk from depth t: first node on each
/// path where H equals U (relative tolerance 1e-9 * max(1, |U|)).
StoppingRegion maximal_risk_time(const ScenarioTree& tree, const AdaptedProcess& u,
                                 const AdaptedProcess& h, int t);

/// Number of stopping times from depth t (product over depth-t atoms of the
/// per-subtree counts N(node) = 1 + prod N(child)). Saturates at 2^63-1.
std::uint64_t count_stopping_times(const ScenarioTree& tree, int t);

/// Every stopping time >= t, exactly once. Throws BudgetExceeded upfront if
/// the count exceeds the budget.
std::vector<StoppingRegion> enumerate_stopping_times(const ScenarioTree& tree, int t,
                                                     std::uint64_t budget = 1'000'000);

/// H_theta as an F_T-measurable variable: each leaf takes H at its stop
/// ancestor. Full-size vector, meaningful at leaves.
AdaptedProcess stopped_payoff(const ScenarioTree& tree, const AdaptedProcess& h,
                              const StoppingRegion& region);

/// rho_t(-H_theta) at every depth-t atom, by subtree recursion.
AdaptedProcess risk_of_stopped(const DynamicRiskMeasure& phi, const AdaptedProcess& h,
                               const StoppingRegion& region, int t);

struct BruteForceResult {
    AdaptedProcess values;  // per depth-t atom: max over theta of rho_t(-H_theta)
    StoppingRegion argmax;  // per-atom maximizers glued into one region
};

/// Exhaustive sup over stopping times >= t; the oracle for the envelope.
/// Atom-wise maxima (maximizers may differ per atom).
BruteForceResult brute_force_max_risk(const DynamicRiskMeasure& phi, const AdaptedProcess& h, int t,
                                      std::uint64_t budget = 1'000'000, int threads = 1);

struct PriorSnell {
    AdaptedProcess envelope;
    StoppingRegion tau;
};

/// Classical Snell envelope and minimal optimal stopping time under a
/// single locally equivalent measure P.
PriorSnell per_prior_snell(const ScenarioTree& tree, const TreeMeasure& p, const AdaptedProcess& h,
                           int t);

struct DecompositionReport {
    bool pass = false;
    bool sampled = false;   // true when the pasted family was subsampled
    std::uint64_t family_size = 0;
    std::string witness;    // offending leaf on failure
    std::vector<int> tau_up_depth;      // per leaf
    std::vector<int> max_prior_depth;   // per leaf
};

/// Checks tau_up = pathwise max of tau^P over all pastings of the
/// node-rectangular prior set (one listed vector chosen per node).
DecompositionReport coherent_decomposition_check(
    const ScenarioTree& tree, const std::vector<std::vector<std::vector<double>>>& priors,
    const AdaptedProcess& h, int t, std::uint64_t budget = 100'000, std::uint64_t seed = 0);

struct MonitorComparison {
    int direction = 0;          // +1: a <= b one-step, -1: b <= a, 0: no order
    bool envelope_order_ok = false;
    bool tau_order_ok = false;
    AdaptedProcess envelope_a;
    AdaptedProcess envelope_b;
    StoppingRegion tau_a;
    StoppingRegion tau_b;
    std::string witness;
};

/// Detects the one-step dominance direction on sampled payoffs, then checks
/// the induced envelope and stopping-time orderings (the smaller risk
/// measure's envelope touches H sooner, so it stops no later pathwise).
/// With direction 0 the ordering checks are skipped.
MonitorComparison compare_monitors(const DynamicRiskMeasure& a, const DynamicRiskMeasure& b,
                                   const AdaptedProcess& h, int samples = 64,
                                   std::uint64_t seed = 0);

} // namespace riskmon
