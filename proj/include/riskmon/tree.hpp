#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskmon/errors.hpp"

namespace riskmon {

using NodeId = int;

/// A value attached to every node of a tree, indexed by NodeId.
using AdaptedProcess = std::vector<double>;

struct NodeSpec {
    std::string id;
    std::optional<std::string> parent; // empty for the root
    double p = 0.0;                    // reference probability of the edge from parent
};

struct TreeSpec {
    int horizon = 0;
    std::vector<NodeSpec> nodes;
};

class TreeMeasure;

/// Finite filtered probability space: a rooted tree whose depth-t nodes are
/// the atoms of F_t, together with strictly positive reference transition
/// probabilities. Immutable after construction.
class ScenarioTree {
public:
    static ScenarioTree build(const TreeSpec& spec);

    int horizon() const noexcept { return horizon_; }
    int node_count() const noexcept { return static_cast<int>(parent_.size()); }

    NodeId root() const noexcept { return 0; }
    int depth(NodeId n) const { return depth_[check(n)]; }
    NodeId parent(NodeId n) const { return parent_[check(n)]; }
    const std::vector<NodeId>& children(NodeId n) const { return children_[check(n)]; }
    bool is_leaf(NodeId n) const { return children_[check(n)].empty(); }

    /// Atoms of F_t, in construction order.
    const std::vector<NodeId>& level(int t) const;
    const std::vector<NodeId>& leaves() const { return levels_.back(); }

    const std::string& label(NodeId n) const { return labels_[check(n)]; }
    NodeId index_of(const std::string& label) const;

    /// Reference transition vector at a non-leaf node (one entry per child).
    const std::vector<double>& ref_transition(NodeId n) const;

    TreeMeasure reference_measure() const;

    /// Depth-s descendants of a node (the node itself if depth(n) == s).
    std::vector<NodeId> descendants_at(NodeId n, int s) const;

private:
    ScenarioTree() = default;
    NodeId check(NodeId n) const;

    int horizon_ = 0;
    std::vector<NodeId> parent_;
    std::vector<int> depth_;
    std::vector<std::vector<NodeId>> children_;
    std::vector<std::vector<double>> ref_transition_;
    std::vector<std::vector<NodeId>> levels_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> index_;
};

/// Absolutely continuous measure Q << R, stored as per-node transition
/// vectors (entries >= 0, rows sum to 1). Node masses are derived path
/// products; absolute continuity is structural.
class TreeMeasure {
public:
    TreeMeasure(const ScenarioTree& tree, std::vector<std::vector<double>> transitions);

    const ScenarioTree& tree() const noexcept { return *tree_; }
    const std::vector<double>& transition(NodeId n) const;

    /// Q(node): product of transition entries along the root path.
    double node_mass(NodeId n) const { return mass_[n]; }

private:
    const ScenarioTree* tree_;
    std::vector<std::vector<double>> transitions_;
    std::vector<double> mass_;
};

double node_mass(const ScenarioTree& tree, const TreeMeasure& q, NodeId node);

/// Density Z^Q on leaves: Z(leaf) = Q(leaf)/R(leaf); zero elsewhere.
AdaptedProcess density(const ScenarioTree& tree, const TreeMeasure& q);

/// E_Q[X | F_t] for X given at depth s, with the zero-mass convention:
/// the value is exactly 0 on depth-t atoms of zero Q-mass.
/// Result is a full-size process; only depth-t entries are meaningful.
AdaptedProcess cond_expect(const ScenarioTree& tree, const TreeMeasure& q,
                           const AdaptedProcess& x, int s, int t);

/// True iff Q has positive mass on every node (E_R[Z^Q|F_t] > 0 for all t).
bool is_locally_equivalent(const ScenarioTree& tree, const TreeMeasure& q);

} // namespace riskmon
