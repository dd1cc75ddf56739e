#include "riskmon/tree.hpp"

#include <algorithm>
#include <cmath>

namespace riskmon {

namespace {
constexpr double kRowSumTol = 1e-12;
}

NodeId ScenarioTree::check(NodeId n) const {
    if (n < 0 || n >= node_count())
        throw Error(errc::UnknownNode, "node index " + std::to_string(n) + " out of range");
    return n;
}

const std::vector<NodeId>& ScenarioTree::level(int t) const {
    if (t < 0 || t > horizon_)
        throw Error(errc::DepthOrder, "depth " + std::to_string(t) + " outside 0.." + std::to_string(horizon_));
    return levels_[t];
}

NodeId ScenarioTree::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw Error(errc::UnknownNode, "no node with id '" + label + "'");
    return it->second;
}

const std::vector<double>& ScenarioTree::ref_transition(NodeId n) const {
    if (is_leaf(n)) throw Error(errc::UnknownNode, "node '" + label(n) + "' is a leaf");
    return ref_transition_[n];
}

ScenarioTree ScenarioTree::build(const TreeSpec& spec) {
    if (spec.horizon < 1)
        throw Error(errc::NonUniformDepth, "horizon must be >= 1");
    if (spec.nodes.empty())
        throw Error(errc::OrphanNode, "tree has no nodes");

    ScenarioTree tree;
    tree.horizon_ = spec.horizon;
    const int n = static_cast<int>(spec.nodes.size());

    std::unordered_map<std::string, int> pos;
    int root_pos = -1;
    for (int i = 0; i < n; ++i) {
        const auto& ns = spec.nodes[i];
        if (!pos.emplace(ns.id, i).second)
            throw Error(errc::OrphanNode, "duplicate node id '" + ns.id + "'");
        if (!ns.parent) {
            if (root_pos >= 0) throw Error(errc::OrphanNode, "multiple roots");
            root_pos = i;
        }
    }
    if (root_pos < 0) throw Error(errc::OrphanNode, "no root node");

    // Assign ids in breadth-first order so that levels are contiguous and
    // children always carry larger indices than their parent.
    std::vector<std::vector<int>> spec_children(n);
    for (int i = 0; i < n; ++i) {
        const auto& ns = spec.nodes[i];
        if (!ns.parent) continue;
        auto it = pos.find(*ns.parent);
        if (it == pos.end())
            throw Error(errc::OrphanNode, "node '" + ns.id + "' has unknown parent '" + *ns.parent + "'");
        spec_children[it->second].push_back(i);
    }

    std::vector<int> order;
    order.reserve(n);
    order.push_back(root_pos);
    for (std::size_t head = 0; head < order.size(); ++head)
        for (int c : spec_children[order[head]]) order.push_back(c);
    if (static_cast<int>(order.size()) != n)
        throw Error(errc::OrphanNode, "some nodes are not reachable from the root");

    std::vector<int> node_of_pos(n, -1);
    for (int i = 0; i < n; ++i) node_of_pos[order[i]] = i;

    tree.parent_.assign(n, -1);
    tree.depth_.assign(n, 0);
    tree.children_.assign(n, {});
    tree.ref_transition_.assign(n, {});
    tree.labels_.assign(n, {});
    for (int i = 0; i < n; ++i) {
        const auto& ns = spec.nodes[order[i]];
        tree.labels_[i] = ns.id;
        tree.index_.emplace(ns.id, i);
        if (ns.parent) {
            int p = node_of_pos[pos.at(*ns.parent)];
            tree.parent_[i] = p;
            tree.depth_[i] = tree.depth_[p] + 1;
            if (tree.depth_[i] > spec.horizon)
                throw Error(errc::NonUniformDepth, "node '" + ns.id + "' exceeds horizon depth");
            tree.children_[p].push_back(i);
            tree.ref_transition_[p].push_back(ns.p);
        }
    }

    tree.levels_.assign(spec.horizon + 1, {});
    for (int i = 0; i < n; ++i) tree.levels_[tree.depth_[i]].push_back(i);

    for (int i = 0; i < n; ++i) {
        if (tree.children_[i].empty()) {
            if (tree.depth_[i] != spec.horizon)
                throw Error(errc::NonUniformDepth,
                            "leaf '" + tree.labels_[i] + "' at depth " + std::to_string(tree.depth_[i]) +
                                ", expected " + std::to_string(spec.horizon));
        } else {
            double sum = 0.0;
            for (double p : tree.ref_transition_[i]) {
                if (p <= 0.0)
                    throw Error(errc::BadProbability,
                                "reference transition entry " + std::to_string(p) + " at node '" +
                                    tree.labels_[i] + "' must be > 0");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw Error(errc::BadProbability,
                            "reference transitions at node '" + tree.labels_[i] + "' sum to " +
                                std::to_string(sum));
        }
    }
    return tree;
}

TreeMeasure ScenarioTree::reference_measure() const {
    return TreeMeasure(*this, ref_transition_);
}

std::vector<NodeId> ScenarioTree::descendants_at(NodeId n, int s) const {
    check(n);
    if (s < depth_[n] || s > horizon_)
        throw Error(errc::DepthOrder, "target depth outside node's subtree");
    std::vector<NodeId> cur{n};
    for (int d = depth_[n]; d < s; ++d) {
        std::vector<NodeId> next;
        for (NodeId m : cur)
            next.insert(next.end(), children_[m].begin(), children_[m].end());
        cur = std::move(next);
    }
    return cur;
}

TreeMeasure::TreeMeasure(const ScenarioTree& tree, std::vector<std::vector<double>> transitions)
    : tree_(&tree), transitions_(std::move(transitions)) {
    if (static_cast<int>(transitions_.size()) != tree.node_count())
        throw Error(errc::BadProbability, "transition table size does not match tree");
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        const auto& row = transitions_[n];
        if (tree.is_leaf(n)) {
            if (!row.empty())
                throw Error(errc::BadProbability, "transition row at leaf '" + tree.label(n) + "'");
            continue;
        }
        if (row.size() != tree.children(n).size())
            throw Error(errc::BadProbability, "transition row arity mismatch at '" + tree.label(n) + "'");
        double sum = 0.0;
        for (double p : row) {
            if (p < 0.0)
                throw Error(errc::BadProbability, "negative transition entry at '" + tree.label(n) + "'");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw Error(errc::BadProbability,
                        "transition row at '" + tree.label(n) + "' sums to " + std::to_string(sum));
    }
    mass_.assign(tree.node_count(), 0.0);
    mass_[tree.root()] = 1.0;
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        if (tree.is_leaf(n)) continue;
        const auto& kids = tree.children(n);
        for (std::size_t k = 0; k < kids.size(); ++k)
            mass_[kids[k]] = mass_[n] * transitions_[n][k];
    }
}

const std::vector<double>& TreeMeasure::transition(NodeId n) const {
    if (tree_->is_leaf(n)) throw Error(errc::UnknownNode, "node '" + tree_->label(n) + "' is a leaf");
    return transitions_[n];
}

double node_mass(const ScenarioTree& tree, const TreeMeasure& q, NodeId node) {
    if (node < 0 || node >= tree.node_count())
        throw Error(errc::UnknownNode, "node index out of range");
    return q.node_mass(node);
}

AdaptedProcess density(const ScenarioTree& tree, const TreeMeasure& q) {
    TreeMeasure r = tree.reference_measure();
    AdaptedProcess z(tree.node_count(), 0.0);
    for (NodeId leaf : tree.leaves())
        z[leaf] = q.node_mass(leaf) / r.node_mass(leaf);
    return z;
}

AdaptedProcess cond_expect(const ScenarioTree& tree, const TreeMeasure& q,
                           const AdaptedProcess& x, int s, int t) {
    if (t >= s) throw Error(errc::DepthOrder, "require t < s");
    if (s > tree.horizon() || t < 0) throw Error(errc::DepthOrder, "depths outside 0..T");
    if (static_cast<int>(x.size()) != tree.node_count())
        throw Error(errc::IncompleteProcess, "process size does not match tree");

    std::vector<double> acc(tree.node_count(), 0.0);
    for (NodeId n : tree.level(s)) acc[n] = q.node_mass(n) * x[n];
    for (int d = s - 1; d >= t; --d)
        for (NodeId n : tree.level(d))
            for (NodeId c : tree.children(n)) acc[n] += acc[c];

    AdaptedProcess out(tree.node_count(), 0.0);
    for (NodeId n : tree.level(t)) {
        double m = q.node_mass(n);
        out[n] = m > 0.0 ? acc[n] / m : 0.0;
    }
    return out;
}

bool is_locally_equivalent(const ScenarioTree& tree, const TreeMeasure& q) {
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (q.node_mass(n) <= 0.0) return false;
    return true;
}

} // namespace riskmon
