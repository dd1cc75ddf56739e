#include "riskmon/snell.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <thread>

namespace riskmon {

namespace {

bool values_equal(double h, double u) {
    return std::abs(h - u) <= 1e-9 * std::max(1.0, std::abs(u));
}

void parallel_over(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const int used = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(used);
    for (int w = 0; w < used; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += used) body(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace

void validate_region(const ScenarioTree& tree, const StoppingRegion& region) {
    std::vector<char> flag(tree.node_count(), 0);
    for (NodeId n : region.stop_nodes) {
        if (n < 0 || n >= tree.node_count())
            throw Error(errc::UnknownNode, "stop node out of range");
        if (tree.depth(n) < region.start_depth)
            throw Error(errc::InconsistentInputs, "stop node above start depth");
        if (flag[n]) throw Error(errc::InconsistentInputs, "duplicate stop node");
        flag[n] = 1;
    }
    // Exactly one stop node on every path from depth start_depth to a leaf:
    // this enforces both the antichain and the covering property.
    for (NodeId leaf : tree.leaves()) {
        int hits = 0;
        for (NodeId n = leaf; n >= 0 && tree.depth(n) >= region.start_depth; n = tree.parent(n))
            hits += flag[n];
        if (hits != 1)
            throw Error(errc::InconsistentInputs,
                        "path through leaf '" + tree.label(leaf) + "' meets " + std::to_string(hits) +
                            " stop nodes");
    }
}

std::vector<int> stop_depth_per_leaf(const ScenarioTree& tree, const StoppingRegion& region) {
    std::vector<char> flag(tree.node_count(), 0);
    for (NodeId n : region.stop_nodes) flag[n] = 1;
    std::vector<int> out(tree.node_count(), -1);
    for (NodeId leaf : tree.leaves())
        for (NodeId n = leaf; n >= 0 && tree.depth(n) >= region.start_depth; n = tree.parent(n))
            if (flag[n]) {
                out[leaf] = tree.depth(n);
                break;
            }
    return out;
}

AdaptedProcess upper_snell(const DynamicRiskMeasure& phi, const AdaptedProcess& h, int threads) {
    const ScenarioTree& tree = phi.tree();
    if (static_cast<int>(h.size()) != tree.node_count())
        throw Error(errc::IncompleteProcess, "payoff size does not match tree");
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (h[n] < 0.0)
            throw Error(errc::NegativePayoff, "payoff at '" + tree.label(n) + "' is negative");

    AdaptedProcess u(tree.node_count(), 0.0);
    for (NodeId n : tree.leaves()) u[n] = h[n];
    for (int d = tree.horizon() - 1; d >= 0; --d) {
        const auto& level = tree.level(d);
        parallel_over(level.size(), threads, [&](std::size_t i) {
            NodeId n = level[i];
            const auto& kids = tree.children(n);
            std::vector<double> vals(kids.size());
            for (std::size_t k = 0; k < kids.size(); ++k) vals[k] = -u[kids[k]];
            u[n] = std::max(h[n], phi.step(d).eval(n, vals));
        });
    }
    return u;
}

StoppingRegion maximal_risk_time(const ScenarioTree& tree, const AdaptedProcess& u,
                                 const AdaptedProcess& h, int t) {
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (tree.depth(n) >= t && h[n] - u[n] > 1e-9 * std::max(1.0, std::abs(u[n])))
            throw Error(errc::InconsistentInputs,
                        "envelope below payoff at '" + tree.label(n) + "'");
    StoppingRegion region;
    region.start_depth = t;
    std::vector<NodeId> frontier = tree.level(t);
    while (!frontier.empty()) {
        std::vector<NodeId> next;
        for (NodeId n : frontier) {
            if (values_equal(h[n], u[n]))
                region.stop_nodes.push_back(n);
            else
                next.insert(next.end(), tree.children(n).begin(), tree.children(n).end());
        }
        frontier = std::move(next);
    }
    std::sort(region.stop_nodes.begin(), region.stop_nodes.end());
    return region;
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / 2 / a)
        return std::numeric_limits<std::uint64_t>::max() / 2;
    return a * b;
}

std::uint64_t subtree_count(const ScenarioTree& tree, NodeId n) {
    if (tree.is_leaf(n)) return 1;
    std::uint64_t prod = 1;
    for (NodeId c : tree.children(n)) prod = sat_mul(prod, subtree_count(tree, c));
    return prod == std::numeric_limits<std::uint64_t>::max() / 2 ? prod : prod + 1;
}

// All stopping rules for the subtree rooted at n: either stop at n or
// combine one rule per child.
std::vector<std::vector<NodeId>> subtree_rules(const ScenarioTree& tree, NodeId n) {
    std::vector<std::vector<NodeId>> out;
    out.push_back({n});
    if (tree.is_leaf(n)) return out;
    std::vector<std::vector<std::vector<NodeId>>> per_child;
    for (NodeId c : tree.children(n)) per_child.push_back(subtree_rules(tree, c));
    std::vector<std::size_t> odo(per_child.size(), 0);
    while (true) {
        std::vector<NodeId> combined;
        for (std::size_t k = 0; k < per_child.size(); ++k)
            combined.insert(combined.end(), per_child[k][odo[k]].begin(), per_child[k][odo[k]].end());
        out.push_back(std::move(combined));
        std::size_t k = 0;
        for (; k < per_child.size(); ++k) {
            if (++odo[k] < per_child[k].size()) break;
            odo[k] = 0;
        }
        if (k == per_child.size()) break;
    }
    return out;
}

} // namespace

std::uint64_t count_stopping_times(const ScenarioTree& tree, int t) {
    std::uint64_t total = 1;
    for (NodeId n : tree.level(t)) total = sat_mul(total, subtree_count(tree, n));
    return total;
}

std::vector<StoppingRegion> enumerate_stopping_times(const ScenarioTree& tree, int t,
                                                     std::uint64_t budget) {
    if (count_stopping_times(tree, t) > budget)
        throw Error(errc::BudgetExceeded, "stopping-time count exceeds budget");
    std::vector<std::vector<std::vector<NodeId>>> per_atom;
    for (NodeId n : tree.level(t)) per_atom.push_back(subtree_rules(tree, n));

    std::vector<StoppingRegion> out;
    std::vector<std::size_t> odo(per_atom.size(), 0);
    while (true) {
        StoppingRegion region;
        region.start_depth = t;
        for (std::size_t k = 0; k < per_atom.size(); ++k)
            region.stop_nodes.insert(region.stop_nodes.end(), per_atom[k][odo[k]].begin(),
                                     per_atom[k][odo[k]].end());
        out.push_back(std::move(region));
        std::size_t k = 0;
        for (; k < per_atom.size(); ++k) {
            if (++odo[k] < per_atom[k].size()) break;
            odo[k] = 0;
        }
        if (k == per_atom.size()) break;
    }
    return out;
}

AdaptedProcess stopped_payoff(const ScenarioTree& tree, const AdaptedProcess& h,
                              const StoppingRegion& region) {
    validate_region(tree, region);
    std::vector<char> flag(tree.node_count(), 0);
    for (NodeId n : region.stop_nodes) flag[n] = 1;
    AdaptedProcess out(tree.node_count(), 0.0);
    for (NodeId leaf : tree.leaves())
        for (NodeId n = leaf; n >= 0; n = tree.parent(n))
            if (flag[n]) {
                out[leaf] = h[n];
                break;
            }
    return out;
}

namespace {

double stopped_risk_at(const DynamicRiskMeasure& phi, const AdaptedProcess& h,
                       const std::vector<char>& flag, NodeId n) {
    if (flag[n]) return h[n];
    const auto& kids = phi.tree().children(n);
    std::vector<double> vals(kids.size());
    for (std::size_t k = 0; k < kids.size(); ++k)
        vals[k] = -stopped_risk_at(phi, h, flag, kids[k]);
    return phi.step(phi.tree().depth(n)).eval(n, vals);
}

} // namespace

AdaptedProcess risk_of_stopped(const DynamicRiskMeasure& phi, const AdaptedProcess& h,
                               const StoppingRegion& region, int t) {
    const ScenarioTree& tree = phi.tree();
    validate_region(tree, region);
    std::vector<char> flag(tree.node_count(), 0);
    for (NodeId n : region.stop_nodes) flag[n] = 1;
    AdaptedProcess out(tree.node_count(), 0.0);
    for (NodeId n : tree.level(t)) out[n] = stopped_risk_at(phi, h, flag, n);
    return out;
}

BruteForceResult brute_force_max_risk(const DynamicRiskMeasure& phi, const AdaptedProcess& h, int t,
                                      std::uint64_t budget, int threads) {
    const ScenarioTree& tree = phi.tree();
    if (count_stopping_times(tree, t) > budget)
        throw Error(errc::BudgetExceeded, "stopping-time count exceeds budget");

    BruteForceResult result;
    result.values.assign(tree.node_count(), 0.0);
    result.argmax.start_depth = t;

    const auto& atoms = tree.level(t);
    std::vector<std::vector<NodeId>> best_rule(atoms.size());
    parallel_over(atoms.size(), threads, [&](std::size_t i) {
        NodeId atom = atoms[i];
        auto rules = subtree_rules(tree, atom);
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        std::vector<char> flag(tree.node_count(), 0);
        for (std::size_t r = 0; r < rules.size(); ++r) {
            for (NodeId n : rules[r]) flag[n] = 1;
            double v = stopped_risk_at(phi, h, flag, atom);
            for (NodeId n : rules[r]) flag[n] = 0;
            if (v > best) {
                best = v;
                best_idx = r;
            }
        }
        result.values[atom] = best;
        best_rule[i] = std::move(rules[best_idx]);
    });
    // Per-atom maximizers glue into one stopping time by localization.
    for (auto& rule : best_rule)
        result.argmax.stop_nodes.insert(result.argmax.stop_nodes.end(), rule.begin(), rule.end());
    std::sort(result.argmax.stop_nodes.begin(), result.argmax.stop_nodes.end());
    return result;
}

namespace {

PriorSnell prior_snell_unchecked(const ScenarioTree& tree,
                                 const std::vector<std::vector<double>>& transitions,
                                 const AdaptedProcess& h, int t) {
    PriorSnell out;
    out.envelope.assign(tree.node_count(), 0.0);
    for (NodeId n : tree.leaves()) out.envelope[n] = h[n];
    for (int d = tree.horizon() - 1; d >= 0; --d)
        for (NodeId n : tree.level(d)) {
            const auto& kids = tree.children(n);
            double cont = 0.0;
            for (std::size_t k = 0; k < kids.size(); ++k)
                cont += transitions[n][k] * out.envelope[kids[k]];
            out.envelope[n] = std::max(h[n], cont);
        }
    out.tau.start_depth = t;
    std::vector<NodeId> frontier = tree.level(t);
    while (!frontier.empty()) {
        std::vector<NodeId> next;
        for (NodeId n : frontier) {
            if (h[n] >= out.envelope[n] - 1e-9 * std::max(1.0, std::abs(out.envelope[n])))
                out.tau.stop_nodes.push_back(n);
            else
                next.insert(next.end(), tree.children(n).begin(), tree.children(n).end());
        }
        frontier = std::move(next);
    }
    std::sort(out.tau.stop_nodes.begin(), out.tau.stop_nodes.end());
    return out;
}

} // namespace

PriorSnell per_prior_snell(const ScenarioTree& tree, const TreeMeasure& p, const AdaptedProcess& h,
                           int t) {
    if (!is_locally_equivalent(tree, p))
        throw Error(errc::ZeroMassAtom, "prior measure is not locally equivalent");
    std::vector<std::vector<double>> transitions(tree.node_count());
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (!tree.is_leaf(n)) transitions[n] = p.transition(n);
    return prior_snell_unchecked(tree, transitions, h, t);
}

DecompositionReport coherent_decomposition_check(
    const ScenarioTree& tree, const std::vector<std::vector<std::vector<double>>>& priors,
    const AdaptedProcess& h, int t, std::uint64_t budget, std::uint64_t seed) {
    auto phi = DynamicRiskMeasure::uniform(tree, WorstCaseStep{priors});
    auto u = upper_snell(phi, h);
    auto tau_up = maximal_risk_time(tree, u, h, t);

    DecompositionReport report;
    report.tau_up_depth = stop_depth_per_leaf(tree, tau_up);
    report.max_prior_depth.assign(tree.node_count(), -1);

    std::vector<NodeId> inner;
    report.family_size = 1;
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (!tree.is_leaf(n)) {
            inner.push_back(n);
            report.family_size = sat_mul(report.family_size, priors[n].size());
        }
    report.sampled = report.family_size > budget;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> choice(inner.size(), 0);
    std::vector<std::vector<double>> transitions(tree.node_count());

    auto run_choice = [&] {
        for (std::size_t k = 0; k < inner.size(); ++k)
            transitions[inner[k]] = priors[inner[k]][choice[k]];
        auto ps = prior_snell_unchecked(tree, transitions, h, t);
        auto depths = stop_depth_per_leaf(tree, ps.tau);
        for (NodeId leaf : tree.leaves())
            report.max_prior_depth[leaf] = std::max(report.max_prior_depth[leaf], depths[leaf]);
    };

    if (!report.sampled) {
        while (true) {
            run_choice();
            std::size_t k = 0;
            for (; k < inner.size(); ++k) {
                if (++choice[k] < priors[inner[k]].size()) break;
                choice[k] = 0;
            }
            if (k == inner.size()) break;
        }
    } else {
        for (std::uint64_t i = 0; i < budget; ++i) {
            for (std::size_t k = 0; k < inner.size(); ++k)
                choice[k] = rng() % priors[inner[k]].size();
            run_choice();
        }
    }

    report.pass = true;
    for (NodeId leaf : tree.leaves())
        if (report.max_prior_depth[leaf] != report.tau_up_depth[leaf]) {
            report.pass = false;
            report.witness = tree.label(leaf);
            break;
        }
    return report;
}

MonitorComparison compare_monitors(const DynamicRiskMeasure& a, const DynamicRiskMeasure& b,
                                   const AdaptedProcess& h, int samples, std::uint64_t seed) {
    const ScenarioTree& tree = a.tree();
    if (&b.tree() != &tree) throw Error(errc::InconsistentInputs, "measures on different trees");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(-5.0, 5.0);

    std::vector<NodeId> inner;
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (!tree.is_leaf(n)) inner.push_back(n);

    bool a_le_b = true, b_le_a = true;
    for (int i = 0; i < samples; ++i) {
        NodeId n = inner[rng() % inner.size()];
        std::vector<double> x(tree.children(n).size());
        for (double& v : x) v = val(rng);
        double va = a.step(tree.depth(n)).eval(n, x);
        double vb = b.step(tree.depth(n)).eval(n, x);
        if (va > vb + 1e-9) a_le_b = false;
        if (vb > va + 1e-9) b_le_a = false;
    }

    MonitorComparison cmp;
    cmp.direction = a_le_b ? +1 : (b_le_a ? -1 : 0);
    cmp.envelope_a = upper_snell(a, h);
    cmp.envelope_b = upper_snell(b, h);
    cmp.tau_a = maximal_risk_time(tree, cmp.envelope_a, h, 0);
    cmp.tau_b = maximal_risk_time(tree, cmp.envelope_b, h, 0);
    if (cmp.direction == 0) return cmp;

    const auto& lo = cmp.direction > 0 ? cmp.envelope_a : cmp.envelope_b;
    const auto& hi = cmp.direction > 0 ? cmp.envelope_b : cmp.envelope_a;
    cmp.envelope_order_ok = true;
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (lo[n] > hi[n] + 1e-9) {
            cmp.envelope_order_ok = false;
            cmp.witness = "envelope order fails at '" + tree.label(n) + "'";
            break;
        }

    // The smaller risk measure stops no later on any path: wherever the
    // larger envelope touches H, the smaller one is squeezed onto H too.
    auto depth_lo = stop_depth_per_leaf(tree, cmp.direction > 0 ? cmp.tau_a : cmp.tau_b);
    auto depth_hi = stop_depth_per_leaf(tree, cmp.direction > 0 ? cmp.tau_b : cmp.tau_a);
    cmp.tau_order_ok = true;
    for (NodeId leaf : tree.leaves())
        if (depth_lo[leaf] > depth_hi[leaf]) {
            cmp.tau_order_ok = false;
            cmp.witness = "stopping order fails on path to '" + tree.label(leaf) + "'";
            break;
        }
    return cmp;
}

} // namespace riskmon
