#pragma once

#include <random>
#include <string>

#include "riskmon/risk.hpp"

namespace riskmon::testing {

inline TreeSpec one_period_binomial_spec(double pu = 0.5) {
    TreeSpec spec;
    spec.horizon = 1;
    spec.nodes = {{"root", std::nullopt, 0.0}, {"u", "root", pu}, {"d", "root", 1.0 - pu}};
    return spec;
}

inline TreeSpec two_period_binary_spec() {
    TreeSpec spec;
    spec.horizon = 2;
    spec.nodes = {{"root", std::nullopt, 0.0}, {"u", "root", 0.5},  {"d", "root", 0.5},
                  {"uu", "u", 0.5},            {"ud", "u", 0.5},    {"du", "d", 0.5},
                  {"dd", "d", 0.5}};
    return spec;
}

// Random tree with uniform depth and 1..max_branch children per node.
inline ScenarioTree random_tree(std::mt19937_64& rng, int horizon, int max_branch) {
    TreeSpec spec;
    spec.horizon = horizon;
    spec.nodes.push_back({"n0", std::nullopt, 0.0});
    std::vector<std::pair<std::string, int>> frontier{{"n0", 0}};
    int counter = 1;
    std::uniform_real_distribution<double> weight(0.1, 1.0);
    while (!frontier.empty()) {
        std::vector<std::pair<std::string, int>> next;
        for (auto& [id, depth] : frontier) {
            if (depth == horizon) continue;
            int branch = 1 + static_cast<int>(rng() % max_branch);
            std::vector<double> w(branch);
            double sum = 0.0;
            for (double& v : w) sum += (v = weight(rng));
            double acc = 0.0;
            for (int k = 0; k < branch; ++k) {
                std::string cid = "n" + std::to_string(counter++);
                // exact row sums: last entry takes the remainder
                double p = k + 1 == branch ? 1.0 - acc : w[k] / sum;
                acc += p;
                spec.nodes.push_back({cid, id, p});
                next.emplace_back(cid, depth + 1);
            }
        }
        frontier = std::move(next);
    }
    return ScenarioTree::build(spec);
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t dim,
                                          bool strictly_positive = true) {
    std::uniform_real_distribution<double> weight(strictly_positive ? 0.05 : 0.0, 1.0);
    std::vector<double> w(dim);
    double sum = 0.0;
    for (double& v : w) sum += (v = weight(rng));
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        double p = k + 1 == dim ? 1.0 - acc : w[k] / sum;
        acc += p;
        w[k] = p;
    }
    return w;
}

inline AdaptedProcess random_payoff(const ScenarioTree& tree, std::mt19937_64& rng, double lo = 0.0,
                                    double hi = 10.0) {
    std::uniform_real_distribution<double> val(lo, hi);
    AdaptedProcess h(tree.node_count());
    for (double& v : h) v = val(rng);
    return h;
}

inline WorstCaseStep random_worstcase(const ScenarioTree& tree, std::mt19937_64& rng,
                                      int max_vectors, bool strictly_positive = true) {
    WorstCaseStep step;
    step.priors.resize(tree.node_count());
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        if (tree.is_leaf(n)) continue;
        int count = 1 + static_cast<int>(rng() % max_vectors);
        for (int k = 0; k < count; ++k)
            step.priors[n].push_back(
                random_simplex(rng, tree.children(n).size(), strictly_positive));
    }
    return step;
}

inline PenalizedStep random_penalized(const ScenarioTree& tree, std::mt19937_64& rng,
                                      int max_entries) {
    std::uniform_real_distribution<double> beta(0.0, 2.0);
    PenalizedStep step;
    step.entries.resize(tree.node_count());
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        if (tree.is_leaf(n)) continue;
        int count = 1 + static_cast<int>(rng() % max_entries);
        for (int k = 0; k < count; ++k)
            step.entries[n].push_back(
                {random_simplex(rng, tree.children(n).size()), k == 0 ? 0.0 : beta(rng)});
    }
    return step;
}

} // namespace riskmon::testing
