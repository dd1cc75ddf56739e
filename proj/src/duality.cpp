#include "riskmon/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskmon {

namespace {

constexpr double kFeasTol = 1e-9;

// Solve the small least-squares system A lambda = b for a column subset,
// via normal equations with Gaussian elimination. Returns false on a
// (numerically) singular system.
bool solve_normal_equations(const std::vector<std::vector<double>>& a_cols,
                            const std::vector<double>& b, std::vector<double>& lambda) {
    const std::size_t k = a_cols.size();
    const std::size_t rows = b.size();
    std::vector<std::vector<double>> m(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t r = 0; r < rows; ++r) m[i][j] += a_cols[i][r] * a_cols[j][r];
        for (std::size_t r = 0; r < rows; ++r) m[i][k] += a_cols[i][r] * b[r];
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) < 1e-12) return false;
        std::swap(m[col], m[piv]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col) continue;
            double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c <= k; ++c) m[r][c] -= f * m[col][c];
        }
    }
    lambda.resize(k);
    for (std::size_t i = 0; i < k; ++i) lambda[i] = m[i][k] / m[i][i];
    return true;
}

} // namespace

std::optional<double> min_cost_convex_combination(const std::vector<std::vector<double>>& points,
                                                  const std::vector<double>& costs,
                                                  const std::vector<double>& target) {
    const std::size_t m = points.size();
    const std::size_t dim = target.size();
    if (m == 0 || costs.size() != m)
        throw Error(errc::ArityMismatch, "empty point list or cost size mismatch");
    for (const auto& p : points)
        if (p.size() != dim) throw Error(errc::ArityMismatch, "point dimension mismatch");

    // Augmented columns: coordinates plus the simplex row.
    std::vector<std::vector<double>> cols(m, std::vector<double>(dim + 1, 1.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t d = 0; d < dim; ++d) cols[i][d] = points[i][d];
    std::vector<double> b(dim + 1, 1.0);
    for (std::size_t d = 0; d < dim; ++d) b[d] = target[d];

    // An optimum, if feasible, is attained at a basic solution with at most
    // dim + 1 nonzero weights; enumerate all small supports.
    std::optional<double> best;
    const std::size_t max_support = std::min(m, dim + 1);
    std::vector<std::size_t> idx;
    std::vector<std::vector<double>> sub;
    std::vector<double> lambda;

    auto try_support = [&](const std::vector<std::size_t>& support) {
        sub.clear();
        for (std::size_t i : support) sub.push_back(cols[i]);
        if (!solve_normal_equations(sub, b, lambda)) return;
        for (double l : lambda)
            if (l < -kFeasTol) return;
        // verify the residual: the normal equations may "solve" infeasible systems
        for (std::size_t r = 0; r <= dim; ++r) {
            double acc = 0.0;
            for (std::size_t i = 0; i < support.size(); ++i) acc += sub[i][r] * lambda[i];
            if (std::abs(acc - b[r]) > kFeasTol) return;
        }
        double cost = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i)
            cost += std::max(0.0, lambda[i]) * costs[support[i]];
        if (!best || cost < *best) best = cost;
    };

    // Enumerate subsets of size 1..max_support.
    std::vector<std::size_t> stack;
    auto rec = [&](auto&& self, std::size_t start) -> void {
        if (!stack.empty()) try_support(stack);
        if (stack.size() == max_support) return;
        for (std::size_t i = start; i < m; ++i) {
            stack.push_back(i);
            self(self, i + 1);
            stack.pop_back();
        }
    };
    rec(rec, 0);
    return best;
}

std::optional<double> minimal_penalty_one_step(const OneStepRisk& risk, NodeId node,
                                               std::span<const double> q) {
    const ScenarioTree& tree = risk.tree();
    const auto& kids = tree.children(node);
    if (kids.empty()) throw Error(errc::ArityMismatch, "penalty at leaf '" + tree.label(node) + "'");
    if (q.size() != kids.size())
        throw Error(errc::ArityMismatch, "transition vector arity mismatch at '" + tree.label(node) + "'");

    return std::visit(
        [&](const auto& s) -> std::optional<double> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ExpectationStep>) {
                const auto& p = s.measure.transition(node);
                for (std::size_t k = 0; k < p.size(); ++k)
                    if (std::abs(q[k] - p[k]) > 1e-12) return std::nullopt;
                return 0.0;
            } else if constexpr (std::is_same_v<T, EntropicStep>) {
                const auto& p = s.base.transition(node);
                double kl = 0.0;
                for (std::size_t k = 0; k < p.size(); ++k)
                    if (q[k] > 0.0) kl += q[k] * std::log(q[k] / p[k]);
                return kl / s.gamma;
            } else if constexpr (std::is_same_v<T, WorstCaseStep>) {
                std::vector<double> zeros(s.priors[node].size(), 0.0);
                auto r = min_cost_convex_combination(
                    s.priors[node], zeros, std::vector<double>(q.begin(), q.end()));
                if (!r) return std::nullopt;
                return 0.0;
            } else {
                static_assert(std::is_same_v<T, PenalizedStep>);
                std::vector<std::vector<double>> pts;
                std::vector<double> betas;
                for (const auto& e : s.entries[node]) {
                    pts.push_back(e.q);
                    betas.push_back(e.beta);
                }
                return min_cost_convex_combination(pts, betas,
                                                   std::vector<double>(q.begin(), q.end()));
            }
        },
        risk.spec());
}

double minimal_penalty_oracle(const OneStepRisk& risk, NodeId node, std::span<const double> q,
                              double bound, int grid_steps, std::uint64_t budget) {
    if (grid_steps < 3 || bound <= 0.0)
        throw Error(errc::GridTooLarge, "need grid_steps >= 3 and bound > 0");
    const auto& kids = risk.tree().children(node);
    const std::size_t k = kids.size();
    if (q.size() != k) throw Error(errc::ArityMismatch, "transition vector arity mismatch");

    double total = 1.0;
    for (std::size_t i = 0; i < k; ++i) total *= grid_steps;
    if (total > static_cast<double>(budget))
        throw Error(errc::GridTooLarge, "grid of " + std::to_string(total) + " points exceeds budget");

    std::vector<int> odo(k, 0);
    std::vector<double> x(k);
    double best = -std::numeric_limits<double>::infinity();
    const double step = 2.0 * bound / (grid_steps - 1);
    bool done = false;
    while (!done) {
        for (std::size_t i = 0; i < k; ++i) x[i] = -bound + odo[i] * step;
        double dual = -risk.eval(node, x);
        for (std::size_t i = 0; i < k; ++i) dual += q[i] * (-x[i]);
        best = std::max(best, dual);
        // advance odometer
        std::size_t i = 0;
        for (; i < k; ++i) {
            if (++odo[i] < grid_steps) break;
            odo[i] = 0;
        }
        done = (i == k);
    }
    return best;
}

PenaltyEvaluation minimal_penalty(const OneStepRisk& risk, const TreeMeasure& q, int t) {
    const ScenarioTree& tree = risk.tree();
    if (t < 0 || t >= tree.horizon()) throw Error(errc::DepthOrder, "level outside 0..T-1");
    PenaltyEvaluation out;
    out.t = t;
    out.values.assign(tree.node_count(), std::nullopt);
    for (NodeId n : tree.level(t)) {
        // Zero-mass convention: the minimal penalty is +infinity there.
        if (q.node_mass(n) <= 0.0) {
            out.values[n] = std::nullopt;
            continue;
        }
        out.values[n] = minimal_penalty_one_step(risk, n, q.transition(n));
    }
    return out;
}

std::vector<RepresentationEntry> verify_representation(
    const OneStepRisk& risk, NodeId node, const std::vector<std::vector<double>>& test_payoffs,
    const std::vector<std::vector<double>>& dual_family) {
    if (dual_family.empty()) throw Error(errc::ArityMismatch, "empty dual family");
    std::vector<std::optional<double>> alphas;
    alphas.reserve(dual_family.size());
    for (const auto& q : dual_family) alphas.push_back(minimal_penalty_one_step(risk, node, q));

    std::vector<RepresentationEntry> out;
    out.reserve(test_payoffs.size());
    for (const auto& x : test_payoffs) {
        RepresentationEntry e;
        e.primal = risk.eval(node, x);
        e.dual = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < dual_family.size(); ++i) {
            if (!alphas[i]) continue;
            double v = -*alphas[i];
            for (std::size_t k = 0; k < x.size(); ++k) v += dual_family[i][k] * (-x[k]);
            e.dual = std::max(e.dual, v);
        }
        e.gap = e.primal - e.dual;
        out.push_back(e);
    }
    return out;
}

std::vector<bool> acceptance_member(const DynamicRiskMeasure& phi, const AdaptedProcess& x, int s,
                                    int t, double tol) {
    auto rho = phi.eval(x, s, t);
    std::vector<bool> out(phi.tree().node_count(), false);
    for (NodeId n : phi.tree().level(t)) out[n] = rho[n] <= tol;
    return out;
}

AdaptedProcess conditional_norm(const ScenarioTree& tree, const AdaptedProcess& z, double q, int t) {
    if (q <= 1.0) throw Error(errc::NegativeInput, "exponent q must be > 1");
    for (NodeId leaf : tree.leaves())
        if (z[leaf] < 0.0) throw Error(errc::NegativeInput, "conditional norm of a negative variable");
    TreeMeasure r = tree.reference_measure();
    AdaptedProcess zq(tree.node_count(), 0.0);
    for (NodeId leaf : tree.leaves()) zq[leaf] = std::pow(z[leaf], q);
    auto ce = cond_expect(tree, r, zq, tree.horizon(), t);
    AdaptedProcess out(tree.node_count(), 0.0);
    for (NodeId n : tree.level(t)) out[n] = std::pow(ce[n], 1.0 / q);
    return out;
}

double coercivity_gap(const ScenarioTree& tree, const TreeMeasure& measure,
                      const AdaptedProcess& alpha, int t, double a, double b, double q) {
    if (b <= 0.0) throw Error(errc::NegativeInput, "coercivity slope b must be > 0");
    if (!is_locally_equivalent(tree, measure))
        throw Error(errc::ZeroMassAtom, "measure is not locally equivalent");
    TreeMeasure r = tree.reference_measure();
    auto z = density(tree, measure);
    auto norm = conditional_norm(tree, z, q, t);

    double e_alpha = 0.0;
    double e_ratio = 0.0;
    for (NodeId n : tree.level(t)) {
        double r_mass = r.node_mass(n);
        double cond_density = measure.node_mass(n) / r_mass; // E_R[Z | F_t] on the atom
        e_alpha += r_mass * alpha[n];
        e_ratio += r_mass * norm[n] / cond_density;
    }
    return e_alpha - a - b * e_ratio;
}

} // namespace riskmon
