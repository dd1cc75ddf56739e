#include "riskmon/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace riskmon {

namespace {

constexpr double kRowSumTol = 1e-12;

void validate_transition_row(const ScenarioTree& tree, NodeId n, const std::vector<double>& q,
                             bool strictly_positive) {
    if (q.size() != tree.children(n).size())
        throw Error(errc::ArityMismatch, "transition vector arity mismatch at '" + tree.label(n) + "'");
    double sum = 0.0;
    for (double p : q) {
        if (p < 0.0 || (strictly_positive && p <= 0.0))
            throw Error(errc::BadProbability, "bad transition entry at '" + tree.label(n) + "'");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw Error(errc::BadProbability,
                    "transition vector at '" + tree.label(n) + "' sums to " + std::to_string(sum));
}

} // namespace

OneStepRisk::OneStepRisk(const ScenarioTree& tree, OneStepSpec spec)
    : tree_(&tree), spec_(std::move(spec)), shift_(tree.node_count(), 0.0) {
    if (auto* e = std::get_if<EntropicStep>(&spec_)) {
        if (e->gamma <= 0.0) throw Error(errc::BadProbability, "entropic gamma must be > 0");
        for (NodeId n = 0; n < tree.node_count(); ++n)
            if (!tree.is_leaf(n))
                validate_transition_row(tree, n, e->base.transition(n), /*strictly_positive=*/true);
    } else if (auto* w = std::get_if<WorstCaseStep>(&spec_)) {
        if (static_cast<int>(w->priors.size()) != tree.node_count())
            throw Error(errc::ArityMismatch, "prior table size does not match tree");
        for (NodeId n = 0; n < tree.node_count(); ++n) {
            if (tree.is_leaf(n)) continue;
            if (w->priors[n].empty())
                throw Error(errc::BadProbability, "empty prior set at '" + tree.label(n) + "'");
            for (const auto& q : w->priors[n]) validate_transition_row(tree, n, q, false);
        }
    } else if (auto* p = std::get_if<PenalizedStep>(&spec_)) {
        if (static_cast<int>(p->entries.size()) != tree.node_count())
            throw Error(errc::ArityMismatch, "entry table size does not match tree");
        for (NodeId n = 0; n < tree.node_count(); ++n) {
            if (tree.is_leaf(n)) continue;
            if (p->entries[n].empty())
                throw Error(errc::BadProbability, "empty penalty entry list at '" + tree.label(n) + "'");
            double min_beta = std::numeric_limits<double>::infinity();
            for (const auto& e : p->entries[n]) {
                validate_transition_row(tree, n, e.q, false);
                if (e.beta < 0.0)
                    throw Error(errc::BadProbability, "negative penalty at '" + tree.label(n) + "'");
                min_beta = std::min(min_beta, e.beta);
            }
            // Normalization: shift so min beta = 0 per node, hence rho(0) = 0.
            if (min_beta > 0.0) {
                for (auto& e : p->entries[n]) e.beta -= min_beta;
                shift_[n] = min_beta;
            }
        }
    }
}

double OneStepRisk::normalization_shift(NodeId node) const { return shift_.at(node); }

double OneStepRisk::eval(NodeId node, std::span<const double> child_values) const {
    const auto& kids = tree_->children(node);
    if (kids.empty()) throw Error(errc::ArityMismatch, "eval at leaf '" + tree_->label(node) + "'");
    if (child_values.size() != kids.size())
        throw Error(errc::ArityMismatch, "child value count mismatch at '" + tree_->label(node) + "'");

    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ExpectationStep>) {
                const auto& q = s.measure.transition(node);
                double acc = 0.0;
                for (std::size_t k = 0; k < q.size(); ++k) acc += q[k] * (-child_values[k]);
                return acc;
            } else if constexpr (std::is_same_v<T, EntropicStep>) {
                const auto& p = s.base.transition(node);
                double m = -std::numeric_limits<double>::infinity();
                for (double v : child_values) m = std::max(m, -s.gamma * v);
                double acc = 0.0;
                for (std::size_t k = 0; k < p.size(); ++k)
                    acc += p[k] * std::exp(-s.gamma * child_values[k] - m);
                return (m + std::log(acc)) / s.gamma;
            } else if constexpr (std::is_same_v<T, WorstCaseStep>) {
                double best = -std::numeric_limits<double>::infinity();
                for (const auto& q : s.priors[node]) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < q.size(); ++k) acc += q[k] * (-child_values[k]);
                    best = std::max(best, acc);
                }
                return best;
            } else {
                static_assert(std::is_same_v<T, PenalizedStep>);
                double best = -std::numeric_limits<double>::infinity();
                for (const auto& e : s.entries[node]) {
                    double acc = -e.beta;
                    for (std::size_t k = 0; k < e.q.size(); ++k) acc += e.q[k] * (-child_values[k]);
                    best = std::max(best, acc);
                }
                return best;
            }
        },
        spec_);
}

DynamicRiskMeasure::DynamicRiskMeasure(const ScenarioTree& tree, std::vector<OneStepRisk> steps)
    : tree_(&tree), steps_(std::move(steps)) {
    if (static_cast<int>(steps_.size()) != tree.horizon())
        throw Error(errc::ArityMismatch, "need exactly T one-step maps");
    for (const auto& s : steps_)
        if (&s.tree() != &tree) throw Error(errc::ArityMismatch, "step references a different tree");
}

DynamicRiskMeasure DynamicRiskMeasure::uniform(const ScenarioTree& tree, const OneStepSpec& spec) {
    std::vector<OneStepRisk> steps;
    steps.reserve(tree.horizon());
    for (int t = 0; t < tree.horizon(); ++t) steps.emplace_back(tree, spec);
    return DynamicRiskMeasure(tree, std::move(steps));
}

AdaptedProcess DynamicRiskMeasure::eval(const AdaptedProcess& x, int s, int t) const {
    if (t > s || s > tree_->horizon() || t < 0)
        throw Error(errc::DepthOrder, "require 0 <= t <= s <= T");
    if (static_cast<int>(x.size()) != tree_->node_count())
        throw Error(errc::IncompleteProcess, "process size does not match tree");

    // d holds rho_u(X) at depth u; rho_s(X) = -X by cash invariance.
    AdaptedProcess d(tree_->node_count(), 0.0);
    for (NodeId n : tree_->level(s)) d[n] = -x[n];
    std::vector<double> child_vals;
    for (int u = s - 1; u >= t; --u) {
        for (NodeId n : tree_->level(u)) {
            const auto& kids = tree_->children(n);
            child_vals.resize(kids.size());
            // argument of the one-step map is -rho_{u+1}(X)
            for (std::size_t k = 0; k < kids.size(); ++k) child_vals[k] = -d[kids[k]];
            d[n] = steps_[u].eval(n, child_vals);
        }
    }
    AdaptedProcess out(tree_->node_count(), 0.0);
    for (NodeId n : tree_->level(t)) out[n] = d[n];
    return out;
}

bool AxiomReport::all_pass(double tol) const {
    for (const auto& [name, c] : axioms)
        if (c.worst_violation > tol) return false;
    return true;
}

namespace {

void record(AxiomReport& report, const std::string& axiom, double violation,
            const std::string& witness) {
    auto& c = report.axioms[axiom];
    if (violation > c.worst_violation) {
        c.worst_violation = violation;
        c.witness = witness;
    }
    if (c.worst_violation > 1e-9) c.pass = false;
}

} // namespace

AxiomReport check_axioms(const OneStepSpec& spec, const ScenarioTree& tree,
                         int sample_count, std::uint64_t seed) {
    if (sample_count < 1) throw Error(errc::BadProbability, "sample count must be >= 1");
    auto phi = DynamicRiskMeasure::uniform(tree, spec);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(-5.0, 5.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    AxiomReport report;
    for (const char* name :
         {"cash_invariance", "monotonicity", "conditional_convexity", "normalization", "localization"})
        report.axioms[name]; // ensure all entries exist even with zero violations

    const int T = tree.horizon();
    AdaptedProcess zero(tree.node_count(), 0.0);

    // Lift a depth-t slice to the leaves (constant on each subtree).
    auto lift = [&](const AdaptedProcess& slice, int t) {
        AdaptedProcess out(tree.node_count(), 0.0);
        for (NodeId n : tree.level(t))
            for (NodeId leaf : tree.descendants_at(n, T)) out[leaf] = slice[n];
        return out;
    };

    for (int i = 0; i < sample_count; ++i) {
        int t = static_cast<int>(rng() % static_cast<std::uint64_t>(T));
        std::string at = "sample " + std::to_string(i) + ", t=" + std::to_string(t);

        AdaptedProcess x(tree.node_count(), 0.0), y(tree.node_count(), 0.0);
        for (NodeId n : tree.leaves()) {
            x[n] = val(rng);
            y[n] = val(rng);
        }
        auto rho_x = phi.eval(x, T, t);
        auto rho_y = phi.eval(y, T, t);

        // Cash invariance: rho(X + Z) = rho(X) - Z for F_t-measurable Z.
        AdaptedProcess z(tree.node_count(), 0.0);
        for (NodeId n : tree.level(t)) z[n] = val(rng);
        AdaptedProcess xz = x;
        auto z_lifted = lift(z, t);
        for (NodeId n : tree.leaves()) xz[n] += z_lifted[n];
        auto rho_xz = phi.eval(xz, T, t);
        for (NodeId n : tree.level(t))
            record(report, "cash_invariance", std::abs(rho_xz[n] - (rho_x[n] - z[n])), at);

        // Monotonicity: X <= Y' implies rho(X) >= rho(Y').
        AdaptedProcess yp = x;
        for (NodeId n : tree.leaves()) yp[n] += unit(rng) * 3.0;
        auto rho_yp = phi.eval(yp, T, t);
        for (NodeId n : tree.level(t))
            record(report, "monotonicity", rho_yp[n] - rho_x[n], at);

        // Conditional convexity with F_t-measurable lambda.
        AdaptedProcess lam(tree.node_count(), 0.0);
        for (NodeId n : tree.level(t)) lam[n] = unit(rng);
        auto lam_lifted = lift(lam, t);
        AdaptedProcess mix(tree.node_count(), 0.0);
        for (NodeId n : tree.leaves()) mix[n] = lam_lifted[n] * x[n] + (1.0 - lam_lifted[n]) * y[n];
        auto rho_mix = phi.eval(mix, T, t);
        for (NodeId n : tree.level(t))
            record(report, "conditional_convexity",
                   rho_mix[n] - (lam[n] * rho_x[n] + (1.0 - lam[n]) * rho_y[n]), at);

        // Normalization: rho(0) = 0.
        auto rho_zero = phi.eval(zero, T, t);
        for (NodeId n : tree.level(t))
            record(report, "normalization", std::abs(rho_zero[n]), at);

        // Localization over a random union of depth-t atoms.
        AdaptedProcess in_a(tree.node_count(), 0.0);
        for (NodeId n : tree.level(t)) in_a[n] = (rng() & 1) ? 1.0 : 0.0;
        auto a_lifted = lift(in_a, t);
        AdaptedProcess glued(tree.node_count(), 0.0);
        for (NodeId n : tree.leaves()) glued[n] = a_lifted[n] > 0.5 ? x[n] : y[n];
        auto rho_glued = phi.eval(glued, T, t);
        for (NodeId n : tree.level(t)) {
            double expected = in_a[n] > 0.5 ? rho_x[n] : rho_y[n];
            record(report, "localization", std::abs(rho_glued[n] - expected), at);
        }
    }
    return report;
}

} // namespace riskmon
