#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "riskmon/risk.hpp"

using namespace riskmon;
using namespace riskmon::testing;

TEST_CASE("eval_one_step: normalization at zero for all variants") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    std::mt19937_64 rng(3);
    std::vector<OneStepSpec> specs;
    specs.push_back(ExpectationStep{tree.reference_measure()});
    specs.push_back(EntropicStep{2.0, tree.reference_measure()});
    specs.push_back(random_worstcase(tree, rng, 3));
    specs.push_back(random_penalized(tree, rng, 3));
    std::vector<double> zeros{0.0, 0.0};
    for (auto& s : specs) {
        OneStepRisk risk(tree, std::move(s));
        CHECK(risk.eval(tree.root(), zeros) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("eval_one_step: entropic closed value") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    OneStepRisk risk(tree, EntropicStep{1.0, tree.reference_measure()});
    std::vector<double> x{0.0, -std::log(3.0)};
    CHECK(risk.eval(tree.root(), x) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("eval_one_step: worst case over vertices") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    WorstCaseStep step;
    step.priors.resize(tree.node_count());
    step.priors[tree.root()] = {{1.0, 0.0}, {0.0, 1.0}};
    OneStepRisk risk(tree, std::move(step));
    std::vector<double> x{2.0, 5.0};
    CHECK(risk.eval(tree.root(), x) == doctest::Approx(-2.0));
}

TEST_CASE("eval_one_step: arity mismatch") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    OneStepRisk risk(tree, ExpectationStep{tree.reference_measure()});
    std::vector<double> x{1.0};
    CHECK_THROWS_WITH_AS(risk.eval(tree.root(), x), doctest::Contains("ArityMismatch"), Error);
}

TEST_CASE("penalized ingestion shifts penalties to min beta = 0") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    PenalizedStep step;
    step.entries.resize(tree.node_count());
    step.entries[tree.root()] = {{{0.5, 0.5}, 1.0}, {{0.9, 0.1}, 2.5}};
    OneStepRisk risk(tree, std::move(step));
    CHECK(risk.normalization_shift(tree.root()) == doctest::Approx(1.0));
    // without the shift rho(0) would be -min beta = -1; after it rho(0) = 0
    std::vector<double> zeros{0.0, 0.0};
    CHECK(risk.eval(tree.root(), zeros) == doctest::Approx(0.0));
}

TEST_CASE("eval_dynamic: zero and constant payoffs") {
    auto tree = ScenarioTree::build(two_period_binary_spec());
    auto phi = DynamicRiskMeasure::uniform(tree, EntropicStep{0.7, tree.reference_measure()});
    AdaptedProcess zero(tree.node_count(), 0.0);
    auto rho = phi.eval(zero, 2, 0);
    CHECK(rho[tree.root()] == doctest::Approx(0.0).epsilon(1e-12));
    AdaptedProcess c(tree.node_count(), -3.0);
    rho = phi.eval(c, 2, 0);
    CHECK(rho[tree.root()] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("eval_dynamic: composed expectation equals conditional expectation") {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 20; ++i) {
        auto tree = random_tree(rng, 3, 3);
        auto r = tree.reference_measure();
        auto phi = DynamicRiskMeasure::uniform(tree, ExpectationStep{r});
        auto x = random_payoff(tree, rng, -5.0, 5.0);
        for (int t : {0, 1, 2}) {
            auto rho = phi.eval(x, 3, t);
            AdaptedProcess neg(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) neg[k] = -x[k];
            auto expected = cond_expect(tree, r, neg, 3, t);
            for (NodeId n : tree.level(t))
                CHECK(rho[n] == doctest::Approx(expected[n]).epsilon(1e-9));
        }
    }
}

TEST_CASE("eval_dynamic: recursion identity") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 20; ++i) {
        auto tree = random_tree(rng, 3, 3);
        auto phi = DynamicRiskMeasure::uniform(tree, random_penalized(tree, rng, 2));
        auto x = random_payoff(tree, rng, -5.0, 5.0);
        for (int t = 0; t < 3; ++t) {
            auto direct = phi.eval(x, 3, t);
            auto inner = phi.eval(x, 3, t + 1);
            AdaptedProcess neg_inner(inner.size());
            for (std::size_t k = 0; k < inner.size(); ++k) neg_inner[k] = -inner[k];
            auto composed = phi.eval(neg_inner, t + 1, t);
            for (NodeId n : tree.level(t))
                CHECK(std::abs(direct[n] - composed[n]) <= 1e-9);
        }
    }
}

TEST_CASE("eval_dynamic: depth order errors") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    auto phi = DynamicRiskMeasure::uniform(tree, ExpectationStep{tree.reference_measure()});
    AdaptedProcess x(tree.node_count(), 0.0);
    CHECK_THROWS_WITH_AS(phi.eval(x, 0, 1), doctest::Contains("DepthOrder"), Error);
}

TEST_CASE("check_axioms: expectation and entropic pass") {
    auto tree = ScenarioTree::build(two_period_binary_spec());
    auto r1 = check_axioms(ExpectationStep{tree.reference_measure()}, tree, 200, 1);
    CHECK(r1.all_pass());
    auto r2 = check_axioms(EntropicStep{2.0, tree.reference_measure()}, tree, 200, 2);
    CHECK(r2.all_pass());
}

TEST_CASE("check_axioms: worst case and penalized pass") {
    std::mt19937_64 rng(29);
    auto tree = random_tree(rng, 3, 3);
    auto r1 = check_axioms(random_worstcase(tree, rng, 3), tree, 200, 3);
    CHECK(r1.all_pass());
    auto r2 = check_axioms(random_penalized(tree, rng, 3), tree, 200, 4);
    CHECK(r2.all_pass());
}

TEST_CASE("worst case dominates penalized built from the same vectors") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 20; ++i) {
        auto tree = random_tree(rng, 3, 2);
        auto pen = random_penalized(tree, rng, 3);
        WorstCaseStep wc;
        wc.priors.resize(tree.node_count());
        for (NodeId n = 0; n < tree.node_count(); ++n)
            for (const auto& e : pen.entries[n]) wc.priors[n].push_back(e.q);
        OneStepRisk rp(tree, pen), rw(tree, std::move(wc));
        for (NodeId n = 0; n < tree.node_count(); ++n) {
            if (tree.is_leaf(n)) continue;
            std::vector<double> x(tree.children(n).size());
            std::uniform_real_distribution<double> val(-5.0, 5.0);
            for (double& v : x) v = val(rng);
            CHECK(rw.eval(n, x) >= rp.eval(n, x) - 1e-9);
        }
    }
}

TEST_CASE("entropic converges to expectation as gamma -> 0") {
    std::mt19937_64 rng(37);
    auto tree = random_tree(rng, 2, 3);
    auto r = tree.reference_measure();
    OneStepRisk entropic(tree, EntropicStep{1e-6, r});
    OneStepRisk expectation(tree, ExpectationStep{r});
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        if (tree.is_leaf(n)) continue;
        std::vector<double> x(tree.children(n).size());
        std::uniform_real_distribution<double> val(-5.0, 5.0);
        for (double& v : x) v = val(rng);
        CHECK(entropic.eval(n, x) == doctest::Approx(expectation.eval(n, x)).epsilon(1e-4));
    }
}
