#include <cstdio>
#include <filesystem>

#include <doctest.h>

#include "helpers.hpp"
#include "riskmon/io.hpp"

using namespace riskmon;
using namespace riskmon::testing;
using nlohmann::json;

TEST_CASE("tree json round trip") {
    auto tree = ScenarioTree::build(two_period_binary_spec());
    auto j = tree_spec_to_json(tree);
    auto rebuilt = ScenarioTree::build(parse_tree_spec(j));
    CHECK(rebuilt.horizon() == tree.horizon());
    CHECK(rebuilt.node_count() == tree.node_count());
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        NodeId m = rebuilt.index_of(tree.label(n));
        CHECK(rebuilt.depth(m) == tree.depth(n));
        if (!tree.is_leaf(n))
            CHECK(rebuilt.ref_transition(m) == tree.ref_transition(n));
    }
}

TEST_CASE("parse_tree_spec: malformed input") {
    CHECK_THROWS_WITH_AS(parse_tree_spec(json{{"nodes", json::array()}}),
                         doctest::Contains("ParseError"), Error);
    json missing_p{{"horizon", 1},
                   {"nodes", json::array({{{"id", "root"}, {"parent", nullptr}},
                                          {{"id", "u"}, {"parent", "root"}}})}};
    CHECK_THROWS_WITH_AS(parse_tree_spec(missing_p), doctest::Contains("ParseError"), Error);
}

TEST_CASE("payoff round trip and completeness") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    AdaptedProcess h{1.0, 2.0, 3.0};
    auto j = payoff_to_json(tree, h);
    CHECK(parse_payoff(j, tree) == h);

    j.erase("d");
    CHECK_THROWS_WITH_AS(parse_payoff(j, tree), doctest::Contains("IncompleteProcess"), Error);
    j["d"] = 3.0;
    j["ghost"] = 1.0;
    CHECK_THROWS_WITH_AS(parse_payoff(j, tree), doctest::Contains("UnknownNode"), Error);
}

TEST_CASE("parse_measure: defaults and overrides") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    auto q = parse_measure(json::object(), tree);
    CHECK(q.transition(tree.root()) == tree.ref_transition(tree.root()));

    auto q2 = parse_measure(json{{"transitions", {{"root", {0.8, 0.2}}}}}, tree);
    CHECK(q2.node_mass(tree.index_of("u")) == doctest::Approx(0.8));
}

TEST_CASE("parse_risk: every kind, replicated and per-step") {
    auto tree = ScenarioTree::build(two_period_binary_spec());
    std::vector<double> zeros{0.0, 0.0};

    for (const char* kind : {"expectation", "worstcase", "penalized"}) {
        auto phi = parse_risk(json{{"kind", kind}}, tree);
        CHECK(phi.step(0).eval(tree.root(), zeros) == doctest::Approx(0.0));
    }
    auto ent = parse_risk(json{{"kind", "entropic"}, {"gamma", 2.0}}, tree);
    CHECK(ent.step(0).eval(tree.root(), zeros) == doctest::Approx(0.0));

    json steps{{"steps", json::array({json{{"kind", "expectation"}},
                                      json{{"kind", "entropic"}, {"gamma", 1.0}}})}};
    auto mixed = parse_risk(steps, tree);
    std::vector<double> x{0.0, -std::log(3.0)};
    CHECK(mixed.step(1).eval(tree.index_of("u"), x) == doctest::Approx(std::log(2.0)));

    CHECK_THROWS_WITH_AS(parse_risk(json{{"kind", "cvar"}}, tree),
                         doctest::Contains("ParseError"), Error);
    json short_steps{{"steps", json::array({json{{"kind", "expectation"}}})}};
    CHECK_THROWS_WITH_AS(parse_risk(short_steps, tree), doctest::Contains("ArityMismatch"), Error);
}

TEST_CASE("parse_risk: worstcase priors and penalized entries") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    json wc{{"kind", "worstcase"}, {"priors", {{"root", {{0.5, 0.5}, {0.9, 0.1}}}}}};
    auto phi = parse_risk(wc, tree);
    std::vector<double> x{-1.0, 0.0};
    CHECK(phi.step(0).eval(tree.root(), x) == doctest::Approx(0.9));

    json pen{{"kind", "penalized"},
             {"entries", {{"root", json::array({json{{"q", {0.5, 0.5}}, {"beta", 0.0}},
                                                json{{"q", {0.9, 0.1}}, {"beta", 0.2}}})}}}};
    auto phi2 = parse_risk(pen, tree);
    CHECK(phi2.step(0).eval(tree.root(), x) == doctest::Approx(0.9 - 0.2));
}

TEST_CASE("load_json_file and write_text_file") {
    namespace fs = std::filesystem;
    auto path = (fs::temp_directory_path() / "riskmon_io_test.json").string();
    write_text_file(path, "{\"horizon\": 1}");
    auto j = load_json_file(path);
    CHECK(j.at("horizon") == 1);

    write_text_file(path, "{not json");
    CHECK_THROWS_WITH_AS(load_json_file(path), doctest::Contains("ParseError"), Error);
    CHECK_THROWS_WITH_AS(load_json_file("/nonexistent/nope.json"),
                         doctest::Contains("ParseError"), Error);
    std::remove(path.c_str());
}

TEST_CASE("format_number") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("envelope reports") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    AdaptedProcess h{0.0, 1.0, 0.0};
    AdaptedProcess u{0.5, 1.0, 0.0};
    StoppingRegion tau{{tree.index_of("u"), tree.index_of("d")}, 0};

    auto csv = envelope_report_csv(tree, h, u, tau);
    CHECK(csv == "node_id,H,U,stop_flag\n"
                 "root,0,0.5,0\n"
                 "u,1,1,1\n"
                 "d,0,0,1\n");

    auto j = envelope_report_json(tree, h, u, tau);
    CHECK(j.at("start_depth") == 0);
    CHECK(j.at("risk_at_start").at("root") == doctest::Approx(0.5));
    CHECK(j.at("stop_nodes").size() == 2);
    CHECK(j.at("nodes").size() == 3);
}

TEST_CASE("penalty report with infinite entries") {
    auto tree = ScenarioTree::build(one_period_binomial_spec());
    PenaltyEvaluation eval;
    eval.t = 0;
    eval.values.assign(tree.node_count(), std::nullopt);
    eval.values[tree.root()] = 0.25;
    CHECK(penalty_report_csv(tree, eval) == "atom_id,value\nroot,0.25\n");

    eval.values[tree.root()] = std::nullopt;
    std::vector<std::optional<double>> oracle(tree.node_count());
    oracle[tree.root()] = 1.5;
    CHECK(penalty_report_csv(tree, eval, oracle) == "atom_id,value,oracle\nroot,inf,1.5\n");
}

TEST_CASE("generate_binomial: one-period put") {
    BinomialGenSpec spec;
    spec.horizon = 1;
    auto inst = generate_binomial(spec);
    auto tree = ScenarioTree::build(inst.tree);
    CHECK(tree.node_count() == 3);
    AdaptedProcess h(tree.node_count());
    for (const auto& [id, v] : inst.payoff) h[tree.index_of(id)] = v;
    CHECK(h[tree.index_of("root")] == 0.0);
    CHECK(h[tree.index_of("u")] == 0.0);
    CHECK(h[tree.index_of("d")] == doctest::Approx(20.0));
}

TEST_CASE("generate_binomial: structure and call payoff") {
    BinomialGenSpec spec;
    spec.horizon = 2;
    spec.kind = "call";
    spec.strike = 0.0; // intrinsic value equals the price itself
    auto inst = generate_binomial(spec);
    auto tree = ScenarioTree::build(inst.tree);
    CHECK(tree.node_count() == 7);
    CHECK(tree.leaves().size() == 4);
    AdaptedProcess h(tree.node_count());
    for (const auto& [id, v] : inst.payoff) h[tree.index_of(id)] = v;
    CHECK(h[tree.index_of("ud")] == doctest::Approx(100.0 * 1.2 * 0.8));
    CHECK(h[tree.index_of("uu")] == doctest::Approx(100.0 * 1.2 * 1.2));
}

TEST_CASE("generate_binomial: rejects bad parameters") {
    BinomialGenSpec spec;
    spec.horizon = 0;
    CHECK_THROWS_WITH_AS(generate_binomial(spec), doctest::Contains("ParseError"), Error);
    spec.horizon = 1;
    spec.kind = "straddle";
    CHECK_THROWS_WITH_AS(generate_binomial(spec), doctest::Contains("ParseError"), Error);
    spec.kind = "put";
    spec.up_probability = 1.0;
    CHECK_THROWS_WITH_AS(generate_binomial(spec), doctest::Contains("ParseError"), Error);
}
