#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "riskmon/duality.hpp"
#include "riskmon/io.hpp"
#include "riskmon/snell.hpp"

using namespace riskmon;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitTolerance = 4;

std::uint64_t default_budget() {
    if (const char* env = std::getenv("RISKMON_BUDGET")) return std::strtoull(env, nullptr, 10);
    return 1'000'000;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        write_text_file(out_path, content);
}

struct CommonArgs {
    std::string tree_path;
    std::string payoff_path;
    std::string risk_path;
    std::string risk2_path;
    std::string measure_path;
    std::string out_path;
    std::string format = "csv";
    int start_depth = 0;
    double tol = 1e-9;
    std::uint64_t budget = default_budget();
    std::uint64_t seed = 0;
    int threads = 1;
};

int run_validate(const CommonArgs& args) {
    auto tree = ScenarioTree::build(parse_tree_spec(load_json_file(args.tree_path)));
    if (!args.payoff_path.empty()) parse_payoff(load_json_file(args.payoff_path), tree);
    if (!args.risk_path.empty()) parse_risk(load_json_file(args.risk_path), tree);
    std::cout << "OK: " << tree.node_count() << " nodes, horizon " << tree.horizon() << "\n";
    return 0;
}

int run_envelope(const CommonArgs& args) {
    auto tree = ScenarioTree::build(parse_tree_spec(load_json_file(args.tree_path)));
    auto h = parse_payoff(load_json_file(args.payoff_path), tree);
    auto phi = parse_risk(load_json_file(args.risk_path), tree);
    auto u = upper_snell(phi, h, args.threads);
    auto tau = maximal_risk_time(tree, u, h, args.start_depth);
    if (args.format == "json")
        emit(args.out_path, envelope_report_json(tree, h, u, tau).dump(2) + "\n");
    else
        emit(args.out_path, envelope_report_csv(tree, h, u, tau));
    return 0;
}

int run_oracle(const CommonArgs& args) {
    auto tree = ScenarioTree::build(parse_tree_spec(load_json_file(args.tree_path)));
    auto h = parse_payoff(load_json_file(args.payoff_path), tree);
    auto phi = parse_risk(load_json_file(args.risk_path), tree);
    auto u = upper_snell(phi, h, args.threads);
    auto tau = maximal_risk_time(tree, u, h, args.start_depth);
    auto bf = brute_force_max_risk(phi, h, args.start_depth, args.budget, args.threads);
    auto tau_risk = risk_of_stopped(phi, h, tau, args.start_depth);

    double gap = 0.0;
    for (NodeId n : tree.level(args.start_depth)) {
        gap = std::max(gap, std::abs(u[n] - bf.values[n]));
        gap = std::max(gap, std::abs(tau_risk[n] - bf.values[n]));
    }
    std::ostringstream out;
    out << "max_gap," << format_number(gap) << "\n";
    for (NodeId n : tree.level(args.start_depth))
        out << tree.label(n) << ',' << format_number(u[n]) << ',' << format_number(bf.values[n])
            << '\n';
    emit(args.out_path, out.str());
    return gap <= args.tol ? 0 : kExitTolerance;
}

int run_compare(const CommonArgs& args) {
    auto tree = ScenarioTree::build(parse_tree_spec(load_json_file(args.tree_path)));
    auto h = parse_payoff(load_json_file(args.payoff_path), tree);
    auto a = parse_risk(load_json_file(args.risk_path), tree);
    auto b = parse_risk(load_json_file(args.risk2_path), tree);
    auto cmp = compare_monitors(a, b, h, 128, args.seed);

    json report;
    report["direction"] =
        cmp.direction > 0 ? "a <= b" : (cmp.direction < 0 ? "b <= a" : "NoOrder");
    if (cmp.direction != 0) {
        report["envelope_order"] = cmp.envelope_order_ok ? "PASS" : "FAIL";
        report["tau_order"] = cmp.tau_order_ok ? "PASS" : "FAIL";
        if (!cmp.witness.empty()) report["witness"] = cmp.witness;
    }
    json ua = json::object(), ub = json::object();
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        ua[tree.label(n)] = cmp.envelope_a[n];
        ub[tree.label(n)] = cmp.envelope_b[n];
    }
    report["U_a"] = std::move(ua);
    report["U_b"] = std::move(ub);
    auto da = stop_depth_per_leaf(tree, cmp.tau_a);
    auto db = stop_depth_per_leaf(tree, cmp.tau_b);
    json taus = json::object();
    for (NodeId leaf : tree.leaves())
        taus[tree.label(leaf)] = json{{"tau_a", da[leaf]}, {"tau_b", db[leaf]}};
    report["tau_per_path"] = std::move(taus);
    emit(args.out_path, report.dump(2) + "\n");
    return 0;
}

int run_penalty(const CommonArgs& args, bool oracle_check) {
    auto tree = ScenarioTree::build(parse_tree_spec(load_json_file(args.tree_path)));
    auto phi = parse_risk(load_json_file(args.risk_path), tree);
    auto q = parse_measure(load_json_file(args.measure_path), tree);
    auto eval = minimal_penalty(phi.step(args.start_depth), q, args.start_depth);

    std::vector<std::optional<double>> oracle;
    if (oracle_check) {
        oracle.assign(tree.node_count(), std::nullopt);
        for (NodeId n : tree.level(args.start_depth))
            if (q.node_mass(n) > 0.0 && eval.values[n])
                oracle[n] = minimal_penalty_oracle(phi.step(args.start_depth), n,
                                                   q.transition(n), 20.0, 81, args.budget);
    }
    emit(args.out_path, penalty_report_csv(tree, eval, oracle));
    return 0;
}

int run_axioms(const CommonArgs& args, int samples) {
    auto tree = ScenarioTree::build(parse_tree_spec(load_json_file(args.tree_path)));
    auto spec = parse_one_step_spec(load_json_file(args.risk_path), tree);
    auto report = check_axioms(spec, tree, samples, args.seed);
    std::ostringstream out;
    for (const auto& [name, c] : report.axioms)
        out << name << ',' << (c.worst_violation <= args.tol ? "PASS" : "FAIL") << ','
            << format_number(c.worst_violation) << '\n';
    emit(args.out_path, out.str());
    return report.all_pass(args.tol) ? 0 : kExitTolerance;
}

int run_gen(const BinomialGenSpec& spec, const std::string& tree_out,
            const std::string& payoff_out) {
    auto inst = generate_binomial(spec);
    auto tree = ScenarioTree::build(inst.tree); // round-trip guarantee
    json payoff = json::object();
    for (const auto& [id, v] : inst.payoff) payoff[id] = v;
    emit(tree_out, tree_spec_to_json(tree).dump(2) + "\n");
    emit(payoff_out, payoff.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-consistent risk monitoring on finite scenario trees"};
    app.require_subcommand(1);

    CommonArgs args;
    int samples = 1000;
    bool oracle_check = false;
    BinomialGenSpec gen_spec;
    std::string gen_tree_out, gen_payoff_out;

    auto add_common = [&](CLI::App* cmd, bool payoff, bool risk) {
        cmd->add_option("--tree", args.tree_path, "tree JSON file")->required();
        if (payoff) cmd->add_option("--payoff", args.payoff_path, "payoff JSON file")->required();
        if (risk) cmd->add_option("--risk", args.risk_path, "risk-measure JSON file")->required();
        cmd->add_option("--start-depth", args.start_depth, "start depth t");
        cmd->add_option("--tol", args.tol, "tolerance");
        cmd->add_option("--budget", args.budget, "enumeration budget");
        cmd->add_option("--format", args.format, "csv|json");
        cmd->add_option("--out", args.out_path, "output path (default stdout)");
        cmd->add_option("--seed", args.seed, "RNG seed");
        cmd->add_option("--threads", args.threads, "worker threads");
    };

    auto* validate = app.add_subcommand("validate", "validate input files");
    validate->add_option("--tree", args.tree_path, "tree JSON file")->required();
    validate->add_option("--payoff", args.payoff_path, "payoff JSON file");
    validate->add_option("--risk", args.risk_path, "risk-measure JSON file");

    auto* envelope = app.add_subcommand("envelope", "upper Snell envelope and stopping time");
    add_common(envelope, true, true);

    auto* oracle = app.add_subcommand("oracle", "brute-force cross-check of the envelope");
    add_common(oracle, true, true);

    auto* compare = app.add_subcommand("compare", "order two risk measures and their stopping times");
    add_common(compare, true, true);
    compare->add_option("--risk2", args.risk2_path, "second risk-measure JSON file")->required();

    auto* penalty = app.add_subcommand("penalty", "per-atom minimal penalty of a measure");
    add_common(penalty, false, true);
    penalty->add_option("--measure", args.measure_path, "measure JSON file")->required();
    penalty->add_flag("--oracle-check", oracle_check, "add numeric oracle column");

    auto* axioms = app.add_subcommand("axioms", "randomized risk-measure axiom checks");
    add_common(axioms, false, true);
    axioms->add_option("--samples", samples, "sample count");

    auto* gen = app.add_subcommand("gen", "generate a binomial tree and intrinsic payoff");
    gen->add_option("--horizon", gen_spec.horizon, "periods");
    gen->add_option("--initial", gen_spec.initial, "initial price");
    gen->add_option("--up", gen_spec.up, "up factor");
    gen->add_option("--down", gen_spec.down, "down factor");
    gen->add_option("--strike", gen_spec.strike, "strike");
    gen->add_option("--kind", gen_spec.kind, "put|call");
    gen->add_option("--p", gen_spec.up_probability, "reference up probability");
    gen->add_option("--out-tree", gen_tree_out, "tree output path");
    gen->add_option("--out-payoff", gen_payoff_out, "payoff output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return run_validate(args);
        if (*envelope) return run_envelope(args);
        if (*oracle) return run_oracle(args);
        if (*compare) return run_compare(args);
        if (*penalty) return run_penalty(args, oracle_check);
        if (*axioms) return run_axioms(args, samples);
        if (*gen) return run_gen(gen_spec, gen_tree_out, gen_payoff_out);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        if (e.code() == errc::BudgetExceeded || e.code() == errc::GridTooLarge) return kExitBudget;
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
