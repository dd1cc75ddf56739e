#include "riskmon/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace riskmon {

using nlohmann::json;

TreeSpec parse_tree_spec(const json& j) {
    if (!j.is_object() || !j.contains("horizon") || !j.contains("nodes"))
        throw Error(errc::ParseError, "tree file needs 'horizon' and 'nodes'");
    TreeSpec spec;
    spec.horizon = j.at("horizon").get<int>();
    for (const auto& n : j.at("nodes")) {
        NodeSpec ns;
        ns.id = n.at("id").get<std::string>();
        if (n.contains("parent") && !n.at("parent").is_null()) {
            ns.parent = n.at("parent").get<std::string>();
            if (!n.contains("p"))
                throw Error(errc::ParseError, "node '" + ns.id + "' is missing edge probability 'p'");
            ns.p = n.at("p").get<double>();
        }
        spec.nodes.push_back(std::move(ns));
    }
    return spec;
}

json tree_spec_to_json(const ScenarioTree& tree) {
    json nodes = json::array();
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        json entry{{"id", tree.label(n)}};
        if (n == tree.root()) {
            entry["parent"] = nullptr;
        } else {
            NodeId p = tree.parent(n);
            entry["parent"] = tree.label(p);
            const auto& kids = tree.children(p);
            for (std::size_t k = 0; k < kids.size(); ++k)
                if (kids[k] == n) entry["p"] = tree.ref_transition(p)[k];
        }
        nodes.push_back(std::move(entry));
    }
    return json{{"horizon", tree.horizon()}, {"nodes", std::move(nodes)}};
}

AdaptedProcess parse_payoff(const json& j, const ScenarioTree& tree) {
    if (!j.is_object()) throw Error(errc::ParseError, "payoff file must be an object node id -> value");
    AdaptedProcess h(tree.node_count(), 0.0);
    std::vector<char> seen(tree.node_count(), 0);
    for (const auto& [key, value] : j.items()) {
        NodeId n = tree.index_of(key);
        h[n] = value.get<double>();
        seen[n] = 1;
    }
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (!seen[n])
            throw Error(errc::IncompleteProcess, "payoff missing node '" + tree.label(n) + "'");
    return h;
}

json payoff_to_json(const ScenarioTree& tree, const AdaptedProcess& h) {
    json out = json::object();
    for (NodeId n = 0; n < tree.node_count(); ++n) out[tree.label(n)] = h[n];
    return out;
}

namespace {

std::vector<std::vector<double>> transitions_with_default(const json& j, const ScenarioTree& tree,
                                                          const char* key) {
    std::vector<std::vector<double>> rows(tree.node_count());
    for (NodeId n = 0; n < tree.node_count(); ++n)
        if (!tree.is_leaf(n)) rows[n] = tree.ref_transition(n);
    if (j.contains(key))
        for (const auto& [id, row] : j.at(key).items())
            rows[tree.index_of(id)] = row.get<std::vector<double>>();
    return rows;
}

} // namespace

TreeMeasure parse_measure(const json& j, const ScenarioTree& tree) {
    return TreeMeasure(tree, transitions_with_default(j, tree, "transitions"));
}

OneStepSpec parse_one_step_spec(const json& j, const ScenarioTree& tree) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "expectation") {
        return ExpectationStep{parse_measure(j, tree)};
    }
    if (kind == "entropic") {
        return EntropicStep{j.at("gamma").get<double>(),
                            TreeMeasure(tree, transitions_with_default(j, tree, "base"))};
    }
    if (kind == "worstcase") {
        std::vector<std::vector<std::vector<double>>> priors(tree.node_count());
        for (NodeId n = 0; n < tree.node_count(); ++n)
            if (!tree.is_leaf(n)) priors[n] = {tree.ref_transition(n)};
        if (j.contains("priors"))
            for (const auto& [id, list] : j.at("priors").items())
                priors[tree.index_of(id)] = list.get<std::vector<std::vector<double>>>();
        return WorstCaseStep{std::move(priors)};
    }
    if (kind == "penalized") {
        std::vector<std::vector<PenalizedEntry>> entries(tree.node_count());
        for (NodeId n = 0; n < tree.node_count(); ++n)
            if (!tree.is_leaf(n)) entries[n] = {{tree.ref_transition(n), 0.0}};
        if (j.contains("entries"))
            for (const auto& [id, list] : j.at("entries").items()) {
                std::vector<PenalizedEntry> parsed;
                for (const auto& e : list)
                    parsed.push_back({e.at("q").get<std::vector<double>>(), e.at("beta").get<double>()});
                entries[tree.index_of(id)] = std::move(parsed);
            }
        return PenalizedStep{std::move(entries)};
    }
    throw Error(errc::ParseError, "unknown risk kind '" + kind + "'");
}

DynamicRiskMeasure parse_risk(const json& j, const ScenarioTree& tree) {
    if (j.contains("steps")) {
        std::vector<OneStepRisk> steps;
        for (const auto& s : j.at("steps")) steps.emplace_back(tree, parse_one_step_spec(s, tree));
        return DynamicRiskMeasure(tree, std::move(steps));
    }
    return DynamicRiskMeasure::uniform(tree, parse_one_step_spec(j, tree));
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::ParseError, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(errc::ParseError, path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::ParseError, "cannot write '" + path + "'");
    out << content;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string envelope_report_csv(const ScenarioTree& tree, const AdaptedProcess& h,
                                const AdaptedProcess& u, const StoppingRegion& tau) {
    std::vector<char> flag(tree.node_count(), 0);
    for (NodeId n : tau.stop_nodes) flag[n] = 1;
    std::ostringstream out;
    out << "node_id,H,U,stop_flag\n";
    for (NodeId n = 0; n < tree.node_count(); ++n)
        out << tree.label(n) << ',' << format_number(h[n]) << ',' << format_number(u[n]) << ','
            << (flag[n] ? 1 : 0) << '\n';
    return out.str();
}

json envelope_report_json(const ScenarioTree& tree, const AdaptedProcess& h,
                          const AdaptedProcess& u, const StoppingRegion& tau) {
    std::vector<char> flag(tree.node_count(), 0);
    for (NodeId n : tau.stop_nodes) flag[n] = 1;
    json nodes = json::array();
    for (NodeId n = 0; n < tree.node_count(); ++n)
        nodes.push_back({{"id", tree.label(n)},
                         {"H", h[n]},
                         {"U", u[n]},
                         {"stop", static_cast<bool>(flag[n])}});
    json risk_at_start = json::object();
    for (NodeId n : tree.level(tau.start_depth)) risk_at_start[tree.label(n)] = u[n];
    json stops = json::array();
    for (NodeId n : tau.stop_nodes) stops.push_back(tree.label(n));
    return json{{"start_depth", tau.start_depth},
                {"risk_at_start", std::move(risk_at_start)},
                {"nodes", std::move(nodes)},
                {"stop_nodes", std::move(stops)}};
}

std::string penalty_report_csv(const ScenarioTree& tree, const PenaltyEvaluation& eval,
                               const std::vector<std::optional<double>>& oracle) {
    std::ostringstream out;
    out << "atom_id,value" << (oracle.empty() ? "" : ",oracle") << '\n';
    for (NodeId n : tree.level(eval.t)) {
        out << tree.label(n) << ',';
        out << (eval.values[n] ? format_number(*eval.values[n]) : "inf");
        if (!oracle.empty())
            out << ',' << (oracle[n] ? format_number(*oracle[n]) : "inf");
        out << '\n';
    }
    return out.str();
}

GeneratedInstance generate_binomial(const BinomialGenSpec& spec) {
    if (spec.horizon < 1) throw Error(errc::ParseError, "horizon must be >= 1");
    if (spec.up <= 0.0 || spec.down <= 0.0) throw Error(errc::ParseError, "factors must be > 0");
    if (spec.up_probability <= 0.0 || spec.up_probability >= 1.0)
        throw Error(errc::ParseError, "up probability must be in (0,1)");
    if (spec.kind != "put" && spec.kind != "call")
        throw Error(errc::ParseError, "payoff kind must be 'put' or 'call'");

    GeneratedInstance out;
    out.tree.horizon = spec.horizon;

    auto intrinsic = [&](double s) {
        return spec.kind == "put" ? std::max(spec.strike - s, 0.0) : std::max(s - spec.strike, 0.0);
    };

    // Explicit non-recombining tree; ids are move paths ("root", "u", "ud", ...).
    struct Item {
        std::string id;
        double price;
        int depth;
    };
    std::vector<Item> frontier{{"root", spec.initial, 0}};
    out.tree.nodes.push_back({"root", std::nullopt, 0.0});
    out.payoff.emplace_back("root", intrinsic(spec.initial));
    while (!frontier.empty()) {
        std::vector<Item> next;
        for (const auto& item : frontier) {
            if (item.depth == spec.horizon) continue;
            std::string base = item.id == "root" ? "" : item.id;
            Item up{base + "u", item.price * spec.up, item.depth + 1};
            Item down{base + "d", item.price * spec.down, item.depth + 1};
            out.tree.nodes.push_back({up.id, item.id, spec.up_probability});
            out.tree.nodes.push_back({down.id, item.id, 1.0 - spec.up_probability});
            out.payoff.emplace_back(up.id, intrinsic(up.price));
            out.payoff.emplace_back(down.id, intrinsic(down.price));
            next.push_back(std::move(up));
            next.push_back(std::move(down));
        }
        frontier = std::move(next);
    }
    return out;
}

} // namespace riskmon
