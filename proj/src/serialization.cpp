#include "coop/serialization.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace coop::io {

namespace {

void require_object(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + " must be a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& ctx) {
    require_object(j, ctx);
    for (const auto& [key, _] : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!known) throw ParseError("unknown key '" + key + "' in " + ctx);
    }
}

const json& member(const json& j, const char* key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError("missing key '" + std::string(key) + "' in " + ctx);
    return *it;
}

double as_number(const json& j, const std::string& ctx) {
    if (!j.is_number()) throw ParseError(ctx + " must be a number");
    return j.get<double>();
}

std::string as_string(const json& j, const std::string& ctx) {
    if (!j.is_string()) throw ParseError(ctx + " must be a string");
    return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& ctx) {
    if (!j.is_boolean()) throw ParseError(ctx + " must be a boolean");
    return j.get<bool>();
}

int as_int(const json& j, const std::string& ctx) {
    const double v = as_number(j, ctx);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ParseError(ctx + " must be an integer");
    return static_cast<int>(v);
}

std::size_t as_count(const json& j, const std::string& ctx) {
    const double v = as_number(j, ctx);
    if (v != std::floor(v) || v < 0 || v > 1e12) throw ParseError(ctx + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

const json& as_array(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw ParseError(ctx + " must be an array");
    return j;
}

std::map<ActorId, double> actor_number_map(const json& j, const std::string& ctx) {
    require_object(j, ctx);
    std::map<ActorId, double> out;
    for (const auto& [key, value] : j.items()) out[ActorId{key}] = as_number(value, ctx + "." + key);
    return out;
}

json actor_number_map_json(const std::map<ActorId, double>& m) {
    json out = json::object();
    for (const auto& [actor, v] : m) out[actor.value] = v;
    return out;
}

json by_actor(const std::vector<ActorId>& order, const std::vector<double>& values) {
    json out = json::object();
    for (std::size_t i = 0; i < order.size() && i < values.size(); ++i) out[order[i].value] = values[i];
    return out;
}

json order_json(const std::vector<ActorId>& order) {
    json out = json::array();
    for (const auto& a : order) out.push_back(a.value);
    return out;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
    for (std::size_t k = 0; k < end; ++k) {
        if (text[k] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

BargainingSpec bargaining_from_json(const json& j, const std::string& ctx) {
    check_keys(j, {"power"}, ctx);
    return BargainingSpec{actor_number_map(member(j, "power", ctx), ctx + ".power")};
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario

json to_json(const Scenario& s) {
    json j;
    j["actors"] = order_json(s.network.actors);

    json dependums = json::object();
    for (const auto& [actor, list] : s.network.dependums) {
        json arr = json::array();
        for (const auto& d : list) {
            arr.push_back({{"id", d.id}, {"kind", to_string(d.kind)}, {"importance_weight", d.importance_weight}});
        }
        dependums[actor.value] = arr;
    }
    j["dependums"] = dependums;

    json links = json::array();
    for (const auto& l : s.network.links) {
        json lj = {{"depender", l.depender.value},
                   {"dependee", l.dependee.value},
                   {"dependum_id", l.dependum_id},
                   {"criticality", l.criticality}};
        if (l.alternatives_count) lj["alternatives_count"] = *l.alternatives_count;
        if (l.criticality_override) lj["criticality_override"] = true;
        links.push_back(lj);
    }
    j["links"] = links;

    json value;
    if (const auto* p = std::get_if<PowerForm>(&s.value.form)) {
        value["form"] = {{"type", "power"}, {"beta", p->beta}};
    } else {
        value["form"] = {{"type", "logarithmic"}, {"theta", std::get<LogarithmicForm>(s.value.form).theta}};
    }
    value["synergy"] = to_string(s.value.synergy);
    value["gamma"] = s.value.gamma;
    j["value"] = value;

    j["bargaining"] = {{"power", actor_number_map_json(s.bargaining.power)}};
    j["endowments"] = actor_number_map_json(s.endowments);
    if (!s.action_bounds.empty()) {
        json bounds = json::object();
        for (const auto& [actor, b] : s.action_bounds) bounds[actor.value] = json::array({b.lo, b.hi});
        j["action_bounds"] = bounds;
    }
    if (const auto* q = std::get_if<QuadraticCost>(&s.cost_model)) {
        j["cost_model"] = {{"type", "quadratic"}, {"c", q->c}};
    } else {
        j["cost_model"] = {{"type", "linear"}};
    }
    j["appropriation_mode"] = to_string(s.appropriation_mode);
    if (s.matrix_override) j["matrix_override"] = to_json(*s.matrix_override);
    return j;
}

Scenario scenario_from_json(const json& j) {
    const std::string ctx = "scenario";
    check_keys(j,
               {"actors", "dependums", "links", "value", "bargaining", "endowments", "action_bounds", "cost_model",
                "appropriation_mode", "matrix_override"},
               ctx);
    Scenario s;

    for (const auto& a : as_array(member(j, "actors", ctx), "actors")) {
        s.network.actors.push_back(ActorId{as_string(a, "actors[]")});
    }

    const json& dependums = member(j, "dependums", ctx);
    require_object(dependums, "dependums");
    for (const auto& [actor, list] : dependums.items()) {
        const std::string dctx = "dependums." + actor;
        auto& out = s.network.dependums[ActorId{actor}];
        for (const auto& d : as_array(list, dctx)) {
            check_keys(d, {"id", "kind", "importance_weight"}, dctx + "[]");
            Dependum dep;
            dep.id = as_string(member(d, "id", dctx), dctx + ".id");
            try {
                dep.kind = dependum_kind_from_string(as_string(member(d, "kind", dctx), dctx + ".kind"));
            } catch (const DomainError& e) {
                throw ParseError(std::string(e.what()) + " in " + dctx);
            }
            dep.importance_weight = as_number(member(d, "importance_weight", dctx), dctx + ".importance_weight");
            out.push_back(std::move(dep));
        }
    }

    for (const auto& l : as_array(member(j, "links", ctx), "links")) {
        const std::string lctx = "links[]";
        check_keys(l, {"depender", "dependee", "dependum_id", "criticality", "alternatives_count", "criticality_override"},
                   lctx);
        DependencyLink link;
        link.depender = ActorId{as_string(member(l, "depender", lctx), lctx + ".depender")};
        link.dependee = ActorId{as_string(member(l, "dependee", lctx), lctx + ".dependee")};
        link.dependum_id = as_string(member(l, "dependum_id", lctx), lctx + ".dependum_id");
        if (l.contains("alternatives_count")) link.alternatives_count = as_int(l["alternatives_count"], lctx + ".alternatives_count");
        if (l.contains("criticality_override")) link.criticality_override = as_bool(l["criticality_override"], lctx);
        if (l.contains("criticality")) {
            link.criticality = as_number(l["criticality"], lctx + ".criticality");
        } else if (link.alternatives_count && *link.alternatives_count >= 1) {
            link.criticality = 1.0 / static_cast<double>(*link.alternatives_count);
        } else {
            throw ParseError("link needs criticality or a positive alternatives_count");
        }
        s.network.links.push_back(std::move(link));
    }

    const json& value = member(j, "value", ctx);
    check_keys(value, {"form", "synergy", "gamma"}, "value");
    const json& form = member(value, "form", "value");
    const std::string type = as_string(member(form, "type", "value.form"), "value.form.type");
    if (type == "power") {
        check_keys(form, {"type", "beta"}, "value.form");
        s.value.form = PowerForm{as_number(member(form, "beta", "value.form"), "value.form.beta")};
    } else if (type == "logarithmic") {
        check_keys(form, {"type", "theta"}, "value.form");
        s.value.form = LogarithmicForm{as_number(member(form, "theta", "value.form"), "value.form.theta")};
    } else {
        throw ParseError("unknown value form '" + type + "'");
    }
    try {
        s.value.synergy = synergy_kind_from_string(as_string(member(value, "synergy", "value"), "value.synergy"));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    s.value.gamma = as_number(member(value, "gamma", "value"), "value.gamma");

    s.bargaining = bargaining_from_json(member(j, "bargaining", ctx), "bargaining");
    s.endowments = actor_number_map(member(j, "endowments", ctx), "endowments");

    if (j.contains("action_bounds")) {
        const json& bounds = j["action_bounds"];
        require_object(bounds, "action_bounds");
        for (const auto& [actor, pair] : bounds.items()) {
            const std::string bctx = "action_bounds." + actor;
            if (!pair.is_array() || pair.size() != 2) throw ParseError(bctx + " must be [lo, hi]");
            s.action_bounds[ActorId{actor}] = {as_number(pair[0], bctx), as_number(pair[1], bctx)};
        }
    }

    const json& cost = member(j, "cost_model", ctx);
    const std::string cost_type = as_string(member(cost, "type", "cost_model"), "cost_model.type");
    if (cost_type == "linear") {
        check_keys(cost, {"type"}, "cost_model");
        s.cost_model = LinearCost{};
    } else if (cost_type == "quadratic") {
        check_keys(cost, {"type", "c"}, "cost_model");
        s.cost_model = QuadraticCost{as_number(member(cost, "c", "cost_model"), "cost_model.c")};
    } else {
        throw ParseError("unknown cost model '" + cost_type + "'");
    }

    try {
        s.appropriation_mode =
            appropriation_mode_from_string(as_string(member(j, "appropriation_mode", ctx), "appropriation_mode"));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }

    if (j.contains("matrix_override")) s.matrix_override = matrix_from_json(j["matrix_override"]);
    return s;
}

json parse_json_text(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte);
        std::ostringstream msg;
        msg << "JSON syntax error at line " << line << ", column " << column;
        throw ParseError(msg.str(), line, column);
    }
}

json read_json_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw NotFound("no such file '" + path.string() + "'");
    return parse_json_text(slurp(path));
}

Scenario parse_scenario(std::string_view text) { return scenario_from_json(parse_json_text(text)); }

Scenario read_scenario_file(const std::filesystem::path& path) { return scenario_from_json(read_json_file(path)); }

Scenario load_scenario(const std::filesystem::path& path) {
    Scenario s = read_scenario_file(path);
    if (auto v = validate_scenario(s); !v.empty()) throw ValidationError(std::move(v));
    return s;
}

// ---------------------------------------------------------------------------
// Matrix and shares

json to_json(const InterdependenceMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m.at(i, j));
        rows.push_back(row);
    }
    return {{"order", order_json(m.order)}, {"entries", rows}};
}

InterdependenceMatrix matrix_from_json(const json& j) {
    check_keys(j, {"order", "entries"}, "matrix_override");
    std::vector<ActorId> order;
    for (const auto& a : as_array(member(j, "order", "matrix_override"), "matrix_override.order")) {
        order.push_back(ActorId{as_string(a, "matrix_override.order[]")});
    }
    const json& rows = as_array(member(j, "entries", "matrix_override"), "matrix_override.entries");
    InterdependenceMatrix m;
    m.order = order;
    for (const auto& row : rows) {
        for (const auto& v : as_array(row, "matrix_override.entries[]")) {
            m.entries.push_back(as_number(v, "matrix_override entry"));
        }
        if (row.size() != order.size()) m.entries.push_back(std::nan(""));  // flagged by validation as shape error
    }
    if (rows.size() != order.size()) m.entries.push_back(std::nan(""));
    return m;
}

json to_json(const std::vector<AsymmetryRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"pair", {r.first.value, r.second.value}},
                       {"forward", r.forward},
                       {"backward", r.backward},
                       {"imbalance", r.imbalance}});
    }
    return out;
}

json to_json(const ShareVector& shares, const std::vector<ActorId>& order) { return by_actor(order, shares.alpha); }

// ---------------------------------------------------------------------------
// Solver

json to_json(const SolveSettings& s) {
    return {{"tolerance", s.tolerance},
            {"max_iterations", s.max_iterations},
            {"damping", s.damping},
            {"multi_start_count", s.multi_start_count},
            {"inner_bracket_points", s.inner_bracket_points}};
}

SolveSettings settings_from_json(const json& j, SolveSettings base) {
    check_keys(j, {"tolerance", "max_iterations", "damping", "multi_start_count", "inner_bracket_points"}, "settings");
    if (j.contains("tolerance")) base.tolerance = as_number(j["tolerance"], "settings.tolerance");
    if (j.contains("max_iterations")) base.max_iterations = as_count(j["max_iterations"], "settings.max_iterations");
    if (j.contains("damping")) base.damping = as_number(j["damping"], "settings.damping");
    if (j.contains("multi_start_count")) base.multi_start_count = as_count(j["multi_start_count"], "settings.multi_start_count");
    if (j.contains("inner_bracket_points")) {
        base.inner_bracket_points = as_count(j["inner_bracket_points"], "settings.inner_bracket_points");
    }
    return base;
}

json to_json(const EquilibriumResult& r) {
    json flags = json::object();
    for (std::size_t i = 0; i < r.order.size(); ++i) flags[r.order[i].value] = to_string(r.boundary_flags[i]);
    return {{"schema_version", kSchemaVersion},
            {"order", order_json(r.order)},
            {"actions", by_actor(r.order, r.actions.actions)},
            {"payoffs", by_actor(r.order, r.payoffs.pi)},
            {"utilities", by_actor(r.order, r.utilities)},
            {"value",
             {{"individual", by_actor(r.order, r.value.individual)},
              {"synergy_raw", r.value.synergy_raw},
              {"synergy_value", r.value.synergy_value},
              {"total", r.value.total}}},
            {"mean_action", r.mean_action()},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"residual", r.residual},
            {"multi_start_agreement", r.multi_start_agreement},
            {"converged_starts", r.converged_starts},
            {"boundary_flags", flags}};
}

// ---------------------------------------------------------------------------
// Sweeps

json to_json(const SweepAxis& axis) {
    return {{"parameter", to_string(axis.parameter)}, {"values", axis.values}};
}

SweepAxis axis_from_json(const json& j) {
    if (j.is_string()) {
        try {
            return parse_axis(j.get<std::string>());
        } catch (const Error& e) {
            throw ParseError(e.what());
        }
    }
    check_keys(j, {"parameter", "values"}, "axis");
    SweepAxis axis;
    try {
        axis.parameter = sweep_parameter_from_string(as_string(member(j, "parameter", "axis"), "axis.parameter"));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    for (const auto& v : as_array(member(j, "values", "axis"), "axis.values")) {
        if (axis.parameter == SweepParameter::mode && v.is_string()) {
            const auto name = v.get<std::string>();
            if (name != "separable" && name != "pooled") throw ParseError("mode axis value must be separable or pooled");
            axis.values.push_back(name == "pooled" ? 1.0 : 0.0);
        } else {
            axis.values.push_back(as_number(v, "axis.values[]"));
        }
    }
    return axis;
}

json to_json(const SweepResult& r) {
    json axes = json::array();
    for (const auto& a : r.axes) axes.push_back(to_json(a));
    json rows = json::array();
    for (const auto& row : r.rows) {
        json params = json::object();
        for (std::size_t k = 0; k < r.axes.size(); ++k) {
            const auto p = r.axes[k].parameter;
            if (p == SweepParameter::mode) {
                params[to_string(p)] = row.parameters[k] == 0.0 ? "separable" : "pooled";
            } else {
                params[to_string(p)] = row.parameters[k];
            }
        }
        rows.push_back({{"parameters", params},
                        {"actions", by_actor(r.order, row.actions.actions)},
                        {"payoffs", by_actor(r.order, row.payoffs)},
                        {"total_value", row.total_value},
                        {"converged", row.converged}});
    }
    return {{"schema_version", kSchemaVersion},
            {"axes", axes},
            {"order", order_json(r.order)},
            {"rows", rows},
            {"csv", sweep_to_csv(r)}};
}

// ---------------------------------------------------------------------------
// Counterfactuals

json to_json(const CounterfactualEdit& e) {
    json j = json::object();
    json crit = json::array();
    for (const auto& c : e.criticality_overrides) {
        crit.push_back({{"depender", c.link.depender.value},
                        {"dependee", c.link.dependee.value},
                        {"dependum_id", c.link.dependum_id},
                        {"criticality", c.criticality}});
    }
    j["criticality_overrides"] = crit;
    json weights = json::array();
    for (const auto& w : e.weight_overrides) {
        weights.push_back({{"actor", w.actor.value}, {"dependum_id", w.dependum_id}, {"weight", w.weight}});
    }
    j["weight_overrides"] = weights;
    if (e.bargaining_overrides) j["bargaining_overrides"] = {{"power", actor_number_map_json(e.bargaining_overrides->power)}};
    if (e.gamma_override) j["gamma_override"] = *e.gamma_override;
    return j;
}

CounterfactualEdit edit_from_json(const json& j) {
    const std::string ctx = "counterfactual edit";
    check_keys(j, {"criticality_overrides", "weight_overrides", "bargaining_overrides", "gamma_override"}, ctx);
    CounterfactualEdit e;
    if (j.contains("criticality_overrides")) {
        for (const auto& c : as_array(j["criticality_overrides"], "criticality_overrides")) {
            const std::string cctx = "criticality_overrides[]";
            check_keys(c, {"depender", "dependee", "dependum_id", "criticality"}, cctx);
            CriticalityOverride o;
            o.link.depender = ActorId{as_string(member(c, "depender", cctx), cctx + ".depender")};
            o.link.dependee = ActorId{as_string(member(c, "dependee", cctx), cctx + ".dependee")};
            o.link.dependum_id = as_string(member(c, "dependum_id", cctx), cctx + ".dependum_id");
            o.criticality = as_number(member(c, "criticality", cctx), cctx + ".criticality");
            e.criticality_overrides.push_back(std::move(o));
        }
    }
    if (j.contains("weight_overrides")) {
        for (const auto& w : as_array(j["weight_overrides"], "weight_overrides")) {
            const std::string wctx = "weight_overrides[]";
            check_keys(w, {"actor", "dependum_id", "weight"}, wctx);
            WeightOverride o;
            o.actor = ActorId{as_string(member(w, "actor", wctx), wctx + ".actor")};
            o.dependum_id = as_string(member(w, "dependum_id", wctx), wctx + ".dependum_id");
            o.weight = as_number(member(w, "weight", wctx), wctx + ".weight");
            e.weight_overrides.push_back(std::move(o));
        }
    }
    if (j.contains("bargaining_overrides") && !j["bargaining_overrides"].is_null()) {
        e.bargaining_overrides = bargaining_from_json(j["bargaining_overrides"], "bargaining_overrides");
    }
    if (j.contains("gamma_override") && !j["gamma_override"].is_null()) {
        e.gamma_override = as_number(j["gamma_override"], "gamma_override");
    }
    return e;
}

json to_json(const CounterfactualReport& r) {
    const auto& order = r.base.order;
    json deltas = json::array();
    for (const auto& d : r.deltas) {
        deltas.push_back({{"actor", d.actor.value},
                          {"base_action", d.base_action},
                          {"edited_action", d.edited_action},
                          {"action_delta", d.action_delta()},
                          {"base_payoff", d.base_payoff},
                          {"edited_payoff", d.edited_payoff},
                          {"payoff_delta", d.payoff_delta()},
                          {"base_utility", d.base_utility},
                          {"edited_utility", d.edited_utility},
                          {"utility_delta", d.utility_delta()},
                          {"base_share", d.base_share},
                          {"edited_share", d.edited_share},
                          {"share_delta", d.share_delta()}});
    }
    return {{"schema_version", kSchemaVersion},
            {"base", to_json(r.base)},
            {"edited", to_json(r.edited)},
            {"base_matrix", to_json(r.base_matrix)},
            {"edited_matrix", to_json(r.edited_matrix)},
            {"matrix_delta", to_json(r.matrix_delta())},
            {"base_shares", to_json(r.base_shares, order)},
            {"edited_shares", to_json(r.edited_shares, order)},
            {"deltas", deltas},
            {"matrix_override_dropped", r.matrix_override_dropped},
            {"mean_action_reduction_percent", r.mean_action_reduction_percent}};
}

// ---------------------------------------------------------------------------
// Scoring

json to_json(const ValidationRubric& r) {
    json grading = r.grading == Grading::step ? json{{"type", "step"}}
                                              : json{{"type", "linear_decay"}, {"width", r.decay_width}};
    return {{"baseline_range", {r.baseline_range.lo, r.baseline_range.hi}},
            {"coop_increase_range", {r.coop_increase_range.lo, r.coop_increase_range.hi}},
            {"counterfactual_reduction_range", {r.counterfactual_reduction_range.lo, r.counterfactual_reduction_range.hi}},
            {"points_per_family",
             {{"baseline", r.baseline_points},
              {"coop_increase", r.coop_increase_points},
              {"counterfactual_reduction", r.counterfactual_reduction_points}}},
            {"grading", grading}};
}

ValidationRubric rubric_from_json(const json& j) {
    check_keys(j, {"baseline_range", "coop_increase_range", "counterfactual_reduction_range", "points_per_family", "grading"},
               "rubric");
    ValidationRubric r;
    auto range = [](const json& v, const std::string& ctx) {
        if (!v.is_array() || v.size() != 2) throw ParseError(ctx + " must be [lo, hi]");
        return MetricRange{as_number(v[0], ctx), as_number(v[1], ctx)};
    };
    if (j.contains("baseline_range")) r.baseline_range = range(j["baseline_range"], "baseline_range");
    if (j.contains("coop_increase_range")) r.coop_increase_range = range(j["coop_increase_range"], "coop_increase_range");
    if (j.contains("counterfactual_reduction_range")) {
        r.counterfactual_reduction_range = range(j["counterfactual_reduction_range"], "counterfactual_reduction_range");
    }
    if (j.contains("points_per_family")) {
        const json& p = j["points_per_family"];
        check_keys(p, {"baseline", "coop_increase", "counterfactual_reduction"}, "points_per_family");
        if (p.contains("baseline")) r.baseline_points = as_number(p["baseline"], "points_per_family.baseline");
        if (p.contains("coop_increase")) r.coop_increase_points = as_number(p["coop_increase"], "points_per_family.coop_increase");
        if (p.contains("counterfactual_reduction")) {
            r.counterfactual_reduction_points = as_number(p["counterfactual_reduction"], "points_per_family.counterfactual_reduction");
        }
    }
    if (j.contains("grading")) {
        const json& g = j["grading"];
        const std::string type = g.is_string() ? g.get<std::string>() : as_string(member(g, "type", "grading"), "grading.type");
        if (type == "step") {
            if (g.is_object()) check_keys(g, {"type"}, "grading");
            r.grading = Grading::step;
        } else if (type == "linear_decay") {
            check_keys(g, {"type", "width"}, "grading");
            r.grading = Grading::linear_decay;
            r.decay_width = as_number(member(g, "width", "grading"), "grading.width");
        } else {
            throw ParseError("unknown grading '" + type + "'");
        }
    }
    return r;
}

json to_json(const ValidationScore& s) {
    json families = json::array();
    for (const auto& f : s.families) {
        json fj = {{"family", f.family},
                   {"points", f.points},
                   {"max_points", f.max_points},
                   {"in_range", f.in_range},
                   {"missing", f.missing}};
        fj["metric"] = f.missing ? json(nullptr) : json(f.metric);
        families.push_back(fj);
    }
    const auto& m = s.metrics;
    json metrics = {{"baseline_mean_action", m.baseline_mean_action},
                    {"cooperative_mean_action", m.cooperative_mean_action},
                    {"coop_increase_percent", m.coop_increase_percent},
                    {"all_converged", m.all_converged}};
    metrics["counterfactual_mean_action"] = m.counterfactual_mean_action ? json(*m.counterfactual_mean_action) : json(nullptr);
    metrics["counterfactual_reduction_percent"] =
        m.counterfactual_reduction_percent ? json(*m.counterfactual_reduction_percent) : json(nullptr);
    return {{"schema_version", kSchemaVersion},
            {"metrics", metrics},
            {"families", families},
            {"total", s.total},
            {"max_total", s.max_total},
            {"flags", s.flags},
            {"definitions",
             {{"baseline", "mean equilibrium action with the interdependence matrix forced to zero"},
              {"coop_increase", "percent change in mean equilibrium action from baseline to the full matrix"},
              {"counterfactual_reduction",
               "percent drop in mean equilibrium action from the full-matrix equilibrium to the edited scenario"}}}};
}

json to_json(const std::vector<Violation>& violations) {
    json out = json::array();
    for (const auto& v : violations) out.push_back({{"code", v.code}, {"message", v.message}});
    return out;
}

// ---------------------------------------------------------------------------
// Canonical form

json canonicalize(const json& j) {
    switch (j.type()) {
        case json::value_t::object: {
            json out = json::object();
            for (const auto& [k, v] : j.items()) out[k] = canonicalize(v);
            return out;
        }
        case json::value_t::array: {
            json out = json::array();
            for (const auto& v : j) out.push_back(canonicalize(v));
            return out;
        }
        case json::value_t::number_float: {
            const double x = j.get<double>();
            if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9007199254740992.0) {
                return json(static_cast<std::int64_t>(x));
            }
            return j;
        }
        case json::value_t::number_unsigned:
            return json(static_cast<std::int64_t>(j.get<std::uint64_t>()));
        default:
            return j;
    }
}

std::string canonical_dump(const json& j) { return canonicalize(j).dump(); }

std::string content_digest(const json& j) {
    const std::string text = canonical_dump(j);
    unsigned char hash[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), hash, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::ostringstream os;
    for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(hash[k]);
    return os.str();
}

}  // namespace coop::io
