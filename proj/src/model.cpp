#include "coop/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace coop {

namespace {

const std::vector<Dependum> kNoDependums;

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

class Collector {
public:
    void add(std::string code, std::string message) {
        out_.push_back({std::move(code), std::move(message)});
    }
    std::vector<Violation> take() { return std::move(out_); }

private:
    std::vector<Violation> out_;
};

template <typename Map>
void check_per_actor_keys(const Map& m, const std::set<ActorId>& actors, const char* field,
                          Collector& out) {
    for (const auto& [actor, _] : m) {
        if (!actors.count(actor)) {
            out.add("unknown_actor",
                    std::string(field) + " references unknown actor '" + actor.value + "'");
        }
    }
}

void check_network(const DependencyNetwork& net, const std::set<ActorId>& actors, Collector& out) {
    check_per_actor_keys(net.dependums, actors, "dependums", out);

    for (const auto& [actor, list] : net.dependums) {
        std::set<std::string> seen;
        for (const auto& d : list) {
            if (d.id.empty()) {
                out.add("empty_dependum_id", "actor '" + actor.value + "' has a dependum with an empty id");
            } else if (!seen.insert(d.id).second) {
                out.add("duplicate_dependum",
                        "actor '" + actor.value + "' declares dependum '" + d.id + "' more than once");
            }
            if (!std::isfinite(d.importance_weight)) {
                out.add("non_finite_value", "importance weight of '" + actor.value + "/" + d.id + "' is not finite");
            } else if (d.importance_weight < 0.0) {
                out.add("negative_weight", "importance weight of '" + actor.value + "/" + d.id +
                                               "' is negative (" + fmt_num(d.importance_weight) + ")");
            }
        }
    }

    std::set<LinkKey> seen_links;
    std::set<ActorId> linked_dependers;
    for (const auto& link : net.links) {
        const std::string where = "link " + link.depender.value + "->" + link.dependee.value + " [" +
                                  link.dependum_id + "]";
        bool refs_ok = true;
        if (!actors.count(link.depender)) {
            out.add("unknown_depender", where + ": depender is not an actor");
            refs_ok = false;
        }
        if (!actors.count(link.dependee)) {
            out.add("unknown_dependee", where + ": dependee is not an actor");
            refs_ok = false;
        }
        if (link.depender == link.dependee) {
            out.add("self_dependency", where + ": an actor cannot depend on itself");
        }
        if (actors.count(link.depender)) {
            const auto& owned = net.dependums_of(link.depender);
            const bool found = std::any_of(owned.begin(), owned.end(),
                                           [&](const Dependum& d) { return d.id == link.dependum_id; });
            if (!found) {
                out.add("unknown_dependum", where + ": dependum is not among the depender's dependums");
                refs_ok = false;
            }
        }
        if (!seen_links.insert(link.key()).second) {
            out.add("duplicate_link", where + ": more than one link for this triple");
        }
        if (!std::isfinite(link.criticality)) {
            out.add("non_finite_value", where + ": criticality is not finite");
        } else if (link.criticality < 0.0 || link.criticality > 1.0) {
            out.add("criticality_out_of_range",
                    where + ": criticality " + fmt_num(link.criticality) + " outside [0,1]");
        }
        if (link.alternatives_count) {
            const int n = *link.alternatives_count;
            if (n < 1) {
                out.add("invalid_alternatives_count", where + ": alternatives_count must be >= 1");
            } else if (!link.criticality_override &&
                       std::abs(link.criticality - 1.0 / n) > 1e-12) {
                out.add("criticality_alternatives_mismatch",
                        where + ": criticality " + fmt_num(link.criticality) + " differs from 1/" +
                            std::to_string(n) + " without criticality_override");
            }
        }
        if (refs_ok) linked_dependers.insert(link.depender);
    }

    for (const auto& actor : linked_dependers) {
        double total = 0.0;
        for (const auto& d : net.dependums_of(actor)) total += d.importance_weight;
        if (!(total > 0.0)) {
            out.add("zero_total_weight",
                    "actor '" + actor.value + "' has links but its importance weights sum to zero");
        }
    }
}

void check_matrix(const InterdependenceMatrix& m, const std::vector<ActorId>& order, Collector& out) {
    if (m.order != order) {
        out.add("matrix_override_order", "matrix_override order must equal the canonical actor order");
    }
    if (m.entries.size() != m.order.size() * m.order.size()) {
        out.add("matrix_override_shape", "matrix_override entries are not N x N");
        return;
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            const double v = m.at(i, j);
            if (i == j && v != 0.0) {
                out.add("matrix_override_diagonal",
                        "matrix_override diagonal entry for '" + m.order[i].value + "' must be 0");
            } else if (!(v >= 0.0 && v <= 1.0)) {
                out.add("matrix_override_range", "matrix_override entry (" + m.order[i].value + ", " +
                                                     m.order[j].value + ") = " + fmt_num(v) +
                                                     " outside [0,1]");
            }
        }
    }
}

}  // namespace

const std::vector<Dependum>& DependencyNetwork::dependums_of(const ActorId& actor) const {
    auto it = dependums.find(actor);
    return it == dependums.end() ? kNoDependums : it->second;
}

bool DependencyNetwork::has_actor(const ActorId& actor) const {
    return std::find(actors.begin(), actors.end(), actor) != actors.end();
}

InterdependenceMatrix::InterdependenceMatrix(std::vector<ActorId> actors)
    : order(std::move(actors)), entries(order.size() * order.size(), 0.0) {}

std::size_t InterdependenceMatrix::index_of(const ActorId& actor) const {
    auto it = std::find(order.begin(), order.end(), actor);
    if (it == order.end()) throw LookupError("unknown actor '" + actor.value + "'");
    return static_cast<std::size_t>(it - order.begin());
}

ActionBounds Scenario::bounds_of(const ActorId& actor) const {
    if (auto it = action_bounds.find(actor); it != action_bounds.end()) return it->second;
    auto e = endowments.find(actor);
    return {0.0, e == endowments.end() ? 0.0 : e->second};
}

std::vector<ActorId> canonical_actor_order(const DependencyNetwork& network) {
    std::vector<ActorId> order = network.actors;
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    return order;
}

std::vector<ActorId> canonical_actor_order(const Scenario& s) {
    return canonical_actor_order(s.network);
}

std::vector<Violation> validate_scenario(const Scenario& s) {
    Collector out;

    std::set<ActorId> actors;
    if (s.network.actors.empty()) out.add("no_actors", "scenario declares no actors");
    for (const auto& a : s.network.actors) {
        if (a.value.empty()) out.add("empty_actor_id", "actor ids must be nonempty");
        if (!actors.insert(a).second) out.add("duplicate_actor", "actor '" + a.value + "' declared twice");
    }

    check_network(s.network, actors, out);

    if (const auto* p = std::get_if<PowerForm>(&s.value.form)) {
        if (!(p->beta > 0.0 && p->beta < 1.0)) {
            out.add("invalid_beta", "power form requires 0 < beta < 1, got " + fmt_num(p->beta));
        }
    } else if (const auto* l = std::get_if<LogarithmicForm>(&s.value.form)) {
        if (!(l->theta > 0.0) || !std::isfinite(l->theta)) {
            out.add("invalid_theta", "logarithmic form requires theta > 0, got " + fmt_num(l->theta));
        }
    }
    if (!(s.value.gamma >= 0.0) || !std::isfinite(s.value.gamma)) {
        out.add("negative_gamma", "gamma must be a finite value >= 0, got " + fmt_num(s.value.gamma));
    }

    check_per_actor_keys(s.bargaining.power, actors, "bargaining", out);
    check_per_actor_keys(s.endowments, actors, "endowments", out);
    check_per_actor_keys(s.action_bounds, actors, "action_bounds", out);

    for (const auto& a : actors) {
        auto b = s.bargaining.power.find(a);
        if (b == s.bargaining.power.end()) {
            out.add("missing_bargaining_power", "no bargaining power for actor '" + a.value + "'");
        } else if (!(b->second > 0.0) || !std::isfinite(b->second)) {
            out.add("nonpositive_bargaining_power",
                    "bargaining power of '" + a.value + "' must be > 0, got " + fmt_num(b->second));
        }

        auto e = s.endowments.find(a);
        if (e == s.endowments.end()) {
            out.add("missing_endowment", "no endowment for actor '" + a.value + "'");
        } else if (!(e->second >= 0.0) || !std::isfinite(e->second)) {
            out.add("negative_endowment",
                    "endowment of '" + a.value + "' must be >= 0, got " + fmt_num(e->second));
        }

        if (e != s.endowments.end() || s.action_bounds.count(a)) {
            const ActionBounds bnd = s.bounds_of(a);
            if (!(bnd.lo >= 0.0 && bnd.lo < bnd.hi) || !std::isfinite(bnd.hi)) {
                out.add("invalid_action_bounds", "action bounds of '" + a.value + "' must satisfy 0 <= lo < hi, got [" +
                                                     fmt_num(bnd.lo) + ", " + fmt_num(bnd.hi) + "]");
            }
        }
    }

    if (const auto* q = std::get_if<QuadraticCost>(&s.cost_model)) {
        if (!(q->c > 0.0) || !std::isfinite(q->c)) {
            out.add("invalid_cost", "quadratic cost requires c > 0, got " + fmt_num(q->c));
        }
    }

    if (s.matrix_override) check_matrix(*s.matrix_override, canonical_actor_order(s), out);

    return out.take();
}

std::string to_string(DependumKind kind) {
    switch (kind) {
        case DependumKind::goal: return "goal";
        case DependumKind::task: return "task";
        case DependumKind::resource: return "resource";
        case DependumKind::softgoal: return "softgoal";
    }
    return "goal";
}

std::string to_string(SynergyKind kind) {
    switch (kind) {
        case SynergyKind::geometric_mean: return "geometric_mean";
        case SynergyKind::minimum: return "minimum";
        case SynergyKind::additive: return "additive";
    }
    return "geometric_mean";
}

std::string to_string(AppropriationMode mode) {
    return mode == AppropriationMode::pooled ? "pooled" : "separable";
}

DependumKind dependum_kind_from_string(const std::string& s) {
    if (s == "goal") return DependumKind::goal;
    if (s == "task") return DependumKind::task;
    if (s == "resource") return DependumKind::resource;
    if (s == "softgoal") return DependumKind::softgoal;
    throw DomainError("unknown dependum kind '" + s + "'");
}

SynergyKind synergy_kind_from_string(const std::string& s) {
    if (s == "geometric_mean") return SynergyKind::geometric_mean;
    if (s == "minimum") return SynergyKind::minimum;
    if (s == "additive") return SynergyKind::additive;
    throw DomainError("unknown synergy kind '" + s + "'");
}

AppropriationMode appropriation_mode_from_string(const std::string& s) {
    if (s == "separable") return AppropriationMode::separable;
    if (s == "pooled") return AppropriationMode::pooled;
    throw DomainError("unknown appropriation mode '" + s + "'");
}

}  // namespace coop
