#include "coop/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "coop/format.hpp"

namespace coop {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw DomainError("invalid number '" + t + "' in " + context);
    }
    if (used != t.size() || !std::isfinite(v)) throw DomainError("invalid number '" + t + "' in " + context);
    return v;
}

std::vector<std::vector<double>> enumerate_grid(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<double>> points{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<double>> next;
        next.reserve(points.size() * axis.values.size());
        for (const auto& prefix : points) {
            for (double v : axis.values) {
                auto p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        }
        points = std::move(next);
    }
    return points;
}

std::string axis_value_text(SweepParameter p, double v) {
    if (p == SweepParameter::mode) return v == 0.0 ? "separable" : "pooled";
    return format_g12(v);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::gamma: return "gamma";
        case SweepParameter::beta: return "beta";
        case SweepParameter::theta: return "theta";
        case SweepParameter::endowment: return "endowment";
        case SweepParameter::D_scale: return "D_scale";
        case SweepParameter::cost: return "cost";
        case SweepParameter::mode: return "mode";
    }
    return "gamma";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
    for (auto p : {SweepParameter::gamma, SweepParameter::beta, SweepParameter::theta, SweepParameter::endowment,
                   SweepParameter::D_scale, SweepParameter::cost, SweepParameter::mode}) {
        if (to_string(p) == s) return p;
    }
    throw DomainError("unknown sweep parameter '" + s + "'");
}

SweepAxis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw DomainError("axis '" + text + "' must look like name=start:stop:step or name=v1,v2");
    SweepAxis axis;
    axis.parameter = sweep_parameter_from_string(trim(text.substr(0, eq)));
    const std::string body = trim(text.substr(eq + 1));
    if (body.empty()) throw DomainError("axis '" + text + "' has no values");

    if (body.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(body);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() != 3) throw DomainError("range axis '" + text + "' must be start:stop:step");
        const double start = parse_number(parts[0], text);
        const double stop = parse_number(parts[1], text);
        const double step = parse_number(parts[2], text);
        if (!(step > 0.0)) throw DomainError("range axis '" + text + "' needs a positive step");
        if (stop < start) throw DomainError("range axis '" + text + "' has stop < start");
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (count > kDefaultGridCap) throw SizeError("range axis '" + text + "' has too many values");
        for (std::size_t k = 0; k < count; ++k) {
            // Snap the last value onto `stop` when it lands within tolerance.
            double v = start + static_cast<double>(k) * step;
            if (std::abs(v - stop) <= 1e-9 * std::max(1.0, std::abs(stop))) v = stop;
            axis.values.push_back(v);
        }
        return axis;
    }

    std::stringstream ss(body);
    for (std::string item; std::getline(ss, item, ',');) {
        const std::string t = trim(item);
        if (axis.parameter == SweepParameter::mode && (t == "separable" || t == "pooled")) {
            axis.values.push_back(t == "pooled" ? 1.0 : 0.0);
        } else {
            axis.values.push_back(parse_number(t, text));
        }
    }
    return axis;
}

std::size_t grid_size(const SweepSpec& spec) {
    std::size_t total = 1;
    for (const auto& axis : spec.axes) {
        if (axis.values.empty()) throw DomainError("axis '" + to_string(axis.parameter) + "' has no values");
        for (double v : axis.values) {
            if (!std::isfinite(v)) throw DomainError("axis '" + to_string(axis.parameter) + "' has a non-finite value");
        }
        if (total > spec.cap / axis.values.size() + 1) throw SizeError("sweep grid exceeds the cap");
        total *= axis.values.size();
    }
    if (total > spec.cap) {
        throw SizeError("sweep grid has " + std::to_string(total) + " points, cap is " + std::to_string(spec.cap));
    }
    return total;
}

InterdependenceMatrix effective_matrix(const Scenario& s) {
    return s.matrix_override ? *s.matrix_override : compute_matrix(s.network);
}

Scenario with_zero_interdependence(const Scenario& s) {
    Scenario out = s;
    out.matrix_override = InterdependenceMatrix(canonical_actor_order(s));
    return out;
}

Scenario apply_grid_point(const Scenario& base, const std::vector<SweepAxis>& axes,
                          const std::vector<double>& point) {
    Scenario s = base;
    std::optional<double> d_scale;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const double v = point.at(k);
        switch (axes[k].parameter) {
            case SweepParameter::gamma: s.value.gamma = v; break;
            case SweepParameter::beta: s.value.form = PowerForm{v}; break;
            case SweepParameter::theta: s.value.form = LogarithmicForm{v}; break;
            case SweepParameter::endowment:
                for (auto& [actor, e] : s.endowments) e = v;
                break;
            case SweepParameter::D_scale: d_scale = v; break;
            case SweepParameter::cost:
                if (v == 0.0) {
                    s.cost_model = LinearCost{};
                } else {
                    s.cost_model = QuadraticCost{v};
                }
                break;
            case SweepParameter::mode:
                if (v != 0.0 && v != 1.0) throw DomainError("mode axis values must be separable (0) or pooled (1)");
                s.appropriation_mode = v == 0.0 ? AppropriationMode::separable : AppropriationMode::pooled;
                break;
        }
    }
    if (d_scale) s.matrix_override = scaled(effective_matrix(s), *d_scale);
    return s;
}

namespace {

std::vector<Game> prepare_games(const SweepSpec& spec, const std::vector<std::vector<double>>& points) {
    std::vector<Game> games;
    games.reserve(points.size());
    for (const auto& p : points) games.push_back(make_game(apply_grid_point(spec.base, spec.axes, p)));
    return games;
}

}  // namespace

std::size_t check_sweep(const SweepSpec& spec) {
    const std::size_t total = grid_size(spec);
    spec.settings.validate();
    prepare_games(spec, enumerate_grid(spec.axes));
    return total;
}

SweepResult run_sweep(const SweepSpec& spec, const ProgressFn& progress) {
    const std::size_t total = grid_size(spec);
    spec.settings.validate();
    const auto points = enumerate_grid(spec.axes);
    const std::vector<Game> games = prepare_games(spec, points);

    SweepResult result;
    result.axes = spec.axes;
    result.order = canonical_actor_order(spec.base);
    result.rows.resize(total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            const EquilibriumResult r = solve(games[k], spec.settings);
            SweepRow& row = result.rows[k];
            row.parameters = points[k];
            row.actions = r.actions;
            row.total_value = r.value.total;
            row.payoffs = r.payoffs.pi;
            row.converged = r.converged;
            const std::size_t finished = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(finished, total);
            }
        }
    };

    const std::size_t threads =
        std::min<std::size_t>(total, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();
    return result;
}

std::string sweep_to_csv(const SweepResult& result) {
    std::ostringstream os;
    bool first = true;
    auto cell = [&](const std::string& text) {
        if (!first) os << ',';
        os << text;
        first = false;
    };
    for (const auto& axis : result.axes) cell(to_string(axis.parameter));
    for (const auto& actor : result.order) cell("action_" + actor.value);
    cell("total_value");
    cell("converged");
    os << '\n';
    for (const auto& row : result.rows) {
        first = true;
        for (std::size_t k = 0; k < result.axes.size(); ++k) {
            cell(axis_value_text(result.axes[k].parameter, row.parameters[k]));
        }
        for (double a : row.actions.actions) cell(format_g12(a));
        cell(format_g12(row.total_value));
        cell(row.converged ? "true" : "false");
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------

Scenario symmetric_template(const ValueForm& form, double gamma, double D, AppropriationMode mode,
                            double endowment) {
    Scenario s;
    s.network.actors = {ActorId{"A"}, ActorId{"B"}};
    s.value.form = form;
    s.value.synergy = SynergyKind::geometric_mean;
    s.value.gamma = gamma;
    s.bargaining.power = {{ActorId{"A"}, 1.0}, {ActorId{"B"}, 1.0}};
    s.endowments = {{ActorId{"A"}, endowment}, {ActorId{"B"}, endowment}};
    s.cost_model = LinearCost{};
    s.appropriation_mode = mode;
    InterdependenceMatrix m({ActorId{"A"}, ActorId{"B"}});
    m.at(0, 1) = D;
    m.at(1, 0) = D;
    s.matrix_override = m;
    return s;
}

namespace {

ExperimentSummary summarize(SweepResult sweep, const ValueSpec& spec) {
    ExperimentSummary out;
    for (const auto& row : sweep.rows) {
        out.mean_actions.push_back(mean(row.actions.actions));
        out.total_values.push_back(row.total_value);
        out.synergy_values.push_back(total_value(spec, row.actions).synergy_value);
    }
    // Synergy for gamma sweeps depends on the row's gamma, patched by the caller.
    if (!out.mean_actions.empty()) {
        out.action_change_percent = percent_change(out.mean_actions.front(), out.mean_actions.back());
        out.value_change_percent = percent_change(out.total_values.front(), out.total_values.back());
    }
    out.sweep = std::move(sweep);
    return out;
}

}  // namespace

ExperimentSummary experiment_interdependence(const ValueForm& form, const std::vector<double>& D_values,
                                             AppropriationMode mode, const SolveSettings& settings) {
    SweepSpec spec;
    spec.base = symmetric_template(form, 0.0, 1.0, mode);
    spec.axes = {{SweepParameter::D_scale, D_values}};
    spec.settings = settings;
    return summarize(run_sweep(spec), spec.base.value);
}

ExperimentSummary experiment_complementarity(const ValueForm& form, const std::vector<double>& gamma_values,
                                             double D, AppropriationMode mode, const SolveSettings& settings) {
    SweepSpec spec;
    spec.base = symmetric_template(form, 0.0, D, mode);
    spec.axes = {{SweepParameter::gamma, gamma_values}};
    spec.settings = settings;
    ExperimentSummary out = summarize(run_sweep(spec), spec.base.value);
    for (std::size_t k = 0; k < out.sweep.rows.size(); ++k) {
        ValueSpec v = spec.base.value;
        v.gamma = gamma_values[k];
        out.synergy_values[k] = total_value(v, out.sweep.rows[k].actions).synergy_value;
    }
    return out;
}

// ---------------------------------------------------------------------------

bool CounterfactualEdit::empty() const {
    return criticality_overrides.empty() && weight_overrides.empty() && !bargaining_overrides && !gamma_override;
}

bool CounterfactualEdit::touches_network() const {
    return !criticality_overrides.empty() || !weight_overrides.empty();
}

std::vector<Violation> validate_edit(const Scenario& s, const CounterfactualEdit& edit) {
    std::vector<Violation> out;
    std::set<LinkKey> links;
    for (const auto& l : s.network.links) links.insert(l.key());
    for (const auto& c : edit.criticality_overrides) {
        const std::string where =
            "criticality override " + c.link.depender.value + "->" + c.link.dependee.value + " [" + c.link.dependum_id + "]";
        if (!links.count(c.link)) out.push_back({"unknown_link", where + ": no such link"});
        if (!(c.criticality >= 0.0 && c.criticality <= 1.0)) {
            out.push_back({"criticality_out_of_range", where + ": criticality " + format_g12(c.criticality) + " outside [0,1]"});
        }
    }
    for (const auto& w : edit.weight_overrides) {
        const std::string where = "weight override " + w.actor.value + "/" + w.dependum_id;
        const auto& owned = s.network.dependums_of(w.actor);
        const bool found = std::any_of(owned.begin(), owned.end(), [&](const Dependum& d) { return d.id == w.dependum_id; });
        if (!found) out.push_back({"unknown_dependum", where + ": no such dependum"});
        if (!(w.weight >= 0.0) || !std::isfinite(w.weight)) {
            out.push_back({"negative_weight", where + ": weight must be >= 0"});
        }
    }
    if (edit.bargaining_overrides) {
        for (const auto& [actor, beta] : edit.bargaining_overrides->power) {
            if (!s.network.has_actor(actor)) out.push_back({"unknown_actor", "bargaining override for unknown actor '" + actor.value + "'"});
            if (!(beta > 0.0) || !std::isfinite(beta)) {
                out.push_back({"nonpositive_bargaining_power", "bargaining override for '" + actor.value + "' must be > 0"});
            }
        }
    }
    if (edit.gamma_override && (!(*edit.gamma_override >= 0.0) || !std::isfinite(*edit.gamma_override))) {
        out.push_back({"negative_gamma", "gamma override must be >= 0"});
    }
    return out;
}

Scenario apply_edit(const Scenario& s, const CounterfactualEdit& edit) {
    if (auto v = validate_edit(s, edit); !v.empty()) throw ValidationError(std::move(v));
    Scenario out = s;
    for (const auto& c : edit.criticality_overrides) {
        for (auto& link : out.network.links) {
            if (link.key() == c.link) {
                link.criticality = c.criticality;
                // An analyst-set criticality supersedes the 1/n rule.
                if (link.alternatives_count) link.criticality_override = true;
            }
        }
    }
    for (const auto& w : edit.weight_overrides) {
        for (auto& d : out.network.dependums[w.actor]) {
            if (d.id == w.dependum_id) d.importance_weight = w.weight;
        }
    }
    if (edit.bargaining_overrides) {
        for (const auto& [actor, beta] : edit.bargaining_overrides->power) out.bargaining.power[actor] = beta;
    }
    if (edit.gamma_override) out.value.gamma = *edit.gamma_override;
    if (edit.touches_network()) out.matrix_override.reset();
    if (auto v = validate_scenario(out); !v.empty()) throw ValidationError(std::move(v));
    return out;
}

InterdependenceMatrix CounterfactualReport::matrix_delta() const {
    InterdependenceMatrix d = edited_matrix;
    for (std::size_t k = 0; k < d.entries.size(); ++k) d.entries[k] -= base_matrix.entries[k];
    return d;
}

CounterfactualReport run_counterfactual(const Scenario& s, const CounterfactualEdit& edit,
                                        const SolveSettings& settings) {
    const Scenario edited = apply_edit(s, edit);
    const Game base_game = make_game(s);
    const Game edited_game = make_game(edited);

    CounterfactualReport r;
    r.base = solve(base_game, settings);
    r.edited = solve(edited_game, settings);
    r.base_matrix = base_game.D;
    r.edited_matrix = edited_game.D;
    r.base_shares = base_game.payoff.shares;
    r.edited_shares = edited_game.payoff.shares;
    r.matrix_override_dropped = s.matrix_override.has_value() && !edited.matrix_override.has_value();
    for (std::size_t i = 0; i < base_game.size(); ++i) {
        ActorDelta d;
        d.actor = base_game.order[i];
        d.base_action = r.base.actions[i];
        d.edited_action = r.edited.actions[i];
        d.base_payoff = r.base.payoffs.pi[i];
        d.edited_payoff = r.edited.payoffs.pi[i];
        d.base_utility = r.base.utilities[i];
        d.edited_utility = r.edited.utilities[i];
        d.base_share = r.base_shares.alpha[i];
        d.edited_share = r.edited_shares.alpha[i];
        r.deltas.push_back(d);
    }
    r.mean_action_reduction_percent = -percent_change(r.base.mean_action(), r.edited.mean_action());
    if (r.mean_action_reduction_percent == 0.0) r.mean_action_reduction_percent = 0.0;  // fold -0
    return r;
}

// ---------------------------------------------------------------------------

void ValidationRubric::validate() const {
    for (const auto* r : {&baseline_range, &coop_increase_range, &counterfactual_reduction_range}) {
        if (!(r->lo <= r->hi) || !std::isfinite(r->lo) || !std::isfinite(r->hi)) {
            throw DomainError("rubric ranges must be finite with lo <= hi");
        }
    }
    for (double p : {baseline_points, coop_increase_points, counterfactual_reduction_points}) {
        if (!(p >= 0.0)) throw DomainError("rubric points must be >= 0");
    }
    if (std::abs(max_total() - 60.0) > 1e-9) {
        throw DomainError("rubric points must total 60, got " + format_g12(max_total()));
    }
    if (grading == Grading::linear_decay && !(decay_width > 0.0)) {
        throw DomainError("linear_decay grading needs a positive width");
    }
}

double grade_metric(double metric, const MetricRange& range, double points, const ValidationRubric& rubric) {
    if (!std::isfinite(metric)) return 0.0;
    if (range.contains(metric)) return points;
    if (rubric.grading == Grading::step) return 0.0;
    const double distance = metric < range.lo ? range.lo - metric : metric - range.hi;
    return points * std::max(0.0, 1.0 - distance / rubric.decay_width);
}

ValidationScore grade_metrics(const ScoreMetrics& m, const ValidationRubric& rubric) {
    ValidationScore out;
    out.metrics = m;
    out.max_total = rubric.max_total();

    auto family = [&](std::string name, std::optional<double> metric, const MetricRange& range, double points) {
        FamilyScore f;
        f.family = std::move(name);
        f.max_points = points;
        if (!metric) {
            f.missing = true;
            out.flags.push_back(f.family + "_missing");
        } else {
            f.metric = *metric;
            f.in_range = range.contains(*metric);
            f.points = grade_metric(*metric, range, points, rubric);
        }
        out.total += f.points;
        out.families.push_back(std::move(f));
    };
    family("baseline", m.baseline_mean_action, rubric.baseline_range, rubric.baseline_points);
    family("coop_increase", m.coop_increase_percent, rubric.coop_increase_range, rubric.coop_increase_points);
    family("counterfactual_reduction", m.counterfactual_reduction_percent, rubric.counterfactual_reduction_range,
           rubric.counterfactual_reduction_points);
    if (!m.all_converged) out.flags.push_back("non_converged_solve");
    return out;
}

ValidationScore score_scenario(const Scenario& s, const ValidationRubric& rubric, const SolveSettings& settings,
                               const std::optional<CounterfactualEdit>& edit) {
    rubric.validate();
    const InterdependenceMatrix D = effective_matrix(s);
    if (std::all_of(D.entries.begin(), D.entries.end(), [](double v) { return v == 0.0; })) {
        throw DomainError("scoring needs a nonzero interdependence matrix");
    }

    ScoreMetrics m;
    const EquilibriumResult baseline = solve(with_zero_interdependence(s), settings);
    m.baseline_mean_action = baseline.mean_action();
    m.all_converged = baseline.converged;

    EquilibriumResult cooperative;
    if (edit) {
        const CounterfactualReport cf = run_counterfactual(s, *edit, settings);
        cooperative = cf.base;
        m.counterfactual_mean_action = cf.edited.mean_action();
        m.counterfactual_reduction_percent = cf.mean_action_reduction_percent;
        m.all_converged = m.all_converged && cf.edited.converged;
    } else {
        cooperative = solve(s, settings);
    }
    m.cooperative_mean_action = cooperative.mean_action();
    m.coop_increase_percent = percent_change(m.baseline_mean_action, m.cooperative_mean_action);
    m.all_converged = m.all_converged && cooperative.converged;

    return grade_metrics(m, rubric);
}

double percent_change(double from, double to) {
    if (from == 0.0) return to == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (to - from) / from * 100.0;
}

}  // namespace coop
